#pragma once

#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "dcps/gaussian_mixture.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

// Flat binary matrix: 16-byte header (8-byte magic "DCPSBIN1", uint32 rows,
// uint32 cols, little endian) followed by row-major float64 payload.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Shortest exact decimal form; keeps CSV output byte-stable and lossless.
std::string format_double(double v);

nlohmann::json schedule_to_json(const NoiseSchedule& s);
NoiseSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json gm_to_json(const IsotropicGm& gm);
IsotropicGm gm_from_json(const nlohmann::json& j);

nlohmann::json measurement_to_json(const MeasurementModel& mm);
MeasurementModel measurement_from_json(const nlohmann::json& j);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

}  // namespace dcps
