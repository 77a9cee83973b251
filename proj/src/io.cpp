#include "dcps/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace dcps {

namespace {
constexpr char kMagic[8] = {'D', 'C', 'P', 'S', 'B', 'I', 'N', '1'};
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
  f.write(kMagic, sizeof(kMagic));
  f.write(reinterpret_cast<const char*>(&rows), 4);
  f.write(reinterpret_cast<const char*>(&cols), 4);
  std::vector<double> row(cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    Eigen::VectorXd::Map(row.data(), cols) = m.row(i);
    f.write(reinterpret_cast<const char*>(row.data()), 8u * cols);
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  std::uint32_t rows = 0, cols = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&rows), 4);
  f.read(reinterpret_cast<char*>(&cols), 4);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a sample matrix file: " + path);
  Eigen::MatrixXd m(rows, cols);
  std::vector<double> row(cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), 8u * cols);
    m.row(i) = Eigen::VectorXd::Map(row.data(), cols);
  }
  if (!f) throw std::runtime_error("truncated matrix file: " + path);
  return m;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string s((std::istreambuf_iterator<char>(f)),
                std::istreambuf_iterator<char>());
  return s;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  return buf;
}

nlohmann::json schedule_to_json(const NoiseSchedule& s) {
  return {{"n", s.steps()}, {"alpha_bar", s.alpha_bar()}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  const auto ab = j.at("alpha_bar").get<std::vector<double>>();
  if (j.contains("n") &&
      j.at("n").get<int>() != static_cast<int>(ab.size()) - 1)
    throw std::invalid_argument("schedule n inconsistent with alpha_bar");
  return NoiseSchedule(ab);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("expected a nonempty array of rows");
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols)
      throw std::invalid_argument("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

nlohmann::json gm_to_json(const IsotropicGm& gm) {
  return {{"means", matrix_to_json(gm.means())},
          {"log_weights", vector_to_json(gm.log_weights())}};
}

IsotropicGm gm_from_json(const nlohmann::json& j) {
  return IsotropicGm(matrix_from_json(j.at("means")),
                     vector_from_json(j.at("log_weights")));
}

nlohmann::json measurement_to_json(const MeasurementModel& mm) {
  return {{"A", matrix_to_json(mm.A)},
          {"y", vector_to_json(mm.y)},
          {"sigma_y", mm.sigma_y}};
}

MeasurementModel measurement_from_json(const nlohmann::json& j) {
  return MeasurementModel(matrix_from_json(j.at("A")),
                          vector_from_json(j.at("y")),
                          j.at("sigma_y").get<double>());
}

}  // namespace dcps
