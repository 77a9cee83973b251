#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dcps/eval.hpp"
#include "dcps/gaussian_mixture.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

struct AlgorithmSpec {
  std::string name;
  std::string method;  // dcps | dps | pigdm | oracle
  nlohmann::json options;
};

struct ExperimentConfig {
  std::vector<std::pair<int, int>> dims;  // (d_x, d_y) pairs
  int n_components = 25;
  double grid_spacing = 8.0;
  int n_seeds = 30;
  int n_samples = 2000;
  int n_slices = 10000;
  int sw_order = 2;
  std::uint64_t master_seed = 0;
  nlohmann::json schedule;  // linear_beta parameters or explicit alpha_bar
  std::vector<AlgorithmSpec> algorithms;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

// One benchmark instance: grid-mixture prior, random linear observation,
// ground-truth signal. Fully determined by (config dims, seed).
struct Replicate {
  IsotropicGm prior;
  MeasurementModel measurement;
  Eigen::VectorXd x_star;
  std::uint64_t seed;
};

Replicate generate_replicate(const ExperimentConfig& cfg, int dx, int dy,
                             std::uint64_t seed);

NoiseSchedule schedule_from_config(const nlohmann::json& schedule_cfg);

// Runs the replicate x algorithm matrix, persists samples, metrics and
// summaries under out_dir. Tasks run on up to `jobs` threads; outputs are
// byte-identical for any job count.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int jobs);

// Scatter of the first two coordinates, algorithm over reference.
// Non-finite rows are skipped.
void emit_scatter(const Eigen::MatrixXd& samples,
                  const Eigen::MatrixXd& reference, const std::string& path);

// Markdown rendering of summary.csv produced by run_experiment.
std::string render_table(const std::string& in_dir);

struct PropcheckOptions {
  int grid = 10;        // grid points per axis of (l, k)
  int x_per_cell = 5;   // random states per cell
  int n_samples = 100000;
  std::uint64_t seed = 0;
  nlohmann::json schedule;  // empty -> default schedule
};

// Contraction sweep; returns CSV with columns l,k,lhs,rhs,factor.
std::string propcheck_csv(const PropcheckOptions& opt);

}  // namespace dcps
