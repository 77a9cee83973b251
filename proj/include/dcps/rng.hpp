#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace dcps {

// Deterministic pseudo-random stream owned by one sampling chain. Never
// shared across threads; independent chains get independent seeds through
// derive_seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normal_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  // Index draw from normalized probabilities.
  int categorical(const Eigen::VectorXd& probs);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed-splitting rule used throughout the harness: fold each word into the
// master seed with splitmix64. Same inputs give the same stream on any
// platform, so replicate i always sees seed derive_seed(master, {i, ...}).
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> words);

// FNV-1a, used to turn tags like "slices" into seed words.
std::uint64_t hash_tag(std::string_view tag);

}  // namespace dcps
