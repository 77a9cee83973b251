#include "dcps/dcps_c.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "dcps/baselines.hpp"
#include "dcps/eval.hpp"
#include "dcps/gaussian_mixture.hpp"
#include "dcps/harness.hpp"
#include "dcps/io.hpp"
#include "dcps/potentials.hpp"
#include "dcps/rng.hpp"
#include "dcps/sampler_dcps.hpp"
#include "dcps/schedule.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int map_exception() {
  try {
    throw;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return DCPS_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return DCPS_ERR_INVALID_ARGUMENT;
  } catch (const nlohmann::json::exception& e) {
    set_error(e.what());
    return DCPS_ERR_IO;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return DCPS_ERR_NUMERIC;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return DCPS_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    set_error(e.what());
    return DCPS_ERR_UNKNOWN;
  } catch (...) {
    set_error("unknown error");
    return DCPS_ERR_UNKNOWN;
  }
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DCPS_OK;
  } catch (...) {
    return map_exception();
  }
}

template <typename T, typename Fn>
T* guarded_create(Fn&& fn) {
  try {
    T* out = fn();
    g_last_error.clear();
    return out;
  } catch (...) {
    map_exception();
    return nullptr;
  }
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || options_json[0] == '\0')
    return json::object();
  return json::parse(options_json);
}

}  // namespace

struct dcps_schedule {
  dcps::NoiseSchedule rep;
};
struct dcps_mixture {
  dcps::IsotropicGm rep;
};
struct dcps_measurement {
  dcps::MeasurementModel rep;
};
struct dcps_posterior {
  dcps::FullCovGm rep;
};

extern "C" {

const char* dcps_last_error(void) { return g_last_error.c_str(); }

dcps_schedule* dcps_schedule_linear_beta(int n, double beta_min,
                                         double beta_max) {
  return guarded_create<dcps_schedule>([&] {
    return new dcps_schedule{
        dcps::NoiseSchedule::linear_beta(n, beta_min, beta_max)};
  });
}

dcps_schedule* dcps_schedule_create(const double* alpha_bar, int n) {
  return guarded_create<dcps_schedule>([&] {
    if (alpha_bar == nullptr) throw std::invalid_argument("alpha_bar is null");
    std::vector<double> ab(alpha_bar, alpha_bar + n + 1);
    return new dcps_schedule{dcps::NoiseSchedule(std::move(ab))};
  });
}

void dcps_schedule_free(dcps_schedule* s) { delete s; }

int dcps_schedule_steps(const dcps_schedule* s) {
  return s == nullptr ? -1 : s->rep.steps();
}

int dcps_schedule_alpha_bar(const dcps_schedule* s, double* out) {
  return guarded([&] {
    if (s == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    const auto& ab = s->rep.alpha_bar();
    std::memcpy(out, ab.data(), ab.size() * sizeof(double));
  });
}

dcps_mixture* dcps_mixture_create(int n_components, int dim,
                                  const double* means,
                                  const double* log_weights) {
  return guarded_create<dcps_mixture>([&] {
    if (means == nullptr || log_weights == nullptr)
      throw std::invalid_argument("null argument");
    Eigen::MatrixXd m(n_components, dim);
    for (int i = 0; i < n_components; ++i)
      for (int c = 0; c < dim; ++c) m(i, c) = means[i * dim + c];
    Eigen::VectorXd lw =
        Eigen::Map<const Eigen::VectorXd>(log_weights, n_components);
    return new dcps_mixture{dcps::IsotropicGm(std::move(m), std::move(lw))};
  });
}

void dcps_mixture_free(dcps_mixture* m) { delete m; }

int dcps_mixture_sample(const dcps_mixture* m, int n_samples, uint64_t seed,
                        double* out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    dcps::Rng rng(seed);
    const int d = m->rep.dim();
    for (int i = 0; i < n_samples; ++i)
      Eigen::Map<Eigen::VectorXd>(out + static_cast<size_t>(i) * d, d) =
          m->rep.sample(rng);
  });
}

dcps_measurement* dcps_measurement_create(int obs_dim, int dim,
                                          const double* A, const double* y,
                                          double sigma_y) {
  return guarded_create<dcps_measurement>([&] {
    if (A == nullptr || y == nullptr)
      throw std::invalid_argument("null argument");
    Eigen::MatrixXd a(obs_dim, dim);
    for (int r = 0; r < obs_dim; ++r)
      for (int c = 0; c < dim; ++c) a(r, c) = A[r * dim + c];
    Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y, obs_dim);
    return new dcps_measurement{
        dcps::MeasurementModel(std::move(a), std::move(yy), sigma_y)};
  });
}

void dcps_measurement_free(dcps_measurement* m) { delete m; }

dcps_posterior* dcps_posterior_create(const dcps_mixture* prior,
                                      const dcps_measurement* mm) {
  return guarded_create<dcps_posterior>([&] {
    if (prior == nullptr || mm == nullptr)
      throw std::invalid_argument("null argument");
    return new dcps_posterior{dcps::exact_posterior(prior->rep, mm->rep)};
  });
}

void dcps_posterior_free(dcps_posterior* p) { delete p; }

int dcps_posterior_sample(const dcps_posterior* p, int n_samples,
                          uint64_t seed, double* out) {
  return guarded([&] {
    if (p == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    dcps::Rng rng(seed);
    const int d = p->rep.dim();
    for (int i = 0; i < n_samples; ++i)
      Eigen::Map<Eigen::VectorXd>(out + static_cast<size_t>(i) * d, d) =
          p->rep.sample(rng);
  });
}

int dcps_posterior_log_pdf(const dcps_posterior* p, const double* x,
                           double* out) {
  return guarded([&] {
    if (p == nullptr || x == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    *out = p->rep.log_pdf(
        Eigen::Map<const Eigen::VectorXd>(x, p->rep.dim()));
  });
}

int dcps_run_sampler(const char* method, const char* options_json,
                     const dcps_schedule* schedule, const dcps_mixture* prior,
                     const dcps_measurement* mm, int n_samples, uint64_t seed,
                     double* out, int* n_failed) {
  return guarded([&] {
    if (method == nullptr || schedule == nullptr || prior == nullptr ||
        mm == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    const json opt = parse_options(options_json);
    const std::string name(method);
    const dcps::NoiseSchedule& sched = schedule->rep;
    const dcps::GmDenoiser den(prior->rep, sched);
    const dcps::LinearGaussianPotential pot(mm->rep);
    dcps::Rng rng(seed);
    const int d = prior->rep.dim();
    int failed = 0;

    for (int i = 0; i < n_samples; ++i) {
      Eigen::VectorXd s;
      if (name == "dcps") {
        dcps::DcpsConfig cfg;
        const int blocks = opt.value("L", 3);
        if (opt.contains("blocks") && opt.at("blocks").is_array()) {
          cfg.blocks.boundaries = opt.at("blocks").get<std::vector<int>>();
        } else {
          cfg.blocks = dcps::BlockSchedule::uniform(sched.steps(), blocks);
        }
        cfg.gradient_steps = opt.value("K", 2);
        cfg.langevin_steps = opt.value("M", 50);
        cfg.zeta = opt.value("zeta", 1.0);
        cfg.gamma = opt.value("gamma", 1e-2);
        cfg.drift_mode = opt.value("drift", std::string("biased")) == "exact"
                             ? dcps::EstimatorMode::kExact
                             : dcps::EstimatorMode::kBiased;
        cfg.objective_mode =
            opt.value("objective", std::string("biased")) == "exact"
                ? dcps::EstimatorMode::kExact
                : dcps::EstimatorMode::kBiased;
        s = dcps::dcps_sample(cfg, sched, den, pot, rng);
      } else if (name == "dps") {
        dcps::DpsConfig cfg;
        cfg.adaptive = opt.value("adaptive", true);
        cfg.step_scale = opt.value("step_scale", 0.1);
        cfg.fixed_zeta = opt.value("fixed_zeta", 1.0);
        s = dcps::dps_sample(cfg, sched, den, pot, rng);
      } else if (name == "pigdm") {
        s = dcps::pigdm_sample(dcps::PigdmConfig{}, sched, den, pot, rng);
      } else {
        throw std::invalid_argument("unknown sampler method: " + name);
      }
      if (!s.allFinite()) ++failed;
      Eigen::Map<Eigen::VectorXd>(out + static_cast<size_t>(i) * d, d) = s;
    }
    if (n_failed != nullptr) *n_failed = failed;
  });
}

int dcps_sliced_wasserstein(const double* x, const double* y, int n, int dim,
                            int n_slices, int order, uint64_t seed,
                            double* out) {
  return guarded([&] {
    if (x == nullptr || y == nullptr || out == nullptr)
      throw std::invalid_argument("null argument");
    Eigen::MatrixXd mx(n, dim), my(n, dim);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < dim; ++c) {
        mx(i, c) = x[static_cast<size_t>(i) * dim + c];
        my(i, c) = y[static_cast<size_t>(i) * dim + c];
      }
    dcps::Rng rng(seed);
    *out = dcps::sliced_wasserstein(mx, my, n_slices, rng, order);
  });
}

int dcps_run_experiment(const char* config_json, const char* out_dir,
                        int64_t master_seed, int jobs) {
  return guarded([&] {
    if (config_json == nullptr || out_dir == nullptr)
      throw std::invalid_argument("null argument");
    dcps::ExperimentConfig cfg =
        dcps::ExperimentConfig::from_json(json::parse(config_json));
    if (master_seed >= 0) cfg.master_seed = static_cast<uint64_t>(master_seed);
    if (jobs <= 0) {
      const char* env = std::getenv("DCPS_JOBS");
      jobs = env != nullptr ? std::atoi(env) : 1;
      if (jobs <= 0) jobs = 1;
    }
    dcps::run_experiment(cfg, out_dir, jobs);
  });
}

char* dcps_render_table(const char* in_dir) {
  if (in_dir == nullptr) {
    set_error("null argument");
    return nullptr;
  }
  try {
    const std::string md = dcps::render_table(in_dir);
    g_last_error.clear();
    return dup_string(md);
  } catch (...) {
    map_exception();
    return nullptr;
  }
}

char* dcps_propcheck(const char* options_json) {
  try {
    const json opt = parse_options(options_json);
    dcps::PropcheckOptions po;
    po.grid = opt.value("grid", 10);
    po.x_per_cell = opt.value("x_per_cell", 5);
    po.n_samples = opt.value("n_samples", 100000);
    po.seed = opt.value("seed", std::uint64_t{0});
    if (opt.contains("schedule")) po.schedule = opt.at("schedule");
    const std::string csv = dcps::propcheck_csv(po);
    g_last_error.clear();
    return dup_string(csv);
  } catch (...) {
    map_exception();
    return nullptr;
  }
}

int dcps_emit_scatter(const char* in_dir, const char* dims_dir, int replicate,
                      const char* algorithm, const char* out_path) {
  return guarded([&] {
    namespace fs = std::filesystem;
    if (in_dir == nullptr || algorithm == nullptr || out_path == nullptr)
      throw std::invalid_argument("null argument");
    fs::path base(in_dir);
    std::string dims;
    if (dims_dir != nullptr && dims_dir[0] != '\0') {
      dims = dims_dir;
    } else {
      std::vector<std::string> candidates;
      for (const auto& e : fs::directory_iterator(base))
        if (e.is_directory() &&
            e.path().filename().string().rfind("dx", 0) == 0)
          candidates.push_back(e.path().filename().string());
      if (candidates.empty())
        throw std::runtime_error("no dims directories under " +
                                 std::string(in_dir));
      std::sort(candidates.begin(), candidates.end());
      dims = candidates.front();
    }
    char rep[16];
    std::snprintf(rep, sizeof(rep), "rep%03d", replicate < 0 ? 0 : replicate);
    const fs::path dir = base / dims / rep;
    const Eigen::MatrixXd samples =
        dcps::read_matrix((dir / (std::string(algorithm) + ".bin")).string());
    const Eigen::MatrixXd ref =
        dcps::read_matrix((dir / "reference.bin").string());
    dcps::emit_scatter(samples, ref, out_path);
  });
}

void dcps_string_free(char* s) { delete[] s; }

}  // extern "C"
