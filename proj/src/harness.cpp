#include "dcps/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dcps/baselines.hpp"
#include "dcps/io.hpp"
#include "dcps/potentials.hpp"
#include "dcps/sampler_dcps.hpp"

namespace dcps {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string dims_dirname(int dx, int dy) {
  return "dx" + std::to_string(dx) + "_dy" + std::to_string(dy);
}

std::string rep_dirname(int rep) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rep%03d", rep);
  return buf;
}

DcpsConfig dcps_config_from_json(const json& opt, int n) {
  DcpsConfig cfg;
  const int num_blocks = opt.value("L", 3);
  if (opt.contains("blocks") && opt.at("blocks").is_array()) {
    cfg.blocks.boundaries = opt.at("blocks").get<std::vector<int>>();
    cfg.blocks.validate(n);
  } else {
    cfg.blocks = BlockSchedule::uniform(n, num_blocks);
  }
  cfg.gradient_steps = opt.value("K", 2);
  cfg.langevin_steps = opt.value("M", 50);
  cfg.zeta = opt.value("zeta", 1.0);
  cfg.gamma = opt.value("gamma", 1e-2);
  const auto mode = [](const std::string& s) {
    if (s == "biased") return EstimatorMode::kBiased;
    if (s == "exact") return EstimatorMode::kExact;
    throw std::invalid_argument("estimator mode must be biased or exact");
  };
  cfg.drift_mode = mode(opt.value("drift", std::string("biased")));
  cfg.objective_mode = mode(opt.value("objective", std::string("biased")));
  cfg.validate(n);
  return cfg;
}

struct RunRecord {
  RunValue value;
  int failed_samples = 0;
  std::string error;
};

struct TaskKey {
  int dim_idx;
  int rep;
  int algo_idx;
};

// Deterministic seeds: every stream hangs off the master seed and the
// task coordinates, never off thread identity.
std::uint64_t replicate_seed(const ExperimentConfig& cfg, int dim_idx,
                             int rep) {
  return derive_seed(cfg.master_seed,
                     {hash_tag("replicate"), static_cast<std::uint64_t>(dim_idx),
                      static_cast<std::uint64_t>(rep)});
}

Eigen::MatrixXd draw_posterior_matrix(const FullCovGm& post, int n_samples,
                                      std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(n_samples, post.dim());
  for (int i = 0; i < n_samples; ++i)
    out.row(i) = oracle_sample(post, rng).transpose();
  return out;
}

Eigen::MatrixXd run_algorithm(const ExperimentConfig& cfg,
                              const AlgorithmSpec& algo, const Replicate& rep,
                              const NoiseSchedule& base_sched,
                              std::uint64_t seed) {
  const int dx = rep.prior.dim();
  Eigen::MatrixXd out(cfg.n_samples, dx);

  if (algo.method == "oracle") {
    const FullCovGm post = exact_posterior(rep.prior, rep.measurement);
    return draw_posterior_matrix(post, cfg.n_samples, seed);
  }

  // Per-algorithm step-count override rebuilds the schedule family.
  NoiseSchedule sched = base_sched;
  if (algo.options.contains("n_steps") &&
      algo.options.at("n_steps").get<int>() != base_sched.steps()) {
    json sc = cfg.schedule;
    sc["n"] = algo.options.at("n_steps").get<int>();
    sched = schedule_from_config(sc);
  }
  const GmDenoiser den(rep.prior, sched);
  const LinearGaussianPotential pot(rep.measurement);
  Rng rng(seed);

  if (algo.method == "dcps") {
    const DcpsConfig dc = dcps_config_from_json(algo.options, sched.steps());
    for (int i = 0; i < cfg.n_samples; ++i)
      out.row(i) = dcps_sample(dc, sched, den, pot, rng).transpose();
  } else if (algo.method == "dps") {
    DpsConfig dps;
    dps.adaptive = algo.options.value("adaptive", true);
    dps.step_scale = algo.options.value("step_scale", 0.1);
    dps.fixed_zeta = algo.options.value("fixed_zeta", 1.0);
    for (int i = 0; i < cfg.n_samples; ++i)
      out.row(i) = dps_sample(dps, sched, den, pot, rng).transpose();
  } else if (algo.method == "pigdm") {
    const PigdmConfig pg;
    for (int i = 0; i < cfg.n_samples; ++i)
      out.row(i) = pigdm_sample(pg, sched, den, pot, rng).transpose();
  } else {
    throw std::invalid_argument("unknown method: " + algo.method);
  }
  return out;
}

void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
        fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("dims")) {
    const json& d = j.at("dims");
    if (d.is_array() && !d.empty() && d.front().is_array()) {
      for (const auto& p : d)
        cfg.dims.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else if (d.is_array() && d.size() == 2 && d.front().is_number()) {
      cfg.dims.emplace_back(d.at(0).get<int>(), d.at(1).get<int>());
    } else {
      throw std::invalid_argument("dims must be [dx, dy] or [[dx, dy], ...]");
    }
  }
  cfg.n_components = j.value("n_components", 25);
  cfg.grid_spacing = j.value("grid_spacing", 8.0);
  cfg.n_seeds = j.value("n_seeds", 30);
  cfg.n_samples = j.value("n_samples", 2000);
  cfg.n_slices = j.value("n_slices", 10000);
  cfg.sw_order = j.value("sw_order", 2);
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  cfg.schedule = j.value("schedule", json{{"type", "linear_beta"},
                                          {"n", 1000},
                                          {"beta_min", 1e-4},
                                          {"beta_max", 2e-2}});
  if (!j.contains("algorithms") || !j.at("algorithms").is_array() ||
      j.at("algorithms").empty())
    throw std::invalid_argument("config needs a nonempty algorithms list");
  for (const auto& a : j.at("algorithms")) {
    AlgorithmSpec spec;
    spec.method = a.at("method").get<std::string>();
    spec.name = a.value("name", spec.method);
    spec.options = a;
    spec.options.erase("name");
    spec.options.erase("method");
    cfg.algorithms.push_back(std::move(spec));
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  json dims = json::array();
  for (auto [dx, dy] : this->dims) dims.push_back(json::array({dx, dy}));
  j["dims"] = dims;
  j["n_components"] = n_components;
  j["grid_spacing"] = grid_spacing;
  j["n_seeds"] = n_seeds;
  j["n_samples"] = n_samples;
  j["n_slices"] = n_slices;
  j["sw_order"] = sw_order;
  j["master_seed"] = master_seed;
  j["schedule"] = schedule;
  json algos = json::array();
  for (const auto& a : algorithms) {
    json ja = a.options;
    ja["name"] = a.name;
    ja["method"] = a.method;
    algos.push_back(std::move(ja));
  }
  j["algorithms"] = algos;
  return j;
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("config needs dims");
  for (auto [dx, dy] : dims)
    if (dx < 1 || dy < 1)
      throw std::invalid_argument("dimensions must be positive");
  const int side = static_cast<int>(std::lround(std::sqrt(n_components)));
  if (side * side != n_components)
    throw std::invalid_argument("n_components must be a perfect square");
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  if (n_slices < 1) throw std::invalid_argument("n_slices must be >= 1");
  if (sw_order != 1 && sw_order != 2)
    throw std::invalid_argument("sw_order must be 1 or 2");
}

NoiseSchedule schedule_from_config(const json& schedule_cfg) {
  if (schedule_cfg.contains("alpha_bar"))
    return schedule_from_json(schedule_cfg);
  const std::string type =
      schedule_cfg.value("type", std::string("linear_beta"));
  if (type != "linear_beta")
    throw std::invalid_argument("unknown schedule type: " + type);
  return NoiseSchedule::linear_beta(schedule_cfg.value("n", 1000),
                                    schedule_cfg.value("beta_min", 1e-4),
                                    schedule_cfg.value("beta_max", 2e-2));
}

Replicate generate_replicate(const ExperimentConfig& cfg, int dx, int dy,
                             std::uint64_t seed) {
  Rng rng(seed);
  const int side = static_cast<int>(std::lround(std::sqrt(cfg.n_components)));

  // Grid means (spacing*i, spacing*j) repeated across coordinates; an odd
  // d_x truncates the final repeat.
  Eigen::MatrixXd means(cfg.n_components, dx);
  int comp = 0;
  const double half = (side - 1) / 2.0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j, ++comp) {
      const double a = cfg.grid_spacing * (i - half);
      const double b = cfg.grid_spacing * (j - half);
      for (int c = 0; c < dx; ++c) means(comp, c) = (c % 2 == 0) ? a : b;
    }
  }

  // Dirichlet(1,...,1) weights via normalized unit exponentials.
  Eigen::VectorXd logw(cfg.n_components);
  for (int i = 0; i < cfg.n_components; ++i) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    logw[i] = std::log(-std::log(u));
  }
  IsotropicGm prior(means, logw);

  Eigen::MatrixXd A(dy, dx);
  for (int r = 0; r < dy; ++r)
    for (int c = 0; c < dx; ++c) A(r, c) = rng.normal();
  double sigma_y = rng.uniform();
  while (sigma_y == 0.0) sigma_y = rng.uniform();

  const Eigen::VectorXd x_star = prior.sample(rng);
  const Eigen::VectorXd y = A * x_star + sigma_y * rng.normal_vector(dy);

  return Replicate{std::move(prior), MeasurementModel(A, y, sigma_y), x_star,
                   seed};
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int jobs) {
  cfg.validate();
  const NoiseSchedule base_sched = schedule_from_config(cfg.schedule);

  fs::create_directories(out_dir);
  write_text((fs::path(out_dir) / "config.json").string(),
             cfg.to_json().dump(2) + "\n");

  const int n_dims = static_cast<int>(cfg.dims.size());
  const int n_algos = static_cast<int>(cfg.algorithms.size());

  // Phase 1: replicate descriptors and reference posterior samples.
  for (int di = 0; di < n_dims; ++di)
    for (int rep = 0; rep < cfg.n_seeds; ++rep)
      fs::create_directories(fs::path(out_dir) /
                             dims_dirname(cfg.dims[di].first,
                                          cfg.dims[di].second) /
                             rep_dirname(rep));

  parallel_for(n_dims * cfg.n_seeds, jobs, [&](int t) {
    const int di = t / cfg.n_seeds;
    const int rep = t % cfg.n_seeds;
    const auto [dx, dy] = cfg.dims[di];
    const Replicate r =
        generate_replicate(cfg, dx, dy, replicate_seed(cfg, di, rep));
    const fs::path dir =
        fs::path(out_dir) / dims_dirname(dx, dy) / rep_dirname(rep);
    json meta;
    meta["seed"] = r.seed;
    meta["prior"] = gm_to_json(r.prior);
    meta["measurement"] = measurement_to_json(r.measurement);
    meta["x_star"] = vector_to_json(r.x_star);
    write_text((dir / "replicate.json").string(), meta.dump(2) + "\n");

    const FullCovGm post = exact_posterior(r.prior, r.measurement);
    const Eigen::MatrixXd ref = draw_posterior_matrix(
        post, cfg.n_samples,
        derive_seed(cfg.master_seed, {hash_tag("reference"),
                                      static_cast<std::uint64_t>(di),
                                      static_cast<std::uint64_t>(rep)}));
    write_matrix((dir / "reference.bin").string(), ref);
  });

  // Phase 2: the replicate x algorithm matrix.
  const int n_tasks = n_dims * cfg.n_seeds * n_algos;
  std::vector<RunRecord> records(n_tasks);
  parallel_for(n_tasks, jobs, [&](int t) {
    const int di = t / (cfg.n_seeds * n_algos);
    const int rep = (t / n_algos) % cfg.n_seeds;
    const int ai = t % n_algos;
    const auto [dx, dy] = cfg.dims[di];
    const AlgorithmSpec& algo = cfg.algorithms[ai];
    RunRecord& rec = records[t];
    try {
      const Replicate r =
          generate_replicate(cfg, dx, dy, replicate_seed(cfg, di, rep));
      const FullCovGm post = exact_posterior(r.prior, r.measurement);
      const Eigen::MatrixXd ref = draw_posterior_matrix(
          post, cfg.n_samples,
          derive_seed(cfg.master_seed, {hash_tag("reference"),
                                        static_cast<std::uint64_t>(di),
                                        static_cast<std::uint64_t>(rep)}));
      const std::uint64_t run_seed = derive_seed(
          cfg.master_seed,
          {hash_tag("run"), static_cast<std::uint64_t>(di),
           static_cast<std::uint64_t>(rep), hash_tag(algo.name)});
      const Eigen::MatrixXd samples =
          run_algorithm(cfg, algo, r, base_sched, run_seed);
      const fs::path dir =
          fs::path(out_dir) / dims_dirname(dx, dy) / rep_dirname(rep);
      write_matrix((dir / (algo.name + ".bin")).string(), samples);

      std::vector<Eigen::VectorXd> rows(samples.rows());
      for (int i = 0; i < samples.rows(); ++i)
        rows[i] = samples.row(i).transpose();
      const SampleSet set = SampleSet::collect(rows);
      rec.failed_samples = set.failed_count;
      if (set.failed()) {
        rec.value = {kFailedRunValue, true};
      } else {
        Rng slice_rng(derive_seed(
            cfg.master_seed,
            {hash_tag("slices"), static_cast<std::uint64_t>(di),
             static_cast<std::uint64_t>(rep), hash_tag(algo.name)}));
        rec.value = {sliced_wasserstein(set.samples, ref, cfg.n_slices,
                                        slice_rng, cfg.sw_order),
                     false};
      }
    } catch (const std::exception& e) {
      rec.value = {kFailedRunValue, true};
      rec.error = e.what();
    }
  });

  // Phase 3: summaries, sequential and in fixed order.
  std::ostringstream csv;
  csv << "algorithm,d_x,d_y,mean_sw,ci_halfwidth,n_failed\n";
  json jruns = json::array();
  json jsummaries = json::array();
  for (int di = 0; di < n_dims; ++di) {
    const auto [dx, dy] = cfg.dims[di];
    for (int ai = 0; ai < n_algos; ++ai) {
      std::vector<RunValue> values;
      for (int rep = 0; rep < cfg.n_seeds; ++rep) {
        const int t = (di * cfg.n_seeds + rep) * n_algos + ai;
        const RunRecord& rec = records[t];
        values.push_back(rec.value);
        json jr;
        jr["algorithm"] = cfg.algorithms[ai].name;
        jr["d_x"] = dx;
        jr["d_y"] = dy;
        jr["replicate"] = rep;
        jr["sw"] = rec.value.failed ? kFailedRunValue : rec.value.value;
        jr["failed"] = rec.value.failed;
        jr["n_failed_samples"] = rec.failed_samples;
        if (!rec.error.empty()) jr["error"] = rec.error;
        jruns.push_back(std::move(jr));
      }
      if (cfg.n_seeds >= 2) {
        const ReplicateSummary s = summarize(values);
        csv << cfg.algorithms[ai].name << ',' << dx << ',' << dy << ','
            << format_double(s.mean) << ',' << format_double(s.ci_halfwidth)
            << ',' << s.n_failed << '\n';
        json js;
        js["algorithm"] = cfg.algorithms[ai].name;
        js["d_x"] = dx;
        js["d_y"] = dy;
        js["mean_sw"] = s.mean;
        js["ci_halfwidth"] = s.ci_halfwidth;
        js["n_failed"] = s.n_failed;
        jsummaries.push_back(std::move(js));
      } else {
        const double v =
            values[0].failed ? kFailedRunValue : values[0].value;
        csv << cfg.algorithms[ai].name << ',' << dx << ',' << dy << ','
            << format_double(v) << ",0," << (values[0].failed ? 1 : 0)
            << '\n';
      }
    }
  }
  write_text((fs::path(out_dir) / "summary.csv").string(), csv.str());
  json jout;
  jout["runs"] = std::move(jruns);
  jout["summaries"] = std::move(jsummaries);
  write_text((fs::path(out_dir) / "summary.json").string(),
             jout.dump(2) + "\n");
}

void emit_scatter(const Eigen::MatrixXd& samples,
                  const Eigen::MatrixXd& reference, const std::string& path) {
  if (samples.cols() < 2 || reference.cols() < 2)
    throw std::invalid_argument("scatter needs at least two coordinates");

  double lo = 0.0, hi = 0.0;
  bool any = false;
  const auto scan = [&](const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i) {
      const double a = m(i, 0), b = m(i, 1);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      if (!any) {
        lo = std::min(a, b);
        hi = std::max(a, b);
        any = true;
      } else {
        lo = std::min(lo, std::min(a, b));
        hi = std::max(hi, std::max(a, b));
      }
    }
  };
  scan(reference);
  scan(samples);
  if (!any) throw std::invalid_argument("no finite points to plot");
  const double span = std::max(hi - lo, 1e-9);
  const double margin = 0.05 * span;
  lo -= margin;
  const double scale = 600.0 / (span + 2 * margin);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" "
         "height=\"600\" viewBox=\"0 0 600 600\">\n"
      << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  const auto draw = [&](const Eigen::MatrixXd& m, const char* cls,
                        const char* color) {
    for (int i = 0; i < m.rows(); ++i) {
      const double a = m(i, 0), b = m(i, 1);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      svg << "<circle class=\"" << cls << "\" cx=\""
          << format_double((a - lo) * scale) << "\" cy=\""
          << format_double(600.0 - (b - lo) * scale) << "\" r=\"2\" fill=\""
          << color << "\" fill-opacity=\"0.5\"/>\n";
    }
  };
  draw(reference, "reference", "#1f77b4");
  draw(samples, "algorithm", "#d62728");
  svg << "</svg>\n";
  write_text(path, svg.str());
}

std::string render_table(const std::string& in_dir) {
  const std::string csv =
      read_text((fs::path(in_dir) / "summary.csv").string());
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty summary.csv");

  struct Cell {
    double mean, ci;
    int failed;
  };
  std::vector<std::string> algos, dims;
  std::map<std::string, std::map<std::string, Cell>> table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string algo, dx, dy, mean, ci, failed;
    std::getline(ls, algo, ',');
    std::getline(ls, dx, ',');
    std::getline(ls, dy, ',');
    std::getline(ls, mean, ',');
    std::getline(ls, ci, ',');
    std::getline(ls, failed, ',');
    const std::string dim = "d_x=" + dx + ", d_y=" + dy;
    if (table.find(algo) == table.end()) algos.push_back(algo);
    bool seen = false;
    for (const auto& d : dims) seen |= (d == dim);
    if (!seen) dims.push_back(dim);
    table[algo][dim] = {std::stod(mean), std::stod(ci), std::stoi(failed)};
  }

  std::ostringstream md;
  md << "| algorithm |";
  for (const auto& d : dims) md << ' ' << d << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < dims.size(); ++i) md << "---|";
  md << '\n';
  char buf[96];
  for (const auto& a : algos) {
    md << "| " << a << " |";
    for (const auto& d : dims) {
      const auto it = table[a].find(d);
      if (it == table[a].end()) {
        md << " - |";
        continue;
      }
      std::snprintf(buf, sizeof(buf), " %.2f ± %.2f", it->second.mean,
                    it->second.ci);
      md << buf;
      if (it->second.failed > 0) md << " (" << it->second.failed << " failed)";
      md << " |";
    }
    md << '\n';
  }
  return md.str();
}

std::string propcheck_csv(const PropcheckOptions& opt) {
  const NoiseSchedule sched =
      opt.schedule.is_null() || opt.schedule.empty()
          ? NoiseSchedule::linear_beta(1000, 1e-4, 2e-2)
          : schedule_from_config(opt.schedule);
  if (opt.grid < 1 || opt.x_per_cell < 1 || opt.n_samples < 2)
    throw std::invalid_argument("bad propcheck options");
  const int n = sched.steps();

  Eigen::MatrixXd means(3, 1);
  means << -8.0, 0.0, 8.0;
  Rng setup_rng(derive_seed(opt.seed, {hash_tag("propcheck")}));
  Eigen::VectorXd logw(3);
  for (int i = 0; i < 3; ++i) {
    double u = setup_rng.uniform();
    while (u <= 0.0) u = setup_rng.uniform();
    logw[i] = std::log(-std::log(u));
  }
  const IsotropicGm gm(means, logw);

  std::ostringstream csv;
  csv << "l,k,lhs,rhs,factor\n";
  for (int kj = 0; kj < opt.grid; ++kj) {
    const int k = std::max(
        2, static_cast<int>(std::lround(
               static_cast<double>(n) * (kj + 1) / opt.grid)));
    for (int li = 0; li < opt.grid; ++li) {
      const int l = static_cast<int>(
          std::lround(static_cast<double>(k) * li / opt.grid));
      for (int xi = 0; xi < opt.x_per_cell; ++xi) {
        Rng rng(derive_seed(opt.seed, {hash_tag("cell"),
                                       static_cast<std::uint64_t>(kj),
                                       static_cast<std::uint64_t>(li),
                                       static_cast<std::uint64_t>(xi)}));
        const double x_k = 3.0 * rng.normal();
        const PropA1Result res =
            prop_a1_check(gm, sched, l, k, x_k, opt.n_samples, rng);
        csv << l << ',' << k << ',' << format_double(res.lhs) << ','
            << format_double(res.rhs) << ',' << format_double(res.factor)
            << '\n';
      }
    }
  }
  return csv.str();
}

}  // namespace dcps
