#include "pss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "pss/errors.hpp"
#include "pss/rng.hpp"

namespace pss {

using nlohmann::json;

// -- sampler spec ------------------------------------------------------------

RadialFactorization SamplerSpec::at(int dim) const {
  switch (kind) {
    case Kind::Uss: return RadialFactorization::uss(dim);
    case Kind::Pss: return RadialFactorization::pss(dim);
    case Kind::Custom: return RadialFactorization(alpha, dim);
  }
  throw ConfigError("unknown sampler kind");
}

std::string SamplerSpec::name() const {
  switch (kind) {
    case Kind::Uss: return "USS";
    case Kind::Pss: return "PSS";
    case Kind::Custom: {
      std::ostringstream os;
      os << "alpha=" << alpha;
      return os.str();
    }
  }
  return "?";
}

namespace {

SamplerSpec parse_sampler(const json& j) {
  if (j.is_number()) {
    const double a = j.get<double>();
    if (!std::isfinite(a) || a < 0.0) throw ConfigError("sampler alpha must be finite and >= 0");
    return {SamplerSpec::Kind::Custom, a};
  }
  if (j.is_object()) {
    if (!j.contains("alpha")) throw ConfigError("sampler object needs an 'alpha' field");
    return parse_sampler(j.at("alpha"));
  }
  if (!j.is_string()) throw ConfigError("sampler must be \"uss\", \"pss\" or a number");
  std::string s = j.get<std::string>();
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "uss") return SamplerSpec::uss();
  if (s == "pss") return SamplerSpec::pss();
  throw ConfigError("unknown sampler '" + s + "'");
}

BuiltinTarget parse_target(const json& j) {
  if (j.is_string()) return {parse_target_tag(j.get<std::string>()), 1.0};
  if (!j.is_object() || !j.contains("tag")) throw ConfigError("target needs a 'tag' field");
  BuiltinTarget t;
  t.tag = parse_target_tag(j.at("tag").get<std::string>());
  if (t.tag == TargetTag::Volcano) t.param = 2.0;
  if (j.contains("param")) t.param = j.at("param").get<double>();
  if (!(t.param > 0.0) || !std::isfinite(t.param)) {
    throw ConfigError("target parameter must be positive and finite");
  }
  return t;
}

json target_json(const BuiltinTarget& t) { return {{"tag", to_string(t.tag)}, {"param", t.param}}; }

template <class T>
std::vector<T> int_list(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string(key) + " must be an array");
  std::vector<T> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw ConfigError(std::string(key) + " entries must be integers");
    out.push_back(e.get<T>());
  }
  return out;
}

const std::vector<std::string> kKnownKeys = {
    "targets", "target", "samplers", "sampler", "dims", "n_it", "n_rep", "base_seed", "grid",
    "k", "ks_samples", "ks_threshold", "ks_dims", "mc_steps", "duality_dims", "corrupt_ell",
    "threads", "output"};

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["targets"] = json::array();
  for (const auto& t : targets) j["targets"].push_back(target_json(t));
  j["samplers"] = json::array();
  for (const auto& s : samplers) j["samplers"].push_back(s.name());
  j["dims"] = dims;
  j["n_it"] = n_it;
  j["n_rep"] = n_rep;
  j["base_seed"] = base_seed;
  j["grid"] = {{"size", grid.grid_size},
               {"refine", grid.refine},
               {"mass_tol", grid.mass_tol},
               {"check_refinement", grid.check_refinement},
               {"refinement_tol", grid.refinement_tol}};
  j["k"] = ks;
  j["ks_samples"] = ks_samples;
  j["ks_threshold"] = ks_threshold;
  j["ks_dims"] = ks_dims;
  j["mc_steps"] = mc_steps;
  j["duality_dims"] = duality_dims;
  j["corrupt_ell"] = corrupt_ell;
  j["paper_scale"] = paper_scale;
  if (output) j["output"] = output->string();
  return j;
}

ExperimentConfig parse_config(const json& doc, Command command, bool paper_scale) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  ExperimentConfig c;
  c.paper_scale = paper_scale;
  try {
    // per-command defaults
    switch (command) {
      case Command::IatSweep:
        c.targets = {BuiltinTarget::exponential()};
        c.samplers = {SamplerSpec::uss(), SamplerSpec::pss()};
        c.dims = paper_scale ? std::vector<int>{1, 2, 3, 5, 10, 20, 30, 50, 75, 100}
                             : std::vector<int>{1, 2, 3, 5, 10, 20, 30};
        break;
      case Command::GapTable:
        c.targets = {BuiltinTarget::exponential(), BuiltinTarget::volcano(2.0),
                     BuiltinTarget::gaussian()};
        c.samplers = {SamplerSpec::pss()};
        c.dims = paper_scale ? std::vector<int>{2, 5, 10, 50, 100} : std::vector<int>{2, 5, 10, 30};
        break;
      case Command::CheckLambda:
        c.targets = {BuiltinTarget::exponential(), BuiltinTarget::volcano(2.0),
                     BuiltinTarget::gaussian()};
        c.samplers = {SamplerSpec::pss()};
        c.dims = {2, 3, 5, 10};
        c.ks = {1};
        break;
      case Command::Verify:
        c.targets = {BuiltinTarget::exponential(), BuiltinTarget::volcano(2.0),
                     BuiltinTarget::gaussian(), BuiltinTarget::radial_weighted_exponential()};
        c.samplers = {SamplerSpec::uss(), SamplerSpec::pss()};
        c.dims = {2, 5, 10};
        break;
    }
    if (paper_scale) {
      c.n_it = 100'000;
      c.n_rep = 10;
    }

    if (doc.contains("targets")) {
      c.targets.clear();
      for (const auto& t : doc.at("targets")) c.targets.push_back(parse_target(t));
    } else if (doc.contains("target")) {
      c.targets = {parse_target(doc.at("target"))};
    }
    if (doc.contains("samplers")) {
      c.samplers.clear();
      for (const auto& s : doc.at("samplers")) c.samplers.push_back(parse_sampler(s));
    } else if (doc.contains("sampler")) {
      c.samplers = {parse_sampler(doc.at("sampler"))};
    }
    if (doc.contains("dims")) c.dims = int_list<int>(doc.at("dims"), "dims");
    if (doc.contains("n_it")) c.n_it = doc.at("n_it").get<std::int64_t>();
    if (doc.contains("n_rep")) c.n_rep = doc.at("n_rep").get<int>();
    if (doc.contains("base_seed")) c.base_seed = doc.at("base_seed").get<std::uint64_t>();
    if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      if (!g.is_object()) throw ConfigError("grid must be an object");
      c.grid.grid_size = g.value("size", c.grid.grid_size);
      c.grid.refine = g.value("refine", c.grid.refine);
      c.grid.mass_tol = g.value("mass_tol", c.grid.mass_tol);
      c.grid.check_refinement = g.value("check_refinement", c.grid.check_refinement);
      c.grid.refinement_tol = g.value("refinement_tol", c.grid.refinement_tol);
    }
    if (doc.contains("k")) c.ks = int_list<int>(doc.at("k"), "k");
    c.ks_samples = doc.value("ks_samples", c.ks_samples);
    c.ks_threshold = doc.value("ks_threshold", c.ks_threshold);
    if (doc.contains("ks_dims")) c.ks_dims = int_list<int>(doc.at("ks_dims"), "ks_dims");
    c.mc_steps = doc.value("mc_steps", c.mc_steps);
    if (doc.contains("duality_dims")) {
      c.duality_dims = int_list<int>(doc.at("duality_dims"), "duality_dims");
    }
    c.corrupt_ell = doc.value("corrupt_ell", c.corrupt_ell);
    c.threads = doc.value("threads", c.threads);
    if (doc.contains("output")) c.output = doc.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  // validation
  if (c.targets.empty()) throw ConfigError("at least one target is required");
  if (c.samplers.empty()) throw ConfigError("at least one sampler is required");
  if (c.dims.empty()) throw ConfigError("dims must be nonempty");
  for (int d : c.dims) {
    if (d < 1) throw ConfigError("dims must be positive");
  }
  for (int d : c.ks_dims) {
    if (d < 1) throw ConfigError("ks_dims must be positive");
  }
  for (int d : c.duality_dims) {
    if (d < 1) throw ConfigError("duality_dims must be positive");
  }
  for (const auto& s : c.samplers) {
    if (s.kind != SamplerSpec::Kind::Custom) continue;
    for (int d : c.dims) {
      if (s.alpha > d - 1) {
        throw ConfigError("alpha " + std::to_string(s.alpha) + " exceeds d - 1 for d = " +
                          std::to_string(d));
      }
    }
  }
  if (c.n_it < 10) throw ConfigError("n_it must be at least 10");
  if (c.n_rep < 1) throw ConfigError("n_rep must be at least 1");
  if (c.grid.grid_size < 2) throw ConfigError("grid.size must be at least 2");
  if (c.grid.refine < 1) throw ConfigError("grid.refine must be positive");
  if (!(c.grid.mass_tol > 0.0 && c.grid.mass_tol < 1.0)) {
    throw ConfigError("grid.mass_tol must lie in (0, 1)");
  }
  if (command == Command::CheckLambda && c.ks.empty()) throw ConfigError("k must be nonempty");
  for (int k : c.ks) {
    if (k < 1) throw ConfigError("k must be at least 1");
  }
  if (c.ks_samples < 1) throw ConfigError("ks_samples must be positive");
  if (c.mc_steps < 1) throw ConfigError("mc_steps must be positive");
  if (c.threads < 0) throw ConfigError("threads must be nonnegative");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, Command command,
                             bool paper_scale) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, command, paper_scale);
}

std::uint64_t derive_seed(std::uint64_t base_seed, int d, const std::string& sampler, int rep) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : sampler) h = (h ^ ch) * 0x100000001b3ULL;
  std::uint64_t x = splitmix64(static_cast<std::uint64_t>(d));
  x = splitmix64(x ^ h);
  x = splitmix64(x ^ static_cast<std::uint64_t>(rep));
  return base_seed ^ x;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// -- iat-sweep -------------------------------------------------------------

IatSweepResult run_iat_sweep(const ExperimentConfig& config) {
  const auto& target_spec = config.targets.front();
  struct Task {
    int d;
    std::size_t sampler;
    int rep;
  };
  std::vector<int> dims = config.dims;
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  std::vector<Task> tasks;
  for (int d : dims) {
    for (std::size_t s = 0; s < config.samplers.size(); ++s) {
      for (int r = 0; r < config.n_rep; ++r) tasks.push_back({d, s, r});
    }
  }

  IatSweepResult result;
  result.rows.resize(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto& sampler = config.samplers[task.sampler];
    const RadialTarget target = make_target(target_spec, task.d);
    const RadialFactorization fac = sampler.at(task.d);
    IatRow& row = result.rows[i];
    row.d = task.d;
    row.sampler = sampler.name();
    row.rep = task.rep;
    row.seed = derive_seed(config.base_seed, task.d, row.sampler, task.rep);
    const auto start = std::chrono::steady_clock::now();
    const Trace trace =
        run_x_chain(target, fac, config.n_it, default_initial_radius(target), row.seed);
    row.iat = iat(trace.values);
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
  });

  // tasks were enumerated in (d, sampler, rep) order, so rows already are
  for (std::size_t first = 0; first < result.rows.size(); first += config.n_rep) {
    IatSummary s;
    s.d = result.rows[first].d;
    s.sampler = result.rows[first].sampler;
    const std::size_t last = first + config.n_rep;
    for (std::size_t i = first; i < last; ++i) {
      s.mean += result.rows[i].iat.value;
      s.wall_time_ms += result.rows[i].wall_time_ms;
    }
    s.mean /= config.n_rep;
    if (config.n_rep > 1) {
      double ss = 0.0;
      for (std::size_t i = first; i < last; ++i) ss += std::pow(result.rows[i].iat.value - s.mean, 2);
      s.sd = std::sqrt(ss / (config.n_rep - 1));
    }
    result.summary.push_back(s);
  }
  return result;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

std::string iat_sweep_csv(const IatSweepResult& result, bool include_wall_time) {
  std::ostringstream os;
  os << kIatCsvHeader << '\n';
  auto wall = [&](double ms) { return include_wall_time ? fmt(ms) : std::string(); };
  std::size_t next_summary = 0;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    os << r.d << ',' << r.sampler << ',' << r.rep << ',' << r.seed << ',' << fmt(r.iat.value)
       << ',' << r.iat.truncation_lag << ',' << wall(r.wall_time_ms) << ",,\n";
    const bool block_end = i + 1 == result.rows.size() || result.rows[i + 1].d != r.d ||
                           result.rows[i + 1].sampler != r.sampler;
    if (block_end && next_summary < result.summary.size()) {
      const auto& s = result.summary[next_summary++];
      os << s.d << ',' << s.sampler << ",-1,," << fmt(s.mean) << ",," << wall(s.wall_time_ms)
         << ',' << fmt(s.mean) << ',' << fmt(s.sd) << '\n';
    }
  }
  return os.str();
}

// -- gap-table -------------------------------------------------------------

std::vector<GapRow> run_gap_table(const ExperimentConfig& config) {
  struct Task {
    std::size_t target;
    std::size_t sampler;
    int d;
  };
  std::vector<Task> tasks;
  for (std::size_t t = 0; t < config.targets.size(); ++t) {
    for (std::size_t s = 0; s < config.samplers.size(); ++s) {
      for (int d : config.dims) tasks.push_back({t, s, d});
    }
  }
  std::vector<GapRow> rows(tasks.size());
  // dense eigensolves are memory heavy; cap the pool
  const int threads = std::min(config.threads > 0 ? config.threads : 2, 2);
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const RadialTarget target = make_target(config.targets[task.target], task.d);
    const RadialFactorization fac = config.samplers[task.sampler].at(task.d);
    GapRow& row = rows[i];
    row.target = describe(config.targets[task.target]);
    row.alpha = fac.alpha();
    row.d = task.d;
    row.estimate = certify_gap(make_level_set_function(target, fac), config.grid);
  });
  return rows;
}

json to_json(const GapEstimate& est) {
  json j;
  j["gap"] = est.gap;
  j["lambda2"] = est.lambda2;
  j["grid_size"] = est.grid_size;
  // NaN has no JSON literal
  j["refinement_delta"] =
      std::isnan(est.refinement_delta) ? json(nullptr) : json(est.refinement_delta);
  j["truncation_mass"] = est.truncation_mass;
  j["converged"] = est.converged;
  return j;
}

json gap_table_json(const std::vector<GapRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json j = to_json(r.estimate);
    j["target"] = r.target;
    j["alpha"] = r.alpha;
    j["d"] = r.d;
    out.push_back(std::move(j));
  }
  return out;
}

// -- check-lambda ----------------------------------------------------------

std::vector<LambdaRow> run_check_lambda(const ExperimentConfig& config) {
  std::vector<LambdaRow> rows;
  for (const auto& spec : config.targets) {
    for (const auto& sampler : config.samplers) {
      for (int d : config.dims) {
        const RadialTarget target = make_target(spec, d);
        const RadialFactorization fac = sampler.at(d);
        const LevelSetFunction ell = make_level_set_function(target, fac);
        const ProbeGrid probe = default_probe_grid(ell);
        for (int k : config.ks) {
          rows.push_back({describe(spec), fac.alpha(), d, lambda_k_check(ell, k, probe)});
        }
      }
    }
  }
  return rows;
}

json to_json(const MembershipReport& report) {
  json v = json::array();
  for (const auto& x : report.violations) {
    v.push_back({{"log_t", x.log_t}, {"check", x.check}, {"magnitude", x.magnitude}});
  }
  return {{"k", report.k}, {"passed", report.passed}, {"violations", std::move(v)}};
}

json lambda_table_json(const std::vector<LambdaRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json j = to_json(r.report);
    j["target"] = r.target;
    j["alpha"] = r.alpha;
    j["d"] = r.d;
    out.push_back(std::move(j));
  }
  return out;
}

// -- verify ----------------------------------------------------------------

bool VerifyReport::ok() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

json VerifyReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) {
    const char* s = c.status == CheckStatus::Pass ? "pass"
                    : c.status == CheckStatus::Fail ? "fail"
                                                    : "skipped";
    arr.push_back({{"name", c.name}, {"status", s}, {"detail", c.detail}});
  }
  return {{"ok", ok()}, {"checks", std::move(arr)}};
}

double ks_one_step_x(const RadialTarget& target, const RadialFactorization& fac, int samples,
                     std::uint64_t seed) {
  const RadialStationarySampler oracle(target);
  const double mode = mode_radius(target, fac);
  const double sup = sup_log_h(target, fac);
  Rng init(seed, 0), step(seed, 1);
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) {
    const double r0 = oracle(init);
    const LogLevel t = t_update(log_h(target, fac, r0), step.uniform());
    const LevelInterval iv = level_interval(target, fac, t, mode, sup);
    out[i] = x_update_radius(iv, fac, step.uniform());
  }
  return ks_statistic(std::move(out), [&](double r) { return oracle.cdf(r); });
}

double ks_one_step_t(const RadialTarget& target, const RadialFactorization& fac, int samples,
                     std::uint64_t seed) {
  const LevelSetFunction ell = make_level_set_function(target, fac);
  const LevelStationarySampler oracle(ell);
  const double mode = mode_radius(target, fac);
  const double sup = sup_log_h(target, fac);
  Rng init(seed, 0), step(seed, 1);
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) {
    const LogLevel t0{oracle(init)};
    const LevelInterval iv = level_interval(target, fac, t0, mode, sup);
    const double r = x_update_radius(iv, fac, step.uniform());
    out[i] = t_update(log_h(target, fac, r), step.uniform()).value;
  }
  return ks_statistic(std::move(out), [&](double u) { return oracle.cdf(u); });
}

bool KernelProbe::pass() const { return std::abs(quadrature - monte_carlo) <= tolerance; }

std::vector<KernelProbe> kernel_monte_carlo_probes(const RadialTarget& target,
                                                   const RadialFactorization& fac, int probes,
                                                   std::int64_t steps, std::uint64_t seed,
                                                   int threads) {
  const LevelSetFunction ell = make_level_set_function(target, fac);
  const LevelStationarySampler levels(ell);
  const double mode = mode_radius(target, fac);
  const double sup = sup_log_h(target, fac);
  std::vector<KernelProbe> out(probes);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    KernelProbe& p = out[i];
    p.log_t = levels.quantile((i + 0.5) / probes);
    const LogLevel t{p.log_t};
    p.quadrature = kernel_probability(ell, t, -kInf, p.log_t);
    // every step starts at t, so the level interval is fixed
    const LevelInterval iv = level_interval(target, fac, t, mode, sup);
    Rng rng(seed, i);
    std::int64_t hits = 0;
    for (std::int64_t s = 0; s < steps; ++s) {
      const double r = x_update_radius(iv, fac, rng.uniform());
      if (t_update(log_h(target, fac, r), rng.uniform()).value < p.log_t) ++hits;
    }
    p.monte_carlo = static_cast<double>(hits) / static_cast<double>(steps);
    const double q = p.quadrature;
    p.tolerance = 3.0 * std::sqrt(std::max(q * (1.0 - q), 0.0) / static_cast<double>(steps)) + 1e-4;
  });
  return out;
}

DualityReport radial_weighted_duality(int d, const GapOptions& opts, int probes) {
  const RadialTarget t = make_target(BuiltinTarget::radial_weighted_exponential(), d);
  const LevelSetFunction ell = make_level_set_function(t, RadialFactorization::pss(d));
  // e^{-c|s|} with c = 2 / sigma_{d-1}
  const RadialTarget line = make_target(BuiltinTarget::exponential(2.0 / surface_area(d)), 1);
  const LevelSetFunction ell_line = make_level_set_function(line, RadialFactorization::uss(1));
  return duality_gap_compare(ell, ell_line, opts, probes);
}

LevelSetFunction corrupt_level_set(const LevelSetFunction& ell) {
  const MassCutoff cut = lower_mass_cutoff(ell, 1e-8);
  const double u0 = 0.5 * (cut.log_t_min + ell.support_sup());
  const double amp = 0.5 * ell.value(LogLevel{u0});
  const double width = 0.01;
  auto base = ell;
  return LevelSetFunction(
      [base, u0, amp, width](double u) {
        const double bump = amp * std::exp(-std::pow((u - u0) / width, 2));
        const double v = base.value(LogLevel{u});
        return std::log(v + bump);
      },
      ell.support_sup(), ell.log_limit(), ell.label() + "+bump");
}

namespace {

std::string describe_sci(const char* label, double v) {
  std::ostringstream os;
  os << label << '=' << std::setprecision(4) << v;
  return os.str();
}

template <class Fn>
CheckResult guarded(std::string name, Fn&& body) {
  try {
    return body(std::move(name));
  } catch (const std::exception& e) {
    return {std::move(name), CheckStatus::Fail, std::string("error: ") + e.what()};
  }
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& config) {
  // below this many samples a 0.02 KS threshold has no power to speak of
  constexpr int kMinKsSamples = 1000;
  VerifyReport report;
  auto& checks = report.checks;

  // one-step stationarity of both chains
  for (const auto& spec : config.targets) {
    for (const auto& sampler : config.samplers) {
      for (int d : config.ks_dims) {
        for (const char* chain : {"x", "t"}) {
          std::ostringstream name;
          name << "ks_" << chain << '/' << describe(spec) << '/' << sampler.name() << "/d=" << d;
          if (config.ks_samples < kMinKsSamples) {
            checks.push_back({name.str(), CheckStatus::Skipped,
                              "underpowered: ks_samples=" + std::to_string(config.ks_samples) +
                                  " < " + std::to_string(kMinKsSamples)});
            continue;
          }
          checks.push_back(guarded(name.str(), [&](std::string n) {
            const RadialTarget target = make_target(spec, d);
            const RadialFactorization fac = sampler.at(d);
            const std::uint64_t seed = derive_seed(config.base_seed, d, n, 0);
            const double ks = chain[0] == 'x' ? ks_one_step_x(target, fac, config.ks_samples, seed)
                                              : ks_one_step_t(target, fac, config.ks_samples, seed);
            return CheckResult{std::move(n),
                               ks <= config.ks_threshold ? CheckStatus::Pass : CheckStatus::Fail,
                               describe_sci("ks", ks)};
          }));
        }
      }
    }
  }

  // kernel quadrature against simulated T-steps
  checks.push_back(guarded("kernel_mc/exponential/PSS/d=5", [&](std::string n) {
    const RadialTarget target = make_target(BuiltinTarget::exponential(), 5);
    const auto probes = kernel_monte_carlo_probes(target, RadialFactorization::pss(5), 10,
                                                  config.mc_steps, config.base_seed, config.threads);
    double worst = 0.0;
    bool ok = true;
    for (const auto& p : probes) {
      ok = ok && p.pass();
      worst = std::max(worst, std::abs(p.quadrature - p.monte_carlo) / p.tolerance);
    }
    return CheckResult{std::move(n), ok ? CheckStatus::Pass : CheckStatus::Fail,
                       describe_sci("max |diff|/tol", worst)};
  }));

  // adjointness of U_T and U_X
  const std::vector<std::tuple<BuiltinTarget, SamplerSpec, int>> adj = {
      {BuiltinTarget::exponential(), SamplerSpec::pss(), 3},
      {BuiltinTarget::volcano(2.0), SamplerSpec::uss(), 2}};
  for (const auto& [spec, sampler, d] : adj) {
    const std::string name =
        "adjointness/" + describe(spec) + '/' + sampler.name() + "/d=" + std::to_string(d);
    checks.push_back(guarded(name, [&](std::string n) {
      const auto rep = adjointness_check(make_target(spec, d), sampler.at(d));
      return CheckResult{std::move(n), rep.max_residual <= 1e-6 ? CheckStatus::Pass : CheckStatus::Fail,
                         describe_sci("max_residual", rep.max_residual)};
    }));
  }

  // PSS on the radially weighted exponential equals one-dimensional USS
  GapOptions dual_opts = config.grid;
  dual_opts.check_refinement = false;
  for (int d : config.duality_dims) {
    checks.push_back(guarded("duality/d=" + std::to_string(d), [&](std::string n) {
      const DualityReport rep = radial_weighted_duality(d, dual_opts);
      const bool ok = rep.max_rel_ell_diff <= 1e-10 && rep.gap_diff <= 1e-9 &&
                      rep.gap_a >= 0.48 && rep.gap_b >= 0.48;
      std::ostringstream os;
      os << std::setprecision(4) << "ell_rel=" << rep.max_rel_ell_diff << " gap_diff=" << rep.gap_diff
         << " gaps=" << rep.gap_a << ',' << rep.gap_b;
      return CheckResult{std::move(n), ok ? CheckStatus::Pass : CheckStatus::Fail, os.str()};
    }));
  }

  if (config.corrupt_ell) {
    checks.push_back(guarded("corrupt_ell", [&](std::string n) {
      const RadialTarget t = make_target(BuiltinTarget::exponential(), 3);
      const LevelSetFunction bad =
          corrupt_level_set(make_level_set_function(t, RadialFactorization::pss(3)));
      GapOptions opts = config.grid;
      opts.check_refinement = false;
      const GapEstimate est = certify_gap(bad, opts);
      return CheckResult{std::move(n), CheckStatus::Pass, describe_sci("gap", est.gap)};
    }));
  }
  return report;
}

}  // namespace pss
