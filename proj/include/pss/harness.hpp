#pragma once

// Experiment drivers behind the pss_lab CLI.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pss/diagnostics.hpp"
#include "pss/levelset.hpp"
#include "pss/operator.hpp"
#include "pss/samplers.hpp"
#include "pss/targets.hpp"

namespace pss {

/// Factorization choice independent of the dimension.
struct SamplerSpec {
  enum class Kind { Uss, Pss, Custom } kind = Kind::Pss;
  double alpha = 0.0;  // Custom only

  static SamplerSpec uss() { return {Kind::Uss, 0.0}; }
  static SamplerSpec pss() { return {Kind::Pss, 0.0}; }

  RadialFactorization at(int dim) const;
  std::string name() const;
};

struct ExperimentConfig {
  std::vector<BuiltinTarget> targets;
  std::vector<SamplerSpec> samplers;
  std::vector<int> dims;
  std::int64_t n_it = 10'000;
  int n_rep = 5;
  std::uint64_t base_seed = 20240229;
  GapOptions grid;
  std::vector<int> ks;  // Lambda_k orders for check-lambda
  int ks_samples = 10'000;
  double ks_threshold = 0.02;
  std::vector<int> ks_dims{2, 5, 10};
  std::int64_t mc_steps = 1'000'000;
  std::vector<int> duality_dims{2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool corrupt_ell = false;
  int threads = 0;  // 0: hardware concurrency
  bool paper_scale = false;
  std::optional<std::filesystem::path> output;

  nlohmann::json to_json() const;
};

enum class Command { IatSweep, GapTable, CheckLambda, Verify };

/// Parses and validates a config tree, filling per-command defaults.
/// Throws ConfigError on invalid input.
ExperimentConfig parse_config(const nlohmann::json& doc, Command command, bool paper_scale = false);
ExperimentConfig load_config(const std::filesystem::path& path, Command command,
                             bool paper_scale = false);

/// seed = base_seed xor hash(d, sampler, rep)
std::uint64_t derive_seed(std::uint64_t base_seed, int d, const std::string& sampler, int rep);

/// Runs fn(i) for i in [0, n) on a pool of worker threads.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// -- iat-sweep -------------------------------------------------------------

struct IatRow {
  int d = 0;
  std::string sampler;
  int rep = 0;
  std::uint64_t seed = 0;
  IatEstimate iat;
  double wall_time_ms = 0.0;
};

struct IatSummary {
  int d = 0;
  std::string sampler;
  double mean = 0.0;
  double sd = 0.0;
  double wall_time_ms = 0.0;
};

struct IatSweepResult {
  std::vector<IatRow> rows;         // by ascending d, then config sampler order, then rep
  std::vector<IatSummary> summary;  // one per (d, sampler)
};

IatSweepResult run_iat_sweep(const ExperimentConfig& config);

inline constexpr const char* kIatCsvHeader = "d,sampler,rep,seed,iat,truncation_lag,wall_time_ms,mean,sd";
std::string iat_sweep_csv(const IatSweepResult& result, bool include_wall_time = true);

// -- gap-table -------------------------------------------------------------

struct GapRow {
  std::string target;
  double alpha = 0.0;
  int d = 0;
  GapEstimate estimate;
};

std::vector<GapRow> run_gap_table(const ExperimentConfig& config);
nlohmann::json gap_table_json(const std::vector<GapRow>& rows);

// -- check-lambda ----------------------------------------------------------

struct LambdaRow {
  std::string target;
  double alpha = 0.0;
  int d = 0;
  MembershipReport report;
};

std::vector<LambdaRow> run_check_lambda(const ExperimentConfig& config);
nlohmann::json to_json(const MembershipReport& report);
nlohmann::json lambda_table_json(const std::vector<LambdaRow>& rows);

// -- verify ----------------------------------------------------------------

enum class CheckStatus { Pass, Fail, Skipped };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

VerifyReport run_verify(const ExperimentConfig& config);

// Building blocks shared by verify and the acceptance suite.

/// One-step KS statistic of the X-chain started from i.i.d. stationary
/// radii, measured against the radial oracle CDF.
double ks_one_step_x(const RadialTarget& target, const RadialFactorization& fac, int samples,
                     std::uint64_t seed);

/// One-step KS statistic of the T-chain started from pi~, measured against
/// the grid oracle CDF of pi~.
double ks_one_step_t(const RadialTarget& target, const RadialFactorization& fac, int samples,
                     std::uint64_t seed);

struct KernelProbe {
  double log_t = 0.0;
  double quadrature = 0.0;
  double monte_carlo = 0.0;
  double tolerance = 0.0;
  bool pass() const;
};

/// P_T(t, (0, t)) by quadrature versus the frequency of {T_1 < t} over
/// `steps` independent T-steps from t, at `probes` levels spread over the
/// bulk of pi~.
std::vector<KernelProbe> kernel_monte_carlo_probes(const RadialTarget& target,
                                                   const RadialFactorization& fac, int probes,
                                                   std::int64_t steps, std::uint64_t seed,
                                                   int threads = 0);

/// PSS on the radially weighted exponential in dimension d against USS on
/// the one-dimensional density exp(-c|s|), c = 2 / sigma_{d-1}.
DualityReport radial_weighted_duality(int d, const GapOptions& opts = {}, int probes = 50);

/// ell(t) + bump: a level-set function that increases on a short stretch.
LevelSetFunction corrupt_level_set(const LevelSetFunction& ell);

nlohmann::json to_json(const GapEstimate& est);

}  // namespace pss
