// pss_lab: command-line front end for the experiment harness.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pss/errors.hpp"
#include "pss/harness.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool paper_scale = false;
  std::optional<int> grid_size;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "base seed (overrides the config)");
  cmd->add_option("--out", args.out, "output path (stdout when omitted)");
  cmd->add_flag("--paper-scale", args.paper_scale, "full-size defaults: d up to 100, n_it=1e5, n_rep=10");
  cmd->add_option("--grid-size", args.grid_size, "cells of the level grid (overrides the config)")
      ->check(CLI::Range(2, 1 << 16));
}

pss::ExperimentConfig resolve(const CommonArgs& args, pss::Command command) {
  pss::ExperimentConfig c =
      args.config.empty() ? pss::parse_config(nlohmann::json::object(), command, args.paper_scale)
                          : pss::load_config(args.config, command, args.paper_scale);
  if (args.seed) c.base_seed = *args.seed;
  if (args.grid_size) c.grid.grid_size = *args.grid_size;
  if (!args.out.empty()) c.output = args.out;
  return c;
}

void emit(const pss::ExperimentConfig& c, const std::string& payload, const nlohmann::json& meta) {
  if (!c.output) {
    std::cout << payload;
    return;
  }
  const std::filesystem::path path = *c.output;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << payload;
  if (!out) throw std::runtime_error("write failed: " + path.string());
  std::ofstream side(path.string() + ".meta.json", std::ios::binary);
  if (!side) throw std::runtime_error("cannot write " + path.string() + ".meta.json");
  side << meta.dump(2) << '\n';
}

nlohmann::json metadata(const pss::ExperimentConfig& c, const char* command) {
  return {{"command", command}, {"config", c.to_json()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polar and uniform slice sampling lab"};
  app.require_subcommand(1);

  CommonArgs sweep_args, gap_args, lambda_args, verify_args;
  auto* sweep = app.add_subcommand("iat-sweep", "IAT of |X| across dimensions (CSV)");
  auto* gap = app.add_subcommand("gap-table", "certified spectral gaps of the level chain (JSON)");
  auto* lambda = app.add_subcommand("check-lambda", "Lambda_k membership reports (JSON)");
  auto* verify = app.add_subcommand("verify", "stationarity, kernel and duality checks");
  add_common(sweep, sweep_args);
  add_common(gap, gap_args);
  add_common(lambda, lambda_args);
  add_common(verify, verify_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      const auto c = resolve(sweep_args, pss::Command::IatSweep);
      const auto result = pss::run_iat_sweep(c);
      auto meta = metadata(c, "iat-sweep");
      meta["iat_rule"] = pss::IatEstimate{}.rule;
      meta["iat_lag_cap"] = "min(n/2, 10000)";
      meta["observable"] = "|x|";
      meta["initial_state"] = "mode of r^(d-1) exp(-phi(r)), or 1 when that mode is 0";
      meta["burn_in"] = 0;
      emit(c, pss::iat_sweep_csv(result), meta);
    } else if (gap->parsed()) {
      const auto c = resolve(gap_args, pss::Command::GapTable);
      const auto rows = pss::run_gap_table(c);
      emit(c, pss::gap_table_json(rows).dump(2) + "\n", metadata(c, "gap-table"));
      for (const auto& r : rows) {
        if (!r.estimate.converged) {
          std::cerr << "warning: refinement not converged for " << r.target << " d=" << r.d
                    << " delta=" << r.estimate.refinement_delta << '\n';
        }
      }
    } else if (lambda->parsed()) {
      const auto c = resolve(lambda_args, pss::Command::CheckLambda);
      const auto rows = pss::run_check_lambda(c);
      emit(c, pss::lambda_table_json(rows).dump(2) + "\n", metadata(c, "check-lambda"));
    } else if (verify->parsed()) {
      const auto c = resolve(verify_args, pss::Command::Verify);
      const auto report = pss::run_verify(c);
      for (const auto& chk : report.checks) {
        const char* tag = chk.status == pss::CheckStatus::Pass   ? "PASS"
                          : chk.status == pss::CheckStatus::Fail ? "FAIL"
                                                                 : "SKIP";
        std::cerr << tag << "  " << chk.name << "  " << chk.detail << '\n';
      }
      emit(c, report.to_json().dump(2) + "\n", metadata(c, "verify"));
      return report.ok() ? 0 : 1;
    }
  } catch (const pss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
