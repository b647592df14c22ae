#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pss/errors.hpp"
#include "pss/harness.hpp"

using namespace pss;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "pss_harness_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const json& doc) {
  const auto p = scratch_dir() / name;
  std::ofstream(p) << doc.dump();
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PSS_LAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config({{"k", {0}}}, Command::CheckLambda), ConfigError);
  CHECK_THROWS_AS(parse_config({{"dims", json::array()}}, Command::IatSweep), ConfigError);
  CHECK_THROWS_AS(parse_config({{"n_it", 9}}, Command::IatSweep), ConfigError);
  CHECK_THROWS_AS(parse_config({{"target", "banana"}}, Command::GapTable), ConfigError);
  CHECK_THROWS_AS(parse_config({{"target", {{"tag", "banana"}}}}, Command::GapTable), ConfigError);
  CHECK_THROWS_AS(parse_config({{"colour", 1}}, Command::GapTable), ConfigError);
  CHECK_THROWS_AS(parse_config({{"samplers", {{{"alpha", 3.0}}}}, {"dims", {2}}}, Command::GapTable),
                  ConfigError);
  CHECK_THROWS_AS(parse_config({{"n_it", "many"}}, Command::IatSweep), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array(), Command::IatSweep), ConfigError);
  CHECK_THROWS_AS(load_config(scratch_dir() / "missing.json", Command::Verify), ConfigError);

  const auto c = parse_config({{"target", {{"tag", "volcano"}}}, {"samplers", {"pss", {{"alpha", 1.5}}}},
                               {"dims", {3, 4}}, {"grid", {{"size", 256}}}},
                              Command::GapTable);
  REQUIRE(c.targets.size() == 1);
  CHECK(c.targets[0].tag == TargetTag::Volcano);
  CHECK(c.targets[0].param == 2.0);
  REQUIRE(c.samplers.size() == 2);
  CHECK(c.samplers[1].at(4).alpha() == 1.5);
  CHECK(c.grid.grid_size == 256);
  CHECK(c.to_json()["dims"] == json({3, 4}));
}

TEST_CASE("per-command defaults") {
  const auto desk = parse_config(json::object(), Command::IatSweep);
  CHECK(desk.n_it == 10'000);
  CHECK(desk.n_rep == 5);
  CHECK(desk.dims.back() == 30);
  const auto full = parse_config(json::object(), Command::IatSweep, true);
  CHECK(full.n_it == 100'000);
  CHECK(full.n_rep == 10);
  CHECK(full.dims.back() == 100);
  CHECK(full.samplers.size() == 2);
}

TEST_CASE("seed derivation") {
  const auto s = derive_seed(1, 5, "PSS", 0);
  CHECK(s == derive_seed(1, 5, "PSS", 0));
  CHECK(s != derive_seed(1, 5, "USS", 0));
  CHECK(s != derive_seed(1, 6, "PSS", 0));
  CHECK(s != derive_seed(1, 5, "PSS", 1));
  CHECK(s != derive_seed(2, 5, "PSS", 0));
}

TEST_CASE("iat-sweep smoke run") {
  auto c = parse_config({{"dims", {1}}, {"n_it", 1000}, {"n_rep", 1}, {"sampler", "pss"}}, Command::IatSweep);
  const auto res = run_iat_sweep(c);
  const auto ls = lines(iat_sweep_csv(res));
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == kIatCsvHeader);
  CHECK(ls[1].rfind("1,PSS,0,", 0) == 0);
  CHECK(ls[2].rfind("1,PSS,-1,", 0) == 0);
  CHECK(res.rows[0].seed == derive_seed(c.base_seed, 1, "PSS", 0));
}

TEST_CASE("iat-sweep is deterministic and ordered") {
  auto c = parse_config({{"dims", {3, 1, 2}}, {"n_it", 2000}, {"n_rep", 3}}, Command::IatSweep);
  c.threads = 3;
  const auto a = run_iat_sweep(c);
  c.threads = 1;
  const auto b = run_iat_sweep(c);
  CHECK(iat_sweep_csv(a, false) == iat_sweep_csv(b, false));
  REQUIRE(a.rows.size() == 3 * 2 * 3);
  CHECK(a.summary.size() == 3 * 2);
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    const auto& p = a.rows[i - 1];
    const auto& q = a.rows[i];
    const int ps = p.sampler == "USS" ? 0 : 1, qs = q.sampler == "USS" ? 0 : 1;
    CHECK(std::tie(p.d, ps, p.rep) < std::tie(q.d, qs, q.rep));
  }
  c.base_seed += 1;
  CHECK(iat_sweep_csv(run_iat_sweep(c), false) != iat_sweep_csv(b, false));
}

TEST_CASE("USS IAT grows with the dimension") {
  auto c = parse_config({{"dims", {3, 30}}, {"sampler", "uss"}}, Command::IatSweep);
  const auto res = run_iat_sweep(c);
  REQUIRE(res.summary.size() == 2);
  CHECK(res.summary[1].mean > res.summary[0].mean);
}

TEST_CASE("gap-table JSON") {
  const auto c = parse_config({{"target", "exponential"}, {"dims", {2, 5}}, {"grid", {{"size", 256}}}},
                              Command::GapTable);
  const auto rows = run_gap_table(c);
  const auto j = gap_table_json(rows);
  REQUIRE(j.size() == 2);
  for (const auto& r : j) {
    for (const char* key : {"target", "alpha", "d", "gap", "lambda2", "grid_size", "refinement_delta",
                            "truncation_mass"}) {
      CHECK(r.contains(key));
    }
    CHECK(r["gap"].get<double>() >= 0.48);
    CHECK(r["grid_size"] == 256);
  }
  CHECK(j[1]["d"] == 5);
  CHECK(j[1]["alpha"] == 4.0);
  CHECK(gap_table_json(run_gap_table(c)).dump() == j.dump());
}

TEST_CASE("check-lambda reports") {
  const auto pss = lambda_table_json(run_check_lambda(parse_config(json::object(), Command::CheckLambda)));
  CHECK(pss.size() == 12);
  for (const auto& r : pss) {
    CHECK(r["k"] == 1);
    CHECK(r["passed"] == true);
    CHECK(r["violations"].empty());
  }
  const auto uss = run_check_lambda(
      parse_config({{"target", "exponential"}, {"sampler", "uss"}, {"dims", {3}}, {"k", {1, 3}}}, Command::CheckLambda));
  REQUIRE(uss.size() == 2);
  CHECK_FALSE(uss[0].report.passed);
  CHECK(uss[1].report.passed);
  const auto j = to_json(uss[0].report);
  CHECK(j["k"] == 1);
  CHECK_FALSE(j["violations"].empty());
  CHECK(j["violations"][0].contains("log_t"));
}

TEST_CASE("verify with an underpowered KS sample") {
  auto c = parse_config({{"ks_samples", 100}, {"mc_steps", 20000}, {"duality_dims", {2}}, {"ks_dims", {2}},
                         {"grid", {{"size", 256}}}},
                        Command::Verify);
  const auto rep = run_verify(c);
  int skipped = 0;
  for (const auto& chk : rep.checks) {
    if (chk.name.rfind("ks_", 0) == 0) {
      CHECK(chk.status == CheckStatus::Skipped);
      ++skipped;
    } else {
      CHECK_MESSAGE(chk.status == CheckStatus::Pass, chk.name << ": " << chk.detail);
    }
  }
  CHECK(skipped > 0);
  CHECK(rep.ok());
  CHECK(rep.to_json()["checks"][0]["status"] == "skipped");
}

TEST_CASE("verify surfaces a corrupted level-set function") {
  auto c = parse_config({{"corrupt_ell", true}, {"ks_samples", 100}, {"mc_steps", 20000},
                         {"duality_dims", {2}}, {"grid", {{"size", 256}}}},
                        Command::Verify);
  const auto rep = run_verify(c);
  CHECK_FALSE(rep.ok());
  bool found = false;
  for (const auto& chk : rep.checks) {
    if (chk.status == CheckStatus::Fail && chk.detail.find("increases") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("pss_lab exit codes and outputs") {
  const auto dir = scratch_dir();
  const auto csv = dir / "sweep.csv";
  const auto cfg = write_config("smoke.json", {{"dims", {1}}, {"n_it", 1000}, {"n_rep", 1}});
  CHECK(run_cli("iat-sweep --config " + cfg.string() + " --seed 7 --out " + csv.string()) == 0);
  CHECK(lines(slurp(csv))[0] == kIatCsvHeader);
  const auto meta = json::parse(slurp(csv.string() + ".meta.json"));
  CHECK(meta["command"] == "iat-sweep");
  CHECK(meta["config"]["base_seed"] == 7);
  CHECK(meta["iat_rule"] == "initial_positive_pair");

  const auto again = dir / "sweep2.csv";
  CHECK(run_cli("iat-sweep --config " + cfg.string() + " --seed 7 --out " + again.string()) == 0);
  // identical payloads apart from the wall_time_ms column
  const auto drop_wall = [](const std::string& text) {
    std::string out;
    for (const auto& l : lines(text)) {
      std::vector<std::string> f;
      std::stringstream ss(l);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      if (f.size() > 6) f.erase(f.begin() + 6);
      for (const auto& x : f) out += x + ",";
      out += "\n";
    }
    return out;
  };
  CHECK(drop_wall(slurp(csv)) == drop_wall(slurp(again)));

  const auto bad = write_config("bad.json", {{"k", {0}}});
  CHECK(run_cli("check-lambda --config " + bad.string()) == 2);
  CHECK(run_cli("gap-table --grid-size 1") != 0);
  CHECK(run_cli("frobnicate") != 0);

  const auto corrupt = write_config("corrupt.json", {{"corrupt_ell", true}, {"ks_samples", 100},
                                                     {"mc_steps", 20000}, {"duality_dims", {2}}});
  CHECK(run_cli("verify --config " + corrupt.string() + " --grid-size 256 --out " + (dir / "v.json").string()) == 1);
  CHECK(json::parse(slurp(dir / "v.json"))["ok"] == false);
}

TEST_CASE("pss_lab verify passes on the default config") {
  const auto out = scratch_dir() / "verify.json";
  CHECK(run_cli("verify --out " + out.string()) == 0);
  const auto j = json::parse(slurp(out));
  CHECK(j["ok"] == true);
  for (const auto& chk : j["checks"]) CHECK_MESSAGE(chk["status"] == "pass", chk["name"]);
}
