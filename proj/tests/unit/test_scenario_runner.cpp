#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"
#include "simlab/runner.hpp"
#include "simlab/scenario.hpp"

using namespace simlab;

namespace {

const char* kSmall = R"(name: small
model:
  eigenvalues: [-1]
  r: [1]
sim:
  seed: 5
sampler:
  invariant: gaussian
  samples: 20000
checks:
  - poincare
  - name: log_sobolev
    p: [2]
  - name: hypercontractivity_exact
    t: 1.0986122886681098
    q: 2
  - name: fernique
    lambdas: [0.05]
)";

}  // namespace

TEST_CASE("parse, dotted keys and overrides") {
  auto a = parse_scenario("model:\n  n: 4\n  beta: 0.5\nsim:\n  dt: 0.01\n");
  auto b = parse_scenario("model.n: 4\nmodel.beta: 0.5\nsim.dt: 0.01\n");
  CHECK(a.n == 4);
  CHECK(b.n == 4);
  CHECK(a.beta == b.beta);
  CHECK(a.dt == b.dt);
  apply_override(a, "model.n=6");
  apply_override(a, "drift.b=[0, 0, 0, 1]");
  CHECK(a.n == 6);
  CHECK(a.b.size() == 4);
  CHECK_THROWS_AS(apply_override(a, "model.n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("model: [1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("checks:\n  - no_such_check\n"), ConfigError);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(parse_scenario("model.n: 4\ndrift.kind: nemytskii\ndrift.b: [0, 12]\ndrift.zeta_F: 12\n"),
                  ConfigError);
  auto ok = parse_scenario("model.n: 4\n");
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS(parse_scenario("sim.dt: -1\n"), ConfigError);
  ok.zeta_F = 20.0;
  CHECK_THROWS_AS(ok.validate(), ConfigError);
}

TEST_CASE("presets parse and validate") {
  for (const auto& name : preset_names()) {
    auto s = preset(name);
    CHECK(s.name == name);
    CHECK_NOTHROW(s.validate());
    CHECK_FALSE(s.checks.empty());
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("empty check list") {
  auto s = parse_scenario("model.n: 2\n");
  auto res = run_scenario(s);
  CHECK(res.reports.empty());
  CHECK(res.exit_code == 0);
  CHECK(reports_to_json(res.reports).is_array());
  CHECK(reports_to_json(res.reports).empty());
}

TEST_CASE("bad check parameters raise ConfigError") {
  auto s = parse_scenario("model.n: 2\nchecks:\n  - name: log_sobolev\n    p: banana\n");
  CHECK_THROWS_AS(run_scenario(s), ConfigError);
}

TEST_CASE("small scenario, artifacts and compare") {
  auto s = parse_scenario(kSmall);
  auto res = run_scenario(s);
  REQUIRE_FALSE(res.reports.empty());
  CHECK(res.exit_code == 0);
  for (const auto& r : res.reports) {
    CHECK_FALSE(std::string(to_string(r.paper_eq)).empty());
    CHECK(r.scenario == "small");
  }
  auto j = reports_to_json(res.reports);
  auto cmp = compare_reports(j, j);
  CHECK(cmp.diff.empty());
  CHECK(cmp.verdict_flips == 0);

  auto shifted = j;
  shifted[0]["margin"] = shifted[0]["margin"].get<double>() + 1.0;
  CHECK(compare_reports(j, shifted).diff.size() == 1);
  auto missing = j;
  missing.erase(missing.begin());
  CHECK_THROWS_AS(compare_reports(j, missing), ConfigError);

  auto dir = std::filesystem::temp_directory_path() / "simlab_unit_artifacts";
  std::filesystem::remove_all(dir);
  write_artifacts(res, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "timings.json"));
  std::ifstream in(dir / "report.json");
  auto back = nlohmann::json::parse(in);
  CHECK(compare_reports(j, back).diff.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary does not depend on the worker count") {
  auto s = parse_scenario(kSmall);
  std::string out[2];
  std::size_t workers[2] = {1, 4};
  for (int i = 0; i < 2; ++i) {
    set_worker_count(workers[i]);
    std::ostringstream os;
    write_summary_csv(os, run_scenario(s).reports);
    out[i] = os.str();
  }
  set_worker_count(0);
  CHECK(out[0] == out[1]);
}
