#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"
#include "simlab/runner.hpp"
#include "simlab/scenario.hpp"

namespace {

using json = nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw simlab::ConfigError("cannot read '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw simlab::ConfigError(path + ": " + e.what());
  }
}

void print_summary(const std::vector<simlab::InequalityReport>& reports) {
  std::size_t pass = 0, noise = 0, fail = 0, expected = 0, degraded = 0;
  for (const auto& r : reports) {
    if (r.degraded) ++degraded;
    if (r.verdict == simlab::Verdict::pass) ++pass;
    else if (r.verdict == simlab::Verdict::pass_within_noise) ++noise;
    else if (r.expected_failure) ++expected;
    else ++fail;
  }
  for (const auto& r : reports)
    if (r.verdict == simlab::Verdict::fail)
      std::cout << (r.expected_failure ? "expected failure: " : "FAIL: ") << r.name << " (" << r.scenario
                << ")\n";
  std::cout << reports.size() << " reports: " << pass << " pass, " << noise << " pass within noise, " << fail
            << " fail, " << expected << " expected failures, " << degraded << " degraded\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simlab: numerical checks of functional inequalities for stochastic reaction-diffusion equations"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker count (overrides SIMLAB_THREADS)");

  auto* run = app.add_subcommand("run", "Run a scenario file or a shipped preset");
  std::string config_path, preset_name, out_dir, profile;
  std::vector<std::string> overrides;
  run->add_option("config", config_path, "Scenario YAML file");
  run->add_option("--preset", preset_name, "Shipped preset name instead of a file");
  run->add_option("--set", overrides, "Override a key, e.g. --set sim.seed=3")->take_all();
  run->add_option("-o,--out", out_dir, "Output directory (default: the scenario's output_dir)");
  run->add_option("--profile", profile, "smoke or full");

  auto* ll = app.add_subcommand("ll-test", "Lasry-Lions property suite over the function corpus");
  std::vector<double> eps_grid{0.01, 0.1, 1.0};
  std::vector<std::size_t> dims{1, 2};
  std::string mode = "descent", ll_out;
  double beta = 0.0;
  std::size_t points = 8;
  std::uint64_t ll_seed = 9;
  ll->add_option("--eps-grid", eps_grid, "Regularization parameters")->delimiter(',');
  ll->add_option("--dims", dims, "State dimensions")->delimiter(',');
  ll->add_option("--mode", mode, "Envelope optimizer: grid or descent");
  ll->add_option("--beta", beta, "r_k = (k pi)^-beta");
  ll->add_option("--points", points, "Evaluation points per eps");
  ll->add_option("--seed", ll_seed, "Seed");
  ll->add_option("-o,--out", ll_out, "Write report.json and summary.csv here");

  auto* cmp = app.add_subcommand("compare", "Margin deltas and verdict flips between two report.json files");
  std::string cmp_a, cmp_b;
  cmp->add_option("a", cmp_a)->required();
  cmp->add_option("b", cmp_b)->required();

  auto* presets = app.add_subcommand("presets", "List shipped presets or write them as YAML");
  std::string preset_dir;
  presets->add_option("--write", preset_dir, "Directory to write <name>.yaml files into");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) simlab::set_worker_count(threads);

  try {
    if (*run) {
      if (config_path.empty() == preset_name.empty()) throw simlab::ConfigError("give either a config file or --preset");
      simlab::Scenario sc = preset_name.empty() ? simlab::load_scenario(config_path) : simlab::preset(preset_name);
      for (const auto& o : overrides) simlab::apply_override(sc, o);
      if (!profile.empty()) simlab::apply_override(sc, "profile=" + profile);
      auto result = simlab::run_scenario(sc);
      std::string dir = out_dir.empty() ? sc.output_dir : out_dir;
      simlab::write_artifacts(result, dir);
      print_summary(result.reports);
      std::cout << "artifacts in " << dir << '\n';
      return result.exit_code;
    }
    if (*ll) {
      simlab::LlTestConfig cfg;
      cfg.dims = dims;
      cfg.beta = beta;
      cfg.suite.eps_grid = eps_grid;
      cfg.suite.points = points;
      cfg.suite.seed = ll_seed;
      cfg.suite.settings.mode = simlab::envelope_mode_from_string(mode);
      if (cfg.suite.settings.mode == simlab::EnvelopeMode::grid) cfg.suite.oracle_points = 0;
      auto reports = simlab::run_ll_test(cfg);
      if (!ll_out.empty()) {
        simlab::RunResult r;
        r.reports = reports;
        simlab::write_artifacts(r, ll_out);
      }
      print_summary(reports);
      return simlab::suite_exit_code(reports);
    }
    if (*cmp) {
      auto res = simlab::compare_reports(read_json(cmp_a), read_json(cmp_b));
      std::cout << res.diff.dump(2) << '\n';
      return res.verdict_flips > 0 ? 1 : 0;
    }
    if (*presets) {
      for (const auto& name : simlab::preset_names()) {
        if (preset_dir.empty()) {
          std::cout << name << '\n';
          continue;
        }
        std::filesystem::create_directories(preset_dir);
        std::ofstream os(std::filesystem::path(preset_dir) / (name + ".yaml"));
        os << simlab::preset_yaml(name);
        std::cout << "wrote " << name << ".yaml\n";
      }
      return 0;
    }
  } catch (const simlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
