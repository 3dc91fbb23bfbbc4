#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "simlab/lasry_lions.hpp"
#include "simlab/report.hpp"
#include "simlab/scenario.hpp"

namespace simlab {

struct RunResult {
  std::vector<InequalityReport> reports;
  /// Wall-clock seconds per check, in check order. Kept out of report.json and summary.csv.
  std::vector<std::pair<std::string, double>> timings;
  int exit_code = 0;
};

/// Runs every check of the scenario in order. Throws ConfigError on bad check parameters.
RunResult run_scenario(const Scenario& scenario);

/// Writes report.json, summary.csv, timings.json and tail_<i>.csv files (columns t,empirical,wilson_hi,bound).
void write_artifacts(const RunResult& result, const std::string& directory);

nlohmann::json reports_to_json(const std::vector<InequalityReport>& reports);

struct CompareResult {
  /// Entries whose margin or verdict differ.
  nlohmann::json diff = nlohmann::json::array();
  std::size_t verdict_flips = 0;
};

/// Per-check margin deltas between two report documents; throws ConfigError when the check keys differ.
CompareResult compare_reports(const nlohmann::json& a, const nlohmann::json& b);

struct LlTestConfig {
  std::vector<std::size_t> dims{1, 2};
  /// Exponent of r_k = (k pi)^{-beta}; zero gives R = Id.
  double beta = 0.0;
  PropertySuiteConfig suite;
  /// Compares the envelopes of |x| and min(|x|, 1) with their closed forms at n = 1, r = 1.
  bool closed_form = true;
};

/// Property suite over the corpus for every dimension in `dims`.
std::vector<InequalityReport> run_ll_test(const LlTestConfig& config);

}  // namespace simlab
