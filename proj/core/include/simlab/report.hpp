#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace simlab {

enum class Verdict { pass, pass_within_noise, fail };

const char* to_string(Verdict v);

/// Fixed enumeration of the inequalities and identities a report can instantiate.
enum class PaperEq {
  ou_exactness,
  log_sobolev,
  poincare,
  hypercontractivity,
  harnack,
  concentration,
  concentration_h,
  fernique,
  fernique_h,
  supercontractivity,
  semigroup_log_sobolev,
  eps_log_sobolev,
  gradient_estimate,
  ultrabounded,
  ultrabounded_contraction,
  generator_identity,
  energy_identity,
  variational_e,
  variational_r,
  moment_bound,
  invariant_cross_validation,
  lasry_lions_boundedness,
  lasry_lions_approximation,
  lasry_lions_gradient,
  lasry_lions_oracle,
  timing,
  determinism
};

const char* to_string(PaperEq e);
PaperEq parse_paper_eq(const std::string& s);

/// le: lhs <= rhs is asserted. eq: lhs = rhs is asserted.
enum class Relation { le, eq };

struct InequalityReport {
  std::string name;
  PaperEq paper_eq = PaperEq::log_sobolev;
  Relation relation = Relation::le;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  /// Standard error of rhs - lhs; defaults to the independent combination.
  double joint_se = 0.0;
  double margin = 0.0;
  double k_sigma = 3.0;
  double abs_tol = 0.0;
  Verdict verdict = Verdict::pass;
  bool expected_failure = false;
  /// Below resolution (e.g. tail range too short); the verdict is advisory.
  bool degraded = false;
  std::string note;
  std::string scenario;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json data = nlohmann::json::object();

  /// The report counts against the suite: fail without expected_failure, or an expected failure that passed.
  bool unexpected() const;
};

/// Verdict rule: fail iff margin < -(k_sigma joint_se + abs_tol + roundoff floor).
Verdict decide(Relation relation, double lhs, double rhs, double joint_se, double k_sigma, double abs_tol);

struct ReportOptions {
  double k_sigma = 3.0;
  double abs_tol = 0.0;
};

/// Builds a report and fills margin and verdict. A negative joint_se selects sqrt(lhs_se^2 + rhs_se^2).
InequalityReport make_report(std::string name, PaperEq eq, double lhs, double lhs_se, double rhs, double rhs_se,
                             const ReportOptions& opts = {}, double joint_se = -1.0, Relation relation = Relation::le);

/// Recomputes margin and verdict from the stored fields.
void finalize(InequalityReport& report);

/// Report with a directly supplied pass/fail outcome (qualitative checks).
InequalityReport make_qualitative(std::string name, PaperEq eq, bool ok, double lhs, double rhs, std::string note);

void to_json(nlohmann::json& j, const InequalityReport& r);
void from_json(const nlohmann::json& j, InequalityReport& r);

/// Shortest decimal that round-trips, locale independent.
std::string format_number(double v);

std::string summary_csv_header();
std::string summary_csv_row(const InequalityReport& r);
void write_summary_csv(std::ostream& os, const std::vector<InequalityReport>& reports);

/// Exit code for a suite: 0 all as expected, 1 any unexpected outcome, 3 any degraded report otherwise.
int suite_exit_code(const std::vector<InequalityReport>& reports);

}  // namespace simlab
