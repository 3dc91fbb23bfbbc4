#include "simlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "simlab/errors.hpp"

namespace simlab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::pass_within_noise: return "pass_within_noise";
    case Verdict::fail: return "fail";
  }
  return "fail";
}

namespace {

struct EqName {
  PaperEq eq;
  const char* name;
};

constexpr EqName kEqNames[] = {
    {PaperEq::ou_exactness, "ou_exactness"},
    {PaperEq::log_sobolev, "log_sobolev"},
    {PaperEq::poincare, "poincare"},
    {PaperEq::hypercontractivity, "hypercontractivity"},
    {PaperEq::harnack, "harnack"},
    {PaperEq::concentration, "concentration"},
    {PaperEq::concentration_h, "concentration_h"},
    {PaperEq::fernique, "fernique"},
    {PaperEq::fernique_h, "fernique_h"},
    {PaperEq::supercontractivity, "supercontractivity"},
    {PaperEq::semigroup_log_sobolev, "semigroup_log_sobolev"},
    {PaperEq::eps_log_sobolev, "eps_log_sobolev"},
    {PaperEq::gradient_estimate, "gradient_estimate"},
    {PaperEq::ultrabounded, "ultrabounded"},
    {PaperEq::ultrabounded_contraction, "ultrabounded_contraction"},
    {PaperEq::generator_identity, "generator_identity"},
    {PaperEq::energy_identity, "energy_identity"},
    {PaperEq::variational_e, "variational_e"},
    {PaperEq::variational_r, "variational_r"},
    {PaperEq::moment_bound, "moment_bound"},
    {PaperEq::invariant_cross_validation, "invariant_cross_validation"},
    {PaperEq::lasry_lions_boundedness, "lasry_lions_boundedness"},
    {PaperEq::lasry_lions_approximation, "lasry_lions_approximation"},
    {PaperEq::lasry_lions_gradient, "lasry_lions_gradient"},
    {PaperEq::lasry_lions_oracle, "lasry_lions_oracle"},
    {PaperEq::timing, "timing"},
    {PaperEq::determinism, "determinism"},
};

}  // namespace

const char* to_string(PaperEq e) {
  for (const auto& n : kEqNames)
    if (n.eq == e) return n.name;
  return "unknown";
}

PaperEq parse_paper_eq(const std::string& s) {
  for (const auto& n : kEqNames)
    if (s == n.name) return n.eq;
  throw ConfigError("unknown paper_eq '" + s + "'");
}

bool InequalityReport::unexpected() const {
  bool failed = verdict == Verdict::fail;
  return expected_failure ? !failed : failed;
}

Verdict decide(Relation relation, double lhs, double rhs, double joint_se, double k_sigma, double abs_tol) {
  if (!std::isfinite(lhs) || std::isnan(rhs)) return Verdict::fail;
  double scale = std::isfinite(rhs) ? std::max(std::abs(lhs), std::abs(rhs)) : std::abs(lhs);
  double floor = abs_tol + 1e-12 * scale;
  double noise = k_sigma * joint_se;
  if (relation == Relation::le) {
    double margin = rhs - lhs;
    if (margin >= -floor) return Verdict::pass;
    if (margin >= -(noise + floor)) return Verdict::pass_within_noise;
    return Verdict::fail;
  }
  double gap = std::abs(rhs - lhs);
  if (gap <= floor) return Verdict::pass;
  if (gap <= noise + floor) return Verdict::pass_within_noise;
  return Verdict::fail;
}

void finalize(InequalityReport& r) {
  r.margin = r.rhs - r.lhs;
  r.verdict = decide(r.relation, r.lhs, r.rhs, r.joint_se, r.k_sigma, r.abs_tol);
}

InequalityReport make_report(std::string name, PaperEq eq, double lhs, double lhs_se, double rhs, double rhs_se,
                             const ReportOptions& opts, double joint_se, Relation relation) {
  InequalityReport r;
  r.name = std::move(name);
  r.paper_eq = eq;
  r.relation = relation;
  r.lhs = lhs;
  r.lhs_se = lhs_se;
  r.rhs = rhs;
  r.rhs_se = rhs_se;
  r.joint_se = joint_se >= 0.0 ? joint_se : std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
  r.k_sigma = opts.k_sigma;
  r.abs_tol = opts.abs_tol;
  finalize(r);
  return r;
}

InequalityReport make_qualitative(std::string name, PaperEq eq, bool ok, double lhs, double rhs, std::string note) {
  InequalityReport r;
  r.name = std::move(name);
  r.paper_eq = eq;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  r.note = std::move(note);
  return r;
}

namespace {

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double json_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j = nlohmann::json{{"check", r.name},
                     {"paper_eq", to_string(r.paper_eq)},
                     {"relation", r.relation == Relation::le ? "le" : "eq"},
                     {"lhs", number_json(r.lhs)},
                     {"lhs_se", number_json(r.lhs_se)},
                     {"rhs", number_json(r.rhs)},
                     {"rhs_se", number_json(r.rhs_se)},
                     {"joint_se", number_json(r.joint_se)},
                     {"margin", number_json(r.margin)},
                     {"k_sigma", r.k_sigma},
                     {"abs_tol", r.abs_tol},
                     {"verdict", to_string(r.verdict)},
                     {"expected_failure", r.expected_failure},
                     {"degraded", r.degraded},
                     {"note", r.note},
                     {"scenario", r.scenario},
                     {"seed", r.seed},
                     {"params", r.params},
                     {"data", r.data}};
}

void from_json(const nlohmann::json& j, InequalityReport& r) {
  r.name = j.at("check").get<std::string>();
  r.paper_eq = parse_paper_eq(j.at("paper_eq").get<std::string>());
  r.relation = j.value("relation", std::string("le")) == "eq" ? Relation::eq : Relation::le;
  r.lhs = json_number(j.at("lhs"));
  r.lhs_se = json_number(j.at("lhs_se"));
  r.rhs = json_number(j.at("rhs"));
  r.rhs_se = json_number(j.at("rhs_se"));
  r.joint_se = j.contains("joint_se") ? json_number(j.at("joint_se")) : 0.0;
  r.margin = json_number(j.at("margin"));
  r.k_sigma = j.value("k_sigma", 3.0);
  r.abs_tol = j.value("abs_tol", 0.0);
  auto v = j.at("verdict").get<std::string>();
  r.verdict = v == "pass" ? Verdict::pass : v == "pass_within_noise" ? Verdict::pass_within_noise : Verdict::fail;
  r.expected_failure = j.value("expected_failure", false);
  r.degraded = j.value("degraded", false);
  r.note = j.value("note", std::string());
  r.scenario = j.value("scenario", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.params = j.value("params", nlohmann::json::object());
  r.data = j.value("data", nlohmann::json::object());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string summary_csv_header() { return "check,paper_eq,scenario,lhs,lhs_se,rhs,rhs_se,margin,verdict,seed"; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string summary_csv_row(const InequalityReport& r) {
  std::string row = csv_field(r.name);
  row += ',';
  row += to_string(r.paper_eq);
  row += ',' + csv_field(r.scenario);
  for (double v : {r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.margin}) row += ',' + format_number(v);
  row += ',';
  row += to_string(r.verdict);
  row += ',' + std::to_string(r.seed);
  return row;
}

void write_summary_csv(std::ostream& os, const std::vector<InequalityReport>& reports) {
  os << summary_csv_header() << '\n';
  for (const auto& r : reports) os << summary_csv_row(r) << '\n';
}

int suite_exit_code(const std::vector<InequalityReport>& reports) {
  bool unexpected = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.unexpected(); });
  if (unexpected) return 1;
  bool degraded = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.degraded; });
  return degraded ? 3 : 0;
}

}  // namespace simlab
