#include "simlab/supercontractivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "simlab/errors.hpp"
#include "simlab/harness.hpp"
#include "simlab/parallel.hpp"
#include "simlab/stats.hpp"

namespace simlab {

const char* to_string(TailStatus s) {
  switch (s) {
    case TailStatus::finite: return "finite";
    case TailStatus::exploding: return "exploding";
    case TailStatus::ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

ExpIntegralEstimate classify_exp_integral(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                          double lambda, double k_sigma) {
  ExpIntegralEstimate out;
  out.lambda = lambda;
  out.method = "hill";
  std::size_t N = ensemble.size();
  if (N < 20) throw std::invalid_argument("tail classification needs at least 20 samples");
  if (lambda <= 0.0) {
    out.status = TailStatus::finite;
    out.alpha = std::numeric_limits<double>::infinity();
    auto m = exp_moment(ensemble, model, lambda, true);
    out.log_value = m.log_mean;
    out.log_se = m.rel_se;
    return out;
  }
  std::vector<double> logw(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = r_norm(model, ensemble.point(i));
    logw[i] = lambda * s * s;
  }
  std::size_t hi = std::max<std::size_t>(1, N / 10);
  std::size_t k = std::clamp<std::size_t>(N / 100, std::min<std::size_t>(100, hi), hi);
  auto tail = hill_tail_index(logw, k);
  out.alpha = tail.alpha;
  out.alpha_se = tail.se;
  if (tail.alpha - k_sigma * tail.se > 1.0) {
    out.status = TailStatus::finite;
  } else if (tail.alpha + k_sigma * tail.se < 1.0) {
    out.status = TailStatus::exploding;
  } else {
    out.status = TailStatus::ambiguous;
  }
  auto m = exp_moment(ensemble, model, lambda, true);
  out.log_value = out.status == TailStatus::exploding ? std::numeric_limits<double>::infinity() : m.log_mean;
  out.log_se = m.rel_se;
  return out;
}

namespace {

/// log E_pi exp(-lambda ||x||^2) and its standard error for one tilted chain; nullopt on divergence.
std::optional<MeanEstimate> tilted_log_mean(const SpectralModel& model, const DriftSpec& spec, double lambda,
                                            const GibbsConfig& config) {
  GibbsConfig c = config;
  c.tilt = lambda;
  auto res = gibbs_sample(model, spec, c);
  if (res.diverged) return std::nullopt;
  const auto& ens = res.ensemble;
  std::vector<double> logv(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double s = r_norm(model, ens.point(i));
    logv[i] = -lambda * s * s;
  }
  MeanEstimate out;
  out.mean = log_mean_exp(logv);
  std::vector<double> v(logv.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(logv[i] - out.mean);
  out.se = ensemble_mean(ens, v).se;
  out.count = ens.size();
  return out;
}

}  // namespace

ExpIntegralEstimate tilted_exp_integral(const SpectralModel& model, const DriftSpec& spec, double lambda,
                                        const GibbsConfig& config, double halving_tol) {
  ExpIntegralEstimate out;
  out.lambda = lambda;
  out.method = "tilted_chain";
  auto full = tilted_log_mean(model, spec, lambda, config);
  GibbsConfig half = config;
  half.step = 0.5 * config.step;
  half.burn_in_steps = 2 * config.burn_in_steps;
  half.thinning_steps = 2 * config.thinning_steps;
  auto halved = full ? tilted_log_mean(model, spec, lambda, half) : std::nullopt;
  if (!full || !halved) {
    out.status = TailStatus::exploding;
    out.log_value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.log_value = -full->mean;
  out.log_se = full->se;
  out.status = std::abs(full->mean - halved->mean) <= halving_tol ? TailStatus::finite : TailStatus::ambiguous;
  return out;
}

InequalityReport check_supercontractivity_integrals(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                                   const DriftSpec& spec, const std::vector<double>& lambda_grid,
                                                   const SupercontractivityConfig& config) {
  if (lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  double largest_validated = 0.0;
  std::optional<double> first_exploding;
  bool all_finite = true, any_ambiguous = false;
  bool oracle = config.gaussian_oracle && spec.kind == DriftKind::zero;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double lambda = grid[j];
    auto est = classify_exp_integral(ensemble, model, lambda, config.k_sigma);
    if (oracle) {
      double v = gaussian_exp_moment(model, lambda, true);
      est.method = "gaussian_oracle";
      est.log_value = std::log(v);
      est.log_se = 0.0;
      est.status = std::isfinite(v) ? TailStatus::finite : TailStatus::exploding;
    } else if (est.status == TailStatus::ambiguous && config.tilted_fallback) {
      bool identity_r = std::all_of(model.r().begin(), model.r().end(), [](double r) { return r == 1.0; });
      if (identity_r) {
        GibbsConfig gc = config.tilted;
        gc.seed = derive_seed(config.tilted.seed, j);
        auto tilted = tilted_exp_integral(model, spec, lambda, gc, config.halving_tol);
        tilted.alpha = est.alpha;
        tilted.alpha_se = est.alpha_se;
        est = tilted;
      }
    }
    if (est.status == TailStatus::finite && all_finite) largest_validated = lambda;
    if (est.status != TailStatus::finite) all_finite = false;
    if (est.status == TailStatus::exploding && !first_exploding) first_exploding = lambda;
    if (est.status == TailStatus::ambiguous) any_ambiguous = true;
    rows.push_back({{"lambda", lambda}, {"log_value", std::isfinite(est.log_value) ? nlohmann::json(est.log_value)
                                                                                    : nlohmann::json("inf")},
                    {"log_se", est.log_se}, {"alpha", est.alpha}, {"alpha_se", est.alpha_se},
                    {"status", to_string(est.status)}, {"method", est.method}});
  }
  std::ostringstream note;
  note << "largest validated lambda " << format_number(largest_validated);
  if (first_exploding) note << "; integral explodes at lambda " << format_number(*first_exploding);
  if (any_ambiguous) note << "; ambiguous tail estimate on the grid";
  auto rep = make_qualitative("supercontractivity_integrals", PaperEq::supercontractivity, all_finite,
                              largest_validated, grid.back(), note.str());
  rep.degraded = any_ambiguous && !first_exploding;
  rep.params = {{"lambdas", grid}, {"largest_validated_lambda", largest_validated}, {"oracle", oracle}};
  rep.data["lambdas"] = rows;
  return rep;
}

}  // namespace simlab
