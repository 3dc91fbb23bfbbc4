#include "simlab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "simlab/parallel.hpp"

namespace simlab {
namespace {

struct RuleStorage {
  std::vector<double> nodes;
  std::vector<double> weights;
};

RuleStorage build_rule(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    jacobi(i, i - 1) = std::sqrt(static_cast<double>(i));
    jacobi(i - 1, i) = jacobi(i, i - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  RuleStorage r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = solver.eigenvalues()(i);
    double v = solver.eigenvectors()(0, i);
    r.weights[i] = v * v;
  }
  for (int i = 0; i < n / 2; ++i) {
    double z = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  double total = compensated_sum(r.weights);
  for (double& w : r.weights) w /= total;
  return r;
}

}  // namespace

const GaussHermiteRule& gauss_hermite64() {
  static const RuleStorage storage = build_rule(64);
  static const GaussHermiteRule rule{storage.nodes, storage.weights};
  return rule;
}

double gaussian_expectation(double mean, double variance, const std::function<double(double)>& g) {
  if (variance <= 0.0) return g(mean);
  const auto& rule = gauss_hermite64();
  double s = std::sqrt(variance);
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc.add(rule.weights[i] * g(mean + s * rule.nodes[i]));
  return acc.value();
}

double log_gaussian_exp_quadratic(double theta, double kappa, double mean, double variance) {
  double d = 1.0 - 2.0 * kappa * variance;
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  double lin = theta + 2.0 * kappa * mean;
  return -0.5 * std::log(d) + theta * mean + kappa * mean * mean + variance * lin * lin / (2.0 * d);
}

}  // namespace simlab
