#include "fpl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fpl/error.hpp"

namespace fpl {

namespace {

GaussRule build_rule(int order) {
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // Newton iteration on P_order from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  require(order >= 1 && order <= 512, "Gauss-Legendre order out of range");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace fpl
