#pragma once

#include <cstddef>
#include <span>
#include <cmath>
#include <vector>

namespace fpl {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule with `order` points. Rules are cached per order.
const GaussRule& gauss_legendre(int order);

// Integrates f over [a, b] with a Gauss-Legendre rule of the given order.
template <class F>
double integrate(F&& f, double a, double b, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    acc += rule.weights[q] * f(mid + half * rule.nodes[q]);
  }
  return acc * half;
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

}  // namespace fpl
