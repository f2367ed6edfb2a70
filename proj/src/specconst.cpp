#include "fpl/specconst.hpp"

#include <cmath>
#include <numbers>

#include "fpl/error.hpp"

namespace fpl {

void FracParams::validate() const {
  require(n == 1 || n == 2, "dimension n must be 1 or 2");
  require(s > 0.0 && s <= 0.5, "exponent s must satisfy 0 < s <= 1/2");
}

void FracParams::validate_open() const {
  require(n == 1 || n == 2, "dimension n must be 1 or 2");
  require(s > 0.0 && s < 0.5, "exponent s must satisfy 0 < s < 1/2");
}

double gamma_ns(const FracParams& p) {
  p.validate();
  const double log_val = std::log(p.s) + 2.0 * p.s * std::numbers::ln2 -
                         0.5 * p.n * std::log(std::numbers::pi) +
                         std::lgamma(0.5 * (p.n + 2.0 * p.s)) - std::lgamma(1.0 - p.s);
  return std::exp(log_val);
}

double delta_s(double s) {
  require(s > 0.0 && s <= 0.5, "exponent s must satisfy 0 < s <= 1/2");
  const double log_val =
      (2.0 * s - 1.0) * std::numbers::ln2 + std::lgamma(s) - std::lgamma(1.0 - s);
  return std::exp(log_val);
}

double sigma_ns(const FracParams& p) {
  p.validate();
  const double log_val = -0.5 * p.n * std::log(std::numbers::pi) +
                         std::lgamma(0.5 * (p.n + 2.0 * p.s)) - std::lgamma(p.s);
  return std::exp(log_val);
}

double omega_k(double k) {
  require(k >= 0.0, "omega_k requires k >= 0");
  return std::exp(0.5 * k * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * k));
}

}  // namespace fpl
