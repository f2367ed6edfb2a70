#pragma once

// Normalization constants of the fractional Laplacian, the Poisson kernel of
// the weighted extension, and fractional-dimension ball volumes.

namespace fpl {

struct FracParams {
  int n = 1;       // spatial dimension, 1 or 2
  double s = 0.25; // exponent in (0, 1/2]

  double a() const { return 1.0 - 2.0 * s; }

  // Throws DomainError unless n in {1,2} and 0 < s <= 1/2.
  void validate() const;
  // Solver modules reject the endpoint s = 1/2.
  void validate_open() const;
};

// s 2^{2s} pi^{-n/2} Gamma((n+2s)/2) / Gamma(1-s)
double gamma_ns(const FracParams& p);

// 2^{2s-1} Gamma(s) / Gamma(1-s)
double delta_s(double s);

// pi^{-n/2} Gamma((n+2s)/2) / Gamma(s): makes the Poisson kernel a
// probability density in x for every z > 0.
double sigma_ns(const FracParams& p);

// pi^{k/2} / Gamma(1 + k/2) for real k >= 0 (omega_0 = 1).
double omega_k(double k);

// Surface measure of the unit sphere in R^n, n * omega_n (n >= 1).
inline double sphere_area(int n) { return n * omega_k(n); }

}  // namespace fpl
