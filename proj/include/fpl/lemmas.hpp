#pragma once

// Numerical companions of two iteration lemmas: the De Giorgi recursion
// c_{k+1}^{1-a} <= 2^k M c_k and the extinction property of
// f(r)^{1-a} <= K int_0^r f'(t) (r - t)^{-g} dt.

#include <string>
#include <vector>

namespace fpl {

struct DeGiorgiResult {
  double threshold = 0.0;  // M^{-1/a} / 2^{(1-a)/a^2}
  bool hypothesis_met = false;
  bool envelope_holds = false;
  std::vector<double> c;  // extremal sequence, c[0] = c0 (empty when the hypothesis fails)
  std::string verdict;
};

double de_giorgi_threshold(double alpha, double M);

// Extremal sequence c_{k+1} = (2^k M c_k)^{1/(1-a)}, k < k_max, and the
// check c_k <= 2^{-k a} c0. Computed in log space.
DeGiorgiResult de_giorgi_iteration(double c0, double alpha, double M, int k_max = 60);

// ((1-g) / (2^{(1+a)/a} K))^{1/a}
double extinction_threshold(double alpha, double gamma, double K);

struct ExtinctionRun {
  int N = 0;
  int accepted = 0;        // starting points with f(R) <= p R^{g/a}
  double max_half = 0.0;   // largest f(R/2) among accepted runs
  double bound = 0.0;      // p R^{g/a}
  double earliest_start = -1.0;  // smallest accepted t_j0 / R
};

// f = 0 on [0, t_j0], then the equality case of the inequality solved on a
// uniform grid of N steps (piecewise linear f, product integration of the
// Abel kernel, largest root at each step), for every start j0.
ExtinctionRun extinction_companion(double alpha, double gamma, double K, double R, int N);

}  // namespace fpl
