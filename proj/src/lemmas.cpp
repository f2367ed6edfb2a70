#include "fpl/lemmas.hpp"

#include <algorithm>
#include <cmath>

#include "fpl/error.hpp"

namespace fpl {

double de_giorgi_threshold(double alpha, double M) {
  require(alpha > 0.0 && alpha < 1.0, "De Giorgi: alpha must lie in (0,1)");
  require(M > 0.0, "De Giorgi: M must be positive");
  return std::pow(M, -1.0 / alpha) / std::pow(2.0, (1.0 - alpha) / (alpha * alpha));
}

DeGiorgiResult de_giorgi_iteration(double c0, double alpha, double M, int k_max) {
  require(c0 >= 0.0, "De Giorgi: c0 must be non-negative");
  require(k_max >= 0, "De Giorgi: negative k_max");
  DeGiorgiResult r;
  r.threshold = de_giorgi_threshold(alpha, M);
  // one ulp of slack so that c0 computed as the threshold itself is admitted
  r.hypothesis_met = c0 <= r.threshold * (1.0 + 4e-16);
  if (!r.hypothesis_met) {
    r.verdict = "hypothesis not met";
    return r;
  }
  r.c.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  r.envelope_holds = true;
  if (c0 == 0.0) {
    r.verdict = "envelope holds";
    return r;
  }
  const double ln2 = std::log(2.0), lnM = std::log(M), l0 = std::log(c0);
  double l = l0;
  r.c[0] = c0;
  for (int k = 0; k < k_max; ++k) {
    l = (k * ln2 + lnM + l) / (1.0 - alpha);
    r.c[k + 1] = std::exp(l);
    if (l > l0 - (k + 1) * alpha * ln2 + 1e-12 * (1.0 + std::abs(l0))) r.envelope_holds = false;
  }
  r.verdict = r.envelope_holds ? "envelope holds" : "envelope violated";
  return r;
}

double extinction_threshold(double alpha, double gamma, double K) {
  require(alpha > 0.0 && alpha < 1.0, "extinction: alpha must lie in (0,1)");
  require(gamma > 0.0 && gamma < 1.0, "extinction: gamma must lie in (0,1)");
  require(K > 0.0, "extinction: K must be positive");
  return std::pow((1.0 - gamma) / (std::pow(2.0, (1.0 + alpha) / alpha) * K), 1.0 / alpha);
}

ExtinctionRun extinction_companion(double alpha, double gamma, double K, double R, int N) {
  const double p = extinction_threshold(alpha, gamma, K);
  require(R > 0.0, "extinction: R must be positive");
  require(N >= 2 && N % 2 == 0, "extinction: N must be even and at least 2");
  ExtinctionRun out;
  out.N = N;
  out.bound = p * std::pow(R, gamma / alpha);
  const double dt = R / N;
  const double g1 = 1.0 - gamma;
  // W[d] = ((d+1)^{1-g} - d^{1-g}) dt^{-g} / (1-g): weight of the increment on
  // [t_j, t_{j+1}] seen from r_k with d = k - 1 - j.
  std::vector<double> W(N);
  for (int d = 0; d < N; ++d) W[d] = (std::pow(d + 1.0, g1) - std::pow(static_cast<double>(d), g1)) * std::pow(dt, -gamma) / g1;
  const double omega = W[0];
  const double fstar = std::pow((1.0 - alpha) / (K * omega), 1.0 / alpha);
  std::vector<double> f(N + 1);
  for (int j0 = 0; j0 < N; ++j0) {
    std::fill(f.begin(), f.end(), 0.0);
    for (int k = j0 + 1; k <= N; ++k) {
      double S = 0.0;
      for (int j = j0; j < k - 1; ++j) S += (f[j + 1] - f[j]) * W[k - 1 - j];
      const double fp = f[k - 1];
      auto g = [&](double x) { return K * (S + omega * (x - fp)) - std::pow(x, 1.0 - alpha); };
      double lo = std::max(fstar, fp);
      if (g(lo) > 0.0) {  // no root above f_{k-1}: the inequality already holds there
        f[k] = fp;
        continue;
      }
      double hi = std::max(2.0 * lo, 1e-300);
      while (g(hi) < 0.0) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
      }
      f[k] = hi;
    }
    if (f[N] <= out.bound) {
      ++out.accepted;
      if (out.earliest_start < 0.0) out.earliest_start = static_cast<double>(j0) / N;
      out.max_half = std::max(out.max_half, f[N / 2]);
    }
  }
  return out;
}

}  // namespace fpl
