#include "fpl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

namespace {

// Second antiderivative of |t|^{-1-2s} vanishing at 0.
double phi1(double t, double s) { return -std::pow(std::abs(t), 1.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s)); }

// Integral over [0,1]^2 of r^{-2-2s} (ax + bx x)(ay + by y), for ax*ay = 0.
double corner_square(double ax, double bx, double ay, double by, double s) {
  const GaussRule& g = gauss_legendre(24);
  const double c1 = 1.0 / (1.0 - 2.0 * s), c2 = 1.0 / (2.0 - 2.0 * s);
  double acc = 0.0;
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    const double v = 0.5 * (g.nodes[q] + 1.0);
    const double kv = std::pow(1.0 + v * v, -1.0 - s);
    const double t1 = (bx * ay + ax * by * v) * c1 + bx * by * v * c2;
    const double t2 = (by * ax + ay * bx * v) * c1 + bx * by * v * c2;
    acc += 0.5 * g.weights[q] * kv * (t1 + t2);
  }
  return acc;
}

// Tensor Gauss over [X, X+1] x [Y, Y+1] of r^{-2-2s} times the tent weight.
double regular_square(double X, double Y, double ox, double oy, double s, int order) {
  const GaussRule& g = gauss_legendre(order);
  double acc = 0.0;
  for (std::size_t a = 0; a < g.nodes.size(); ++a) {
    const double x = X + 0.5 * (g.nodes[a] + 1.0);
    const double fx = 1.0 - std::abs(x - ox);
    double row = 0.0;
    for (std::size_t b = 0; b < g.nodes.size(); ++b) {
      const double y = Y + 0.5 * (g.nodes[b] + 1.0);
      const double fy = 1.0 - std::abs(y - oy);
      row += g.weights[b] * fy * std::pow(x * x + y * y, -1.0 - s);
    }
    acc += g.weights[a] * fx * row;
  }
  return 0.25 * acc;
}

// Angular far-field integral from point (x, y) over the complement of the
// box, split by class. Adds `weight` times the integral to out[q].
void far_integral_2d(double x, double y, const std::array<double, 2>& lo, const std::array<double, 2>& hi, double s,
                     const Pattern& far, double weight, double* out) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::array<double, 5> ang{std::atan2(lo[1] - y, lo[0] - x), std::atan2(lo[1] - y, hi[0] - x),
                            std::atan2(hi[1] - y, hi[0] - x), std::atan2(hi[1] - y, lo[0] - x), 0.0};
  for (int k = 0; k < 4; ++k)
    if (ang[k] < 0) ang[k] += two_pi;
  std::sort(ang.begin(), ang.begin() + 4);
  ang[4] = ang[0] + two_pi;
  const GaussRule& g = gauss_legendre(24);
  constexpr int M = 8;
  for (int arc = 0; arc < 4; ++arc) {
    const double a = ang[arc], b = ang[arc + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double th = mid + half * g.nodes[q];
      const double c = std::cos(th), sn = std::sin(th);
      double rho = std::numeric_limits<double>::infinity();
      if (c > 0) rho = std::min(rho, (hi[0] - x) / c);
      if (c < 0) rho = std::min(rho, (lo[0] - x) / c);
      if (sn > 0) rho = std::min(rho, (hi[1] - y) / sn);
      if (sn < 0) rho = std::min(rho, (lo[1] - y) / sn);
      const double ray = weight * half * g.weights[q] * std::pow(rho, -2.0 * s) / (2.0 * s);
      if (far.classes == 1) {
        out[0] += ray;
        continue;
      }
      for (int k = 0; k < M; ++k) {
        const double t = (k + 0.5) / M;
        const double r = rho * std::pow(t, -1.0 / (2.0 * s));
        out[far(x + r * c, y + r * sn)] += ray / M;
      }
    }
  }
}

// Far class on one side of a 1D lattice; must be constant along the ray.
int side_class_1d(const Pattern& far, double edge, double dir, double h) {
  const int c0 = far(edge + dir * 0.5 * h, 0.0);
  for (int k = 0; k < 48; ++k) {
    const double x = edge + dir * h * std::ldexp(1.0, k);
    if (far(x, 0.0) != c0) throw DomainError("kernel: 1D far pattern must be constant on each side");
  }
  return c0;
}

}  // namespace

double unit_weight_1d(long k, double s) {
  k = std::abs(k);
  if (k == 0) return 0.0;
  if (k <= 64) return phi1(k + 1.0, s) - 2.0 * phi1(static_cast<double>(k), s) + phi1(k - 1.0, s);
  auto f = [k, s](double t) { return (1.0 - std::abs(t)) * std::pow(k + t, -1.0 - 2.0 * s); };
  return integrate(f, -1.0, 0.0, 12) + integrate(f, 0.0, 1.0, 12);
}

double unit_weight_2d(long ox, long oy, double s) {
  ox = std::abs(ox);
  oy = std::abs(oy);
  if (ox == 0 && oy == 0) return 0.0;
  double acc = 0.0;
  for (int a = -1; a <= 0; ++a)
    for (int b = -1; b <= 0; ++b) {
      const double X = static_cast<double>(ox + a), Y = static_cast<double>(oy + b);
      const bool corner = (X == 0.0 || X == -1.0) && (Y == 0.0 || Y == -1.0);
      if (corner) {
        const double sx = X == 0.0 ? 1.0 : -1.0, sy = Y == 0.0 ? 1.0 : -1.0;
        auto fx = [&](double xp) { return 1.0 - std::abs(sx * xp - ox); };
        auto fy = [&](double yp) { return 1.0 - std::abs(sy * yp - oy); };
        acc += corner_square(fx(0.0), fx(1.0) - fx(0.0), fy(0.0), fy(1.0) - fy(0.0), s);
      } else {
        const double dx = std::max({0.0, X, -(X + 1.0)}), dy = std::max({0.0, Y, -(Y + 1.0)});
        const double dist = std::hypot(dx, dy);
        const int order = dist < 2.0 ? 20 : (dist < 6.0 ? 14 : 10);
        acc += regular_square(X, Y, static_cast<double>(ox), static_cast<double>(oy), s, order);
      }
    }
  return acc;
}

double radial_tail(int n, double s, double R) { return sphere_area(n) * std::pow(R, -2.0 * s) / (2.0 * s); }

KernelTable::KernelTable(LatticePtr lat, double s, Pattern far)
    : lat_(std::move(lat)), s_(s), far_(std::move(far)) {
  require(s > 0.0 && s < 0.5, "kernel: s must lie in (0, 1/2)");
  require(far_.classes >= 1 && static_cast<bool>(far_.classify), "kernel: invalid far pattern");
  const Lattice& L = *lat_;
  const int n = L.n();
  const double h = L.h();
  scale_ = std::pow(h, -(n + 2.0 * s));
  const int mx = L.mx(), my = L.my();

  unit_.assign(static_cast<std::size_t>(mx) * my, 0.0);
  if (n == 1) {
    for (int k = 1; k < mx; ++k) unit_[k] = unit_weight_1d(k, s);
  } else {
    for (int dy = 0; dy < my; ++dy)
      for (int dx = 0; dx < mx; ++dx) {
        if (dx < dy && dy < mx && dx < my) {
          unit_[dx + static_cast<std::size_t>(mx) * dy] = unit_[dy + static_cast<std::size_t>(mx) * dx];
          continue;
        }
        unit_[dx + static_cast<std::size_t>(mx) * dy] = unit_weight_2d(dx, dy, s);
      }
  }

  // Row sums through a prefix table over nonnegative offsets.
  std::vector<double> Q(static_cast<std::size_t>(mx) * my);
  for (int b = 0; b < my; ++b)
    for (int a = 0; a < mx; ++a) {
      double v = unit_[a + static_cast<std::size_t>(mx) * b];
      if (a > 0) v += Q[(a - 1) + static_cast<std::size_t>(mx) * b];
      if (b > 0) v += Q[a + static_cast<std::size_t>(mx) * (b - 1)];
      if (a > 0 && b > 0) v -= Q[(a - 1) + static_cast<std::size_t>(mx) * (b - 1)];
      Q[a + static_cast<std::size_t>(mx) * b] = v;
    }
  auto q = [&](int a, int b) { return Q[a + static_cast<std::size_t>(mx) * b]; };
  rows_.resize(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    const int A1 = L.ix(i), A2 = mx - 1 - L.ix(i), B1 = L.iy(i), B2 = my - 1 - L.iy(i);
    auto strip = [&](int b) { return q(A1, b) + q(A2, b) - q(0, b); };
    const double tot = strip(B1) + strip(B2) - strip(0);
    rows_[i] = scale_ * tot;
  }

  const int Qc = far_.classes;
  tails_.assign(L.size() * Qc, 0.0);
  const auto lo = L.origin();
  const auto hi = L.ext_hi();
  if (n == 1) {
    const int cl = side_class_1d(far_, lo[0], -1.0, h);
    const int cr = side_class_1d(far_, hi[0], 1.0, h);
    const double den = 2.0 * s * (1.0 - 2.0 * s) * h;
    const double e = 1.0 - 2.0 * s;
    for (std::size_t i = 0; i < L.size(); ++i) {
      const double xl = lo[0] + L.ix(i) * h, xr = xl + h;
      tails_[i * Qc + cl] += (std::pow(xr - lo[0], e) - std::pow(xl - lo[0], e)) / den;
      tails_[i * Qc + cr] += (std::pow(hi[0] - xl, e) - std::pow(hi[0] - xr, e)) / den;
    }
  } else {
    for (std::size_t i = 0; i < L.size(); ++i) {
      const auto c = L.center(i);
      const int ring = std::min({L.ix(i), mx - 1 - L.ix(i), L.iy(i), my - 1 - L.iy(i)});
      double* out = &tails_[i * Qc];
      // 2x2 Gauss keeps the cell average fourth-order accurate; the rings
      // next to the far boundary need a finer rule.
      const GaussRule& sub = gauss_legendre(ring >= 2 ? 2 : 4);
      {
        for (std::size_t a = 0; a < sub.nodes.size(); ++a)
          for (std::size_t b = 0; b < sub.nodes.size(); ++b)
            far_integral_2d(c[0] + 0.5 * h * sub.nodes[a], c[1] + 0.5 * h * sub.nodes[b], lo, hi, s, far_,
                            0.25 * sub.weights[a] * sub.weights[b], out);
      }
    }
  }
}

double KernelTable::tail_total(std::size_t i) const {
  double t = 0.0;
  for (int q = 0; q < far_.classes; ++q) t += tails_[i * far_.classes + q];
  return t;
}

KernelTable build_kernel(const LatticePtr& lat, double s, const Pattern& far) { return KernelTable(lat, s, far); }

}  // namespace fpl
