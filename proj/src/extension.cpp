#include "fpl/extension.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>

#include "fpl/convolution.hpp"
#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

std::vector<double> geometric_levels(double z1, double ratio, double z_max) {
  require(z1 > 0.0 && ratio > 1.0 && z_max > 0.0, "levels: need z1 > 0, ratio > 1, z_max > 0");
  std::vector<double> z{z1};
  while (z.back() < z_max) z.push_back(z.back() * ratio);
  return z;
}

std::vector<double> default_z_levels(double h, double r_max) { return geometric_levels(0.25 * h, 1.25, 2.0 * r_max); }

namespace {

// Mass of P(., z) over the cell at integer offset (ox, oy) from the
// evaluation point, in units of h. 2D only.
double cell_mass_2d(int ox, int oy, double zh, double s, double sig) {
  const double dist = std::max(0.0, std::hypot(std::max(0.0, std::abs(ox) - 0.5), std::max(0.0, std::abs(oy) - 0.5)));
  // Subdivide where the kernel varies on the scale of the cell.
  int sub = 1;
  if (dist < 4.0 * zh + 2.0) sub = std::clamp(static_cast<int>(std::ceil(2.0 / std::max(zh, 1e-3))), 1, 16);
  if (dist < 1.0) sub = std::max(sub, 4);
  const GaussRule& g = gauss_legendre(4);
  const double w = 1.0 / sub;
  double acc = 0.0;
  for (int a = 0; a < sub; ++a)
    for (int b = 0; b < sub; ++b)
      for (std::size_t p = 0; p < g.nodes.size(); ++p)
        for (std::size_t q = 0; q < g.nodes.size(); ++q) {
          const double x = ox - 0.5 + (a + 0.5 * (g.nodes[p] + 1.0)) * w;
          const double y = oy - 0.5 + (b + 0.5 * (g.nodes[q] + 1.0)) * w;
          acc += 0.25 * w * w * g.weights[p] * g.weights[q] * std::pow(x * x + y * y + zh * zh, -1.0 - s);
        }
  return sig * std::pow(zh, 2.0 * s) * acc;
}

}  // namespace

ExtensionSlab poisson_extend(const VectorField& u, double s, const std::vector<double>& z_levels, const Pattern& far,
                             const FarValues& far_values) {
  const Lattice& L = *u.lattice;
  FracParams fp{L.n(), s};
  fp.validate_open();
  require(!z_levels.empty(), "extension: no levels");
  for (std::size_t k = 0; k < z_levels.size(); ++k)
    require(z_levels[k] > 0.0 && (k == 0 || z_levels[k] > z_levels[k - 1]), "extension: levels must increase");
  require(static_cast<int>(far_values.size()) == far.classes, "extension: far values do not match classes");
  for (const auto& g : far_values) require(g.size() == u.d, "extension: far value dimension mismatch");

  ExtensionSlab slab;
  slab.lattice = u.lattice;
  slab.s = s;
  slab.d = u.d;
  slab.z.push_back(0.0);
  slab.z.insert(slab.z.end(), z_levels.begin(), z_levels.end());
  const std::size_t N = L.size();
  const int d = u.d;
  slab.values.assign(slab.z.size() * N * d, 0.0);
  std::copy(u.values.begin(), u.values.end(), slab.values.begin());

  const double h = L.h();
  const double sig = sigma_ns(fp);
  const int mx = L.mx(), my = L.my();
  const auto lo = L.origin();
  const auto hi = L.ext_hi();
  std::vector<double> comp(N), conv(N), total(N), ones(N, 1.0);
  std::vector<double> farmass(N * far.classes);

  for (std::size_t k = 1; k < slab.z.size(); ++k) {
    const double z = slab.z[k];
    const double zh = z / h;
    std::fill(farmass.begin(), farmass.end(), 0.0);
    Convolver conv_op = [&]() {
      if (L.n() == 1) {
        const double nu = 2.0 * s;
        boost::math::students_t dist(nu);
        const double sc = std::sqrt(nu) / zh;
        return Convolver::linear(mx, 1, [&](int ox, int) {
          const double a = (ox - 0.5) * sc, b = (ox + 0.5) * sc;
          return a >= 0.0 ? boost::math::cdf(boost::math::complement(dist, a)) -
                                boost::math::cdf(boost::math::complement(dist, b))
                          : boost::math::cdf(dist, b) - boost::math::cdf(dist, a);
        });
      }
      // Offsets are symmetric: tabulate one octant.
      std::vector<double> tab(static_cast<std::size_t>(mx) * my, -1.0);
      return Convolver::linear(mx, my, [&, tab](int ox, int oy) mutable {
        int ax = std::abs(ox), ay = std::abs(oy);
        if (ax < ay && ay < mx && ax < my) std::swap(ax, ay);
        double& v = tab[ax + static_cast<std::size_t>(mx) * ay];
        if (v < 0.0) v = cell_mass_2d(ax, ay, zh, s, sig);
        return v;
      });
    }();

    // Far masses.
    if (L.n() == 1) {
      const double nu = 2.0 * s;
      boost::math::students_t dist(nu);
      const int cl = far(lo[0] - 0.5 * h, 0.0), cr = far(hi[0] + 0.5 * h, 0.0);
      for (std::size_t i = 0; i < N; ++i) {
        const double x = L.center(i)[0];
        farmass[i * far.classes + cl] += boost::math::cdf(dist, std::sqrt(nu) * (lo[0] - x) / z);
        farmass[i * far.classes + cr] += boost::math::cdf(boost::math::complement(dist, std::sqrt(nu) * (hi[0] - x) / z));
      }
    } else {
      const GaussRule& g = gauss_legendre(24);
      constexpr int M = 8;
      for (std::size_t i = 0; i < N; ++i) {
        const auto c = L.center(i);
        const double dmin = std::min({c[0] - lo[0], hi[0] - c[0], c[1] - lo[1], hi[1] - c[1]});
        // Skip cells whose far mass is below round-off.
        if (2.0 * std::numbers::pi * sig * std::pow(z * z / (dmin * dmin + z * z), s) / (2.0 * s) < 1e-16) continue;
        std::array<double, 5> ang{std::atan2(lo[1] - c[1], lo[0] - c[0]), std::atan2(lo[1] - c[1], hi[0] - c[0]),
                                  std::atan2(hi[1] - c[1], hi[0] - c[0]), std::atan2(hi[1] - c[1], lo[0] - c[0]), 0.0};
        for (int a = 0; a < 4; ++a)
          if (ang[a] < 0) ang[a] += 2.0 * std::numbers::pi;
        std::sort(ang.begin(), ang.begin() + 4);
        ang[4] = ang[0] + 2.0 * std::numbers::pi;
        for (int arc = 0; arc < 4; ++arc) {
          const double a0 = ang[arc], a1 = ang[arc + 1];
          for (std::size_t q = 0; q < g.nodes.size(); ++q) {
            const double th = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * g.nodes[q];
            const double cs = std::cos(th), sn = std::sin(th);
            double rho = std::numeric_limits<double>::infinity();
            if (cs > 0) rho = std::min(rho, (hi[0] - c[0]) / cs);
            if (cs < 0) rho = std::min(rho, (lo[0] - c[0]) / cs);
            if (sn > 0) rho = std::min(rho, (hi[1] - c[1]) / sn);
            if (sn < 0) rho = std::min(rho, (lo[1] - c[1]) / sn);
            const double base = rho * rho + z * z;
            const double m = 0.5 * (a1 - a0) * g.weights[q] * sig * std::pow(z * z / base, s) / (2.0 * s);
            if (far.classes == 1) {
              farmass[i] += m;
              continue;
            }
            for (int j = 0; j < M; ++j) {
              const double t = (j + 0.5) / M;
              const double r = std::sqrt(std::max(0.0, base * std::pow(t, -1.0 / s) - z * z));
              farmass[i * far.classes + far(c[0] + r * cs, c[1] + r * sn)] += m / M;
            }
          }
        }
      }
    }

    conv_op.apply(ones, total);
    for (std::size_t i = 0; i < N; ++i)
      for (int q = 0; q < far.classes; ++q) total[i] += farmass[i * far.classes + q];
    for (int c = 0; c < d; ++c) {
      for (std::size_t i = 0; i < N; ++i) comp[i] = u.values[i * d + c];
      conv_op.apply(comp, conv);
      for (std::size_t i = 0; i < N; ++i) {
        double v = conv[i];
        for (int q = 0; q < far.classes; ++q) v += farmass[i * far.classes + q] * far_values[q][c];
        slab.at(k, i)[c] = v / total[i];
      }
    }
  }
  return slab;
}

namespace {

// int_{z0}^{z1} z^a ((z - z0)/(z1 - z0))^p dz for p = 0, 1, 2.
std::array<double, 3> z_moments(double z0, double z1, double a) {
  const double dz = z1 - z0;
  std::array<double, 3> m{};
  // Expand around z0 using the substitution z = z0 + dz eta when z0 > 0.
  if (z0 == 0.0) {
    for (int p = 0; p < 3; ++p) m[p] = std::pow(z1, a + 1.0) / (a + 1.0 + p);
    return m;
  }
  const GaussRule& g = gauss_legendre(12);
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    const double eta = 0.5 * (g.nodes[q] + 1.0);
    const double w = 0.5 * g.weights[q] * dz * std::pow(z0 + dz * eta, a);
    m[0] += w;
    m[1] += w * eta;
    m[2] += w * eta * eta;
  }
  return m;
}

// Exact int z^a |grad v|^2 of the bilinear interpolant on [x, x+h] x [z0, z1]
// from corner values (v00 at (x, z0), v10 at (x+h, z0), v01, v11).
double rect_energy(const double* v00, const double* v10, const double* v01, const double* v11, int d, double h,
                   double z0, double z1, double a) {
  const auto m = z_moments(z0, z1, a);
  const double dz = z1 - z0;
  double e = 0.0;
  for (int c = 0; c < d; ++c) {
    const double A = (v10[c] - v00[c]) / h;
    const double B = ((v11[c] - v01[c]) - (v10[c] - v00[c])) / h;
    e += h * (A * A * m[0] + 2.0 * A * B * m[1] + B * B * m[2]);
    const double C = (v01[c] - v00[c]) / dz;
    const double D = ((v11[c] - v10[c]) - (v01[c] - v00[c])) / dz;
    e += m[0] * h * (C * C + C * D + D * D / 3.0);
  }
  return e;
}

// Same integrand sampled on a k x k midpoint grid, restricted by `inside`.
template <class In>
double rect_energy_clipped(const double* v00, const double* v10, const double* v01, const double* v11, int d, double x,
                           double h, double z0, double z1, double a, In&& inside) {
  constexpr int k = 8;
  const double dz = z1 - z0;
  double e = 0.0;
  for (int p = 0; p < k; ++p)
    for (int q = 0; q < k; ++q) {
      const double xi = (p + 0.5) / k, eta = (q + 0.5) / k;
      const double xx = x + xi * h, zz = z0 + eta * dz;
      if (!inside(xx, zz)) continue;
      double g2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double gx = ((v10[c] - v00[c]) * (1.0 - eta) + (v11[c] - v01[c]) * eta) / h;
        const double gz = ((v01[c] - v00[c]) * (1.0 - xi) + (v11[c] - v10[c]) * xi) / dz;
        g2 += gx * gx + gz * gz;
      }
      e += std::pow(zz, a) * g2;
    }
  return e * h * dz / (k * k);
}

// 1D slab: integral over the (x, z) region selected by `region`, which
// classifies a rectangle as 0 outside, 1 fully inside, 2 partial, and
// `inside` for pointwise tests on partial rectangles.
template <class Region, class In>
double energy_1d(const ExtensionSlab& slab, Region&& region, In&& inside) {
  const Lattice& L = *slab.lattice;
  const double a = 1.0 - 2.0 * slab.s;
  const double h = L.h();
  CompensatedSum acc;
  for (std::size_t k = 0; k + 1 < slab.levels(); ++k) {
    const double z0 = slab.z[k], z1 = slab.z[k + 1];
    for (int i = 0; i + 1 < L.mx(); ++i) {
      const double x = L.center(i)[0];
      const int cls = region(x, x + h, z0, z1);
      if (cls == 0) continue;
      const double* v00 = slab.at(k, i);
      const double* v10 = slab.at(k, i + 1);
      const double* v01 = slab.at(k + 1, i);
      const double* v11 = slab.at(k + 1, i + 1);
      acc += cls == 1 ? rect_energy(v00, v10, v01, v11, slab.d, h, z0, z1, a)
                      : rect_energy_clipped(v00, v10, v01, v11, slab.d, x, h, z0, z1, a, inside);
    }
  }
  return acc.value();
}

// 2D slab: constant-gradient dual cells around each (cell, level) sample.
template <class In>
double energy_2d(const ExtensionSlab& slab, In&& inside) {
  const Lattice& L = *slab.lattice;
  const double a = 1.0 - 2.0 * slab.s;
  const double h = L.h();
  const int mx = L.mx(), my = L.my();
  const std::size_t K = slab.levels();
  CompensatedSum acc;
  for (std::size_t k = 0; k < K; ++k) {
    const double zl = k == 0 ? 0.0 : 0.5 * (slab.z[k - 1] + slab.z[k]);
    const double zu = k + 1 < K ? 0.5 * (slab.z[k] + slab.z[k + 1]) : slab.z[k];
    if (zu <= zl) continue;
    const double wz = (std::pow(zu, a + 1.0) - std::pow(zl, a + 1.0)) / (a + 1.0);
    for (int iy = 1; iy + 1 < my; ++iy)
      for (int ix = 1; ix + 1 < mx; ++ix) {
        const std::size_t i = L.index(ix, iy);
        const auto c = L.center(i);
        if (!inside(c[0], c[1], slab.z[k])) continue;
        double g2 = 0.0;
        for (int comp = 0; comp < slab.d; ++comp) {
          const double gx = (slab.at(k, L.index(ix + 1, iy))[comp] - slab.at(k, L.index(ix - 1, iy))[comp]) / (2.0 * h);
          const double gy = (slab.at(k, L.index(ix, iy + 1))[comp] - slab.at(k, L.index(ix, iy - 1))[comp]) / (2.0 * h);
          const std::size_t kl = k == 0 ? 0 : k - 1, ku = k + 1 < K ? k + 1 : k;
          const double gz = (slab.at(ku, i)[comp] - slab.at(kl, i)[comp]) / (slab.z[ku] - slab.z[kl]);
          g2 += gx * gx + gy * gy + gz * gz;
        }
        acc += g2 * wz * h * h;
      }
  }
  return acc.value();
}

}  // namespace

double extension_energy(const ExtensionSlab& slab, double x0, double y0, double half_width) {
  const Lattice& L = *slab.lattice;
  const double ds = delta_s(slab.s);
  if (L.n() == 1) {
    auto region = [&](double xa, double xb, double, double) {
      if (xa >= x0 - half_width && xb <= x0 + half_width) return 1;
      if (xb <= x0 - half_width || xa >= x0 + half_width) return 0;
      return 2;
    };
    auto inside = [&](double x, double) { return std::abs(x - x0) <= half_width; };
    return 0.5 * ds * energy_1d(slab, region, inside);
  }
  auto inside = [&](double x, double y, double) {
    return std::abs(x - x0) <= half_width && std::abs(y - y0) <= half_width;
  };
  return 0.5 * ds * energy_2d(slab, inside);
}

double density_theta(const ExtensionSlab& slab, std::optional<double> eps, double x0, double y0, double r,
                     const Potential* W) {
  const Lattice& L = *slab.lattice;
  require(r > 0.0, "theta: radius must be positive");
  const int n = L.n();
  const double h = L.h();
  const auto c0 = L.center(0);
  const auto c1 = L.center(L.size() - 1);
  bool ok = r <= slab.z.back() && x0 - r >= c0[0] && x0 + r <= c1[0];
  if (n == 2) ok = ok && y0 - r >= c0[1] && y0 + r <= c1[1];
  if (!ok) throw DomainError("theta: half-ball leaves the sampled region");
  const double ds = delta_s(slab.s);
  const double r2 = r * r;

  double grad;
  if (n == 1) {
    auto region = [&](double xa, double xb, double za, double zb) {
      const double fx = std::max(std::abs(xa - x0), std::abs(xb - x0));
      if (fx * fx + zb * zb <= r2) return 1;
      const double nx = (x0 >= xa && x0 <= xb) ? 0.0 : std::min(std::abs(xa - x0), std::abs(xb - x0));
      if (nx * nx + za * za >= r2) return 0;
      return 2;
    };
    auto inside = [&](double x, double z) { return (x - x0) * (x - x0) + z * z < r2; };
    grad = energy_1d(slab, region, inside);
  } else {
    auto inside = [&](double x, double y, double z) { return (x - x0) * (x - x0) + (y - y0) * (y - y0) + z * z < r2; };
    grad = energy_2d(slab, inside);
  }
  double total = 0.5 * ds * grad;

  if (eps && W) {
    require(*eps > 0.0, "theta: eps must be positive");
    require(W->dim() == slab.d, "theta: potential dimension mismatch");
    CompensatedSum pot;
    for (std::size_t i = 0; i < L.size(); ++i) {
      const auto c = L.center(i);
      double frac;
      if (n == 1) {
        const double lo = std::max(c[0] - 0.5 * h, x0 - r), hi = std::min(c[0] + 0.5 * h, x0 + r);
        frac = std::max(0.0, hi - lo);
      } else {
        frac = (c[0] - x0) * (c[0] - x0) + (c[1] - y0) * (c[1] - y0) < r2 ? h * h : 0.0;
      }
      if (frac > 0.0) pot += frac * W->value({slab.at(0, i), static_cast<std::size_t>(slab.d)});
    }
    total += std::pow(*eps, -2.0 * slab.s) * pot.value();
  }
  return total * std::pow(r, -(n - 2.0 * slab.s));
}

}  // namespace fpl
