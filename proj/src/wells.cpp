#include "fpl/wells.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fpl/error.hpp"

namespace fpl {

namespace {

void check_dim(const Wells& w, std::size_t zsize) {
  if (static_cast<int>(zsize) != w.d) throw DomainError("potential: dimension mismatch");
}

// Squared distances to every well.
void sq_dists(const Wells& w, std::span<const double> z, double* f) {
  for (std::size_t j = 0; j < w.m(); ++j) {
    double acc = 0.0;
    for (int k = 0; k < w.d; ++k) {
      const double t = z[k] - w.points[j][k];
      acc += t * t;
    }
    f[j] = acc;
  }
}

// Unit directions used to probe the potential along rays.
std::vector<Eigen::VectorXd> probe_directions(int d) {
  std::vector<Eigen::VectorXd> dirs;
  if (d == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
    dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
  } else if (d == 2) {
    for (int k = 0; k < 64; ++k) {
      const double th = 2.0 * std::numbers::pi * k / 64.0;
      Eigen::VectorXd v(2);
      v << std::cos(th), std::sin(th);
      dirs.push_back(v);
    }
  } else {
    for (int k = 0; k < d; ++k) {
      dirs.push_back(Eigen::VectorXd::Unit(d, k));
      dirs.push_back(-Eigen::VectorXd::Unit(d, k));
    }
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    while (dirs.size() < 64) {
      Eigen::VectorXd v(d);
      for (int k = 0; k < d; ++k) v[k] = normal(rng);
      if (v.norm() > 1e-8) dirs.push_back(v.normalized());
    }
  }
  return dirs;
}

double min_eig(const Eigen::MatrixXd& H) {
  if (H.rows() == 1) return H(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double dir_derivative(const Wells& w, const Eigen::VectorXd& nu, double t) {
  Eigen::VectorXd z = t * nu;
  Eigen::VectorXd g = grad_W(w, z);
  return g.dot(nu);
}

}  // namespace

Wells::Wells(std::vector<Eigen::VectorXd> pts) : points(std::move(pts)) {
  require(points.size() >= 2, "wells: need at least two points");
  require(points.size() <= static_cast<std::size_t>(kMaxPhases), "wells: at most 16 points");
  d = static_cast<int>(points[0].size());
  require(d >= 1 && d <= kMaxWellDim, "wells: dimension must be in 1..8");
  for (const auto& a : points) {
    require(a.size() == d, "wells: mixed dimensions");
    require(a.allFinite(), "wells: non-finite coordinate");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      require((points[i] - points[j]).norm() > 0.0, "wells: repeated point");
  p = 2.0 * static_cast<double>(points.size());
}

double Wells::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) g = std::min(g, (points[i] - points[j]).norm());
  return g;
}

Wells wells_1d(std::initializer_list<double> values) {
  std::vector<Eigen::VectorXd> pts;
  for (double v : values) pts.push_back(Eigen::VectorXd::Constant(1, v));
  return Wells(std::move(pts));
}

double eval_W(const Wells& w, std::span<const double> z) {
  check_dim(w, z.size());
  double f[kMaxPhases];
  sq_dists(w, z, f);
  double prod = 1.0;
  for (std::size_t j = 0; j < w.m(); ++j) prod *= f[j];
  return prod;
}

void grad_W(const Wells& w, std::span<const double> z, std::span<double> out) {
  check_dim(w, z.size());
  check_dim(w, out.size());
  const std::size_t m = w.m();
  double f[kMaxPhases], pre[kMaxPhases + 1], suf[kMaxPhases + 1];
  sq_dists(w, z, f);
  pre[0] = 1.0;
  for (std::size_t j = 0; j < m; ++j) pre[j + 1] = pre[j] * f[j];
  suf[m] = 1.0;
  for (std::size_t j = m; j-- > 0;) suf[j] = suf[j + 1] * f[j];
  for (int k = 0; k < w.d; ++k) out[k] = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double others = pre[j] * suf[j + 1];
    for (int k = 0; k < w.d; ++k) out[k] += 2.0 * (z[k] - w.points[j][k]) * others;
  }
}

Eigen::VectorXd grad_W(const Wells& w, const Eigen::VectorXd& z) {
  Eigen::VectorXd g(w.d);
  grad_W(w, std::span<const double>(z.data(), z.size()), std::span<double>(g.data(), g.size()));
  return g;
}

Eigen::MatrixXd hessian_W(const Wells& w, std::span<const double> z) {
  check_dim(w, z.size());
  const std::size_t m = w.m();
  double f[kMaxPhases];
  sq_dists(w, z, f);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(w.d, w.d);
  Eigen::Map<const Eigen::VectorXd> zv(z.data(), w.d);
  for (std::size_t j = 0; j < m; ++j) {
    double others = 1.0;
    for (std::size_t k = 0; k < m; ++k)
      if (k != j) others *= f[k];
    H.diagonal().array() += 2.0 * others;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double rest = 1.0;
      for (std::size_t k = 0; k < m; ++k)
        if (k != j && k != l) rest *= f[k];
      H += 4.0 * rest * (zv - w.points[j]) * (zv - w.points[l]).transpose();
    }
  }
  return H;
}

double ProductPotential::value(std::span<const double> z) const { return eval_W(wells_, z); }

void ProductPotential::gradient(std::span<const double> z, std::span<double> out) const {
  grad_W(wells_, z, out);
}

Eigen::MatrixXd ProductPotential::hessian(std::span<const double> z) const { return hessian_W(wells_, z); }

std::pair<double, std::size_t> nearest_well(const Wells& w, std::span<const double> z) {
  check_dim(w, z.size());
  double f[kMaxPhases] = {};
  sq_dists(w, z, f);
  std::size_t best = 0;
  for (std::size_t j = 1; j < w.m(); ++j)
    if (f[j] < f[best]) best = j;
  return {std::sqrt(f[best]), best};
}

double PotentialConstants::sup_bound(double g_sup) const {
  return std::max(std::pow(c2, 1.0 / (p - 1.0)), g_sup);
}

PotentialConstants estimate_constants(const Wells& w) {
  PotentialConstants pc;
  pc.p = w.p;

  double lam_min = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& a : w.points) {
    Eigen::MatrixXd H = hessian_W(w, std::span<const double>(a.data(), a.size()));
    lam_min = std::min(lam_min, min_eig(H));
    scale = std::max(scale, H.cwiseAbs().maxCoeff());
  }
  if (!(lam_min > 1e-12 * std::max(scale, 1.0)))
    throw DomainError("estimate_constants: degenerate Hessian at a well");
  pc.kappa_W = 0.5 * lam_min;

  const auto dirs = probe_directions(w.d);
  auto convex_up_to = [&](double r) {
    for (const auto& a : w.points)
      for (const auto& nu : dirs)
        for (int k = 1; k <= 64; ++k) {
          Eigen::VectorXd y = a + (r * k / 64.0) * nu;
          if (min_eig(hessian_W(w, std::span<const double>(y.data(), y.size()))) < pc.kappa_W) return false;
        }
    return true;
  };
  double hi = std::min(1.0, w.min_gap() / 4.0);
  if (convex_up_to(hi)) {
    pc.rho_W = hi;
  } else {
    double lo = 0.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (convex_up_to(mid) ? lo : hi) = mid;
    }
    pc.rho_W = lo;
  }

  // (H3) fit along rays from the origin.
  double amax = 0.0;
  for (const auto& a : w.points) amax = std::max(amax, a.norm());
  const double T = 8.0 * (1.0 + amax);
  const int nt = 2000;
  const double pm1 = w.p - 1.0;

  // Last sign change of the radial derivative gives the smallest admissible c2.
  double tstar = 0.0;
  for (const auto& nu : dirs) {
    int last = -1;
    for (int k = 0; k <= nt; ++k)
      if (dir_derivative(w, nu, T * k / nt) <= 0.0) last = k;
    if (last < 0) continue;
    if (last == nt) throw DomainError("estimate_constants: potential not increasing along a ray");
    double lo = T * last / nt, hi2 = T * (last + 1) / nt;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi2);
      (dir_derivative(w, nu, mid) <= 0.0 ? lo : hi2) = mid;
    }
    tstar = std::max(tstar, hi2);
  }
  const double c2_min = std::max(std::pow(tstar, pm1), 1e-12);

  // Sample set beyond T uses the leading-order asymptotics: dW/dnu ~ p t^{p-1}.
  auto feasible_c1 = [&](double c2, double& c1) {
    double lo = 0.0, hi3 = w.p;
    for (const auto& nu : dirs)
      for (int k = 1; k <= nt; ++k) {
        const double t = T * k / nt;
        const double dv = dir_derivative(w, nu, t);
        const double D = std::pow(t, pm1) - c2;
        if (D > 0.0) {
          hi3 = std::min(hi3, dv / D);
        } else if (D < 0.0 && dv < 0.0) {
          lo = std::max(lo, dv / D);
        }
      }
    c1 = hi3;
    return hi3 > 0.0 && lo <= hi3;
  };
  double c2 = c2_min * (1.0 + 1e-9);
  for (int k = 0; k < 200; ++k) {
    double c1;
    if (feasible_c1(c2, c1)) {
      pc.c1 = c1;
      pc.c2 = c2;
      break;
    }
    c2 *= 1.25;
  }
  if (pc.c2 == 0.0) throw DomainError("estimate_constants: could not fit growth constants");

  double c3 = w.p;
  for (const auto& nu : dirs)
    for (int k = 0; k <= nt; ++k) {
      const double t = T * k / nt;
      c3 = std::max(c3, std::abs(dir_derivative(w, nu, t)) / (std::pow(t, pm1) + 1.0));
    }
  pc.c3 = c3;
  return pc;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::NearlyHomogeneous: return "NearlyHomogeneous";
    case Regime::STI3: return "STI3";
    case Regime::SITI3: return "SITI3";
    case Regime::General: return "General";
  }
  return "?";
}

RegimeInfo classify_regime(const Eigen::MatrixXd& s) {
  const int m = static_cast<int>(s.rows());
  require(m >= 2 && s.cols() == m, "sigma: must be square with m >= 2");
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (int i = 0; i < m; ++i) {
    require(s(i, i) == 0.0, "sigma: diagonal must vanish");
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      require(std::isfinite(s(i, j)) && s(i, j) > 0.0, "sigma: off-diagonal entries must be positive");
      require(s(i, j) == s(j, i), "sigma: must be symmetric");
      smin = std::min(smin, s(i, j));
      smax = std::max(smax, s(i, j));
    }
  }
  RegimeInfo info;
  info.q = (m - 2) * smax / ((m - 1) * smin);
  if (info.q < 1.0) info.regimes.push_back(Regime::NearlyHomogeneous);
  if (m == 3) {
    bool sti = true;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const int k = 3 - i - j;
        if (!(s(i, j) < s(i, k) + s(k, j))) sti = false;
        if (s(i, j) > s(i, k) + s(k, j)) info.siti_pair = std::make_pair(i, j);
      }
    if (sti) {
      info.regimes.push_back(Regime::STI3);
      info.alpha = std::vector<double>{0.5 * (s(0, 1) + s(0, 2) - s(1, 2)), 0.5 * (s(0, 1) + s(1, 2) - s(0, 2)),
                                       0.5 * (s(0, 2) + s(1, 2) - s(0, 1))};
    }
    if (info.siti_pair) info.regimes.push_back(Regime::SITI3);
  }
  if (info.regimes.empty()) info.regimes.push_back(Regime::General);
  return info;
}

SigmaMatrix::SigmaMatrix(Eigen::MatrixXd e) : entries(std::move(e)) {
  RegimeInfo info = classify_regime(entries);
  regimes = std::move(info.regimes);
  q = info.q;
  alpha = std::move(info.alpha);
  siti_pair = info.siti_pair;
}

double SigmaMatrix::min_offdiag() const {
  double v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m(); ++i)
    for (int j = 0; j < m(); ++j)
      if (i != j) v = std::min(v, entries(i, j));
  return v;
}

double SigmaMatrix::max_offdiag() const { return entries.maxCoeff(); }

bool SigmaMatrix::has(Regime r) const { return std::find(regimes.begin(), regimes.end(), r) != regimes.end(); }

SigmaMatrix sigma3(double s12, double s13, double s23) {
  Eigen::MatrixXd e(3, 3);
  e << 0, s12, s13, s12, 0, s23, s13, s23, 0;
  return SigmaMatrix(e);
}

SigmaMatrix sigma_from_wells(const Wells& w) {
  const int m = static_cast<int>(w.m());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) e(i, j) = e(j, i) = (w.points[i] - w.points[j]).squaredNorm();
  return SigmaMatrix(e);
}

Embedding embed_sigma(const SigmaMatrix& sigma) {
  const int m = sigma.m();
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
  Eigen::MatrixXd G = -0.5 * J * sigma.entries * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  Embedding out;
  out.eigenvalues = es.eigenvalues();
  const double tr = std::max(G.trace(), 0.0);
  if (out.eigenvalues[0] < -1e-9 * tr) return out;
  out.embeddable = true;

  std::vector<int> keep;
  for (int k = m - 1; k >= 0; --k)
    if (out.eigenvalues[k] > 1e-9 * tr) keep.push_back(k);
  const int d = std::max<int>(1, static_cast<int>(keep.size()));
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, d);
  for (std::size_t c = 0; c < keep.size(); ++c)
    X.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(out.eigenvalues[keep[c]]);
  // Canonical placement: first point at the origin, then fix the sign of each axis.
  X.rowwise() -= X.row(0).eval();
  for (int c = 0; c < d; ++c) {
    for (int i = 1; i < m; ++i) {
      if (std::abs(X(i, c)) > 1e-9 * std::sqrt(tr)) {
        if (X(i, c) < 0) X.col(c) *= -1.0;
        break;
      }
    }
  }
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < m; ++i) pts.push_back(X.row(i).transpose());
  out.points = Wells(std::move(pts));
  return out;
}

}  // namespace fpl
