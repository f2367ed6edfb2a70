#include "fpl/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

namespace {

// Visits every unordered pair i < j with at least one cell in omega; the
// visitor gets (i, j, w_ij). Rows are visited in increasing i.
template <class RowBegin, class Visit, class RowEnd>
void for_each_pair(const KernelTable& kt, const Mask& omega, RowBegin&& begin, Visit&& visit, RowEnd&& end) {
  const Lattice& L = kt.lattice();
  const int mx = L.mx(), my = L.my();
  const double sc = kt.scale();
  const auto& uw = kt.unit_weights();
  for (std::size_t i = 0; i < L.size(); ++i) {
    const int ix = L.ix(i), iy = L.iy(i);
    const bool in_i = omega[i] != 0;
    begin(i);
    for (int jy = iy; jy < my; ++jy) {
      const std::size_t rowoff = static_cast<std::size_t>(mx) * (jy - iy);
      const int jx0 = jy == iy ? ix + 1 : 0;
      const std::size_t base = static_cast<std::size_t>(jy) * mx;
      for (int jx = jx0; jx < mx; ++jx) {
        const std::size_t j = base + jx;
        if (!in_i && !omega[j]) continue;
        const int dx = jx > ix ? jx - ix : ix - jx;
        visit(i, j, sc * uw[dx + rowoff]);
      }
    }
    end(i);
  }
}

double cell_h2n(const Lattice& L) { return L.cell_measure() * L.cell_measure(); }

void check_mask(const Mask& m, const Lattice& L, const char* what) {
  if (m.size() != L.size()) throw DomainError(std::string(what) + ": mask size does not match lattice");
}

}  // namespace

FarValues far_values_from_wells(const Wells& wells, int classes) {
  require(classes <= static_cast<int>(wells.m()), "far values: more classes than wells");
  FarValues out;
  for (int q = 0; q < classes; ++q) out.push_back(wells.points[q]);
  return out;
}

std::vector<std::string> EnergyReport::csv_keys() const {
  std::vector<std::string> k{"dirichlet", "potential"};
  const int m = static_cast<int>(in_in.rows());
  for (const char* part : {"in_in", "in_out", "out_in"})
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) k.push_back("pair_" + std::to_string(a + 1) + "_" + std::to_string(b + 1) + "_" + part);
  k.push_back("total");
  return k;
}

std::vector<double> EnergyReport::csv_values() const {
  std::vector<double> v{dirichlet, potential};
  const int m = static_cast<int>(in_in.rows());
  for (const Eigen::MatrixXd* M : {&in_in, &in_out, &out_in})
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) v.push_back((*M)(a, b));
  v.push_back(total);
  return v;
}

void write_energy_csv(const std::string& path, const EnergyReport& r) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  const auto k = r.csv_keys();
  const auto v = r.csv_values();
  f << "key,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < k.size(); ++i) f << k[i] << ',' << v[i] << '\n';
}

double interaction(const Mask& A, const Mask& B, const KernelTable& kt, const std::vector<bool>& far_B) {
  const Lattice& L = kt.lattice();
  check_mask(A, L, "interaction");
  check_mask(B, L, "interaction");
  Mask either(L.size(), 0);
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (A[i] && B[i]) throw DomainError("interaction: masks overlap");
    either[i] = (A[i] || B[i]) ? 1 : 0;
  }
  CompensatedSum total;
  double row = 0.0;
  for_each_pair(
      kt, either, [&](std::size_t) { row = 0.0; },
      [&](std::size_t i, std::size_t j, double w) {
        if ((A[i] && B[j]) || (B[i] && A[j])) row += w;
      },
      [&](std::size_t) { total += row; });
  double pairs = total.value() * cell_h2n(L);
  CompensatedSum tails;
  if (!far_B.empty()) {
    require(static_cast<int>(far_B.size()) == kt.classes(), "interaction: far flags do not match classes");
    for (std::size_t i = 0; i < L.size(); ++i)
      if (A[i])
        for (int q = 0; q < kt.classes(); ++q)
          if (far_B[q]) tails += kt.tail(i, q);
  }
  return pairs + tails.value() * L.cell_measure();
}

double frac_perimeter(const Mask& E, const Mask& omega, const KernelTable& kt, const std::vector<bool>& far_in_E) {
  const Lattice& L = kt.lattice();
  check_mask(E, L, "frac_perimeter");
  check_mask(omega, L, "frac_perimeter");
  std::vector<bool> far = far_in_E;
  if (far.empty()) far.assign(kt.classes(), false);
  require(static_cast<int>(far.size()) == kt.classes(), "frac_perimeter: far flags do not match classes");
  CompensatedSum total;
  double row = 0.0;
  for_each_pair(
      kt, omega, [&](std::size_t) { row = 0.0; },
      [&](std::size_t i, std::size_t j, double w) {
        if ((E[i] != 0) != (E[j] != 0)) row += w;
      },
      [&](std::size_t) { total += row; });
  CompensatedSum tails;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!omega[i]) continue;
    for (int q = 0; q < kt.classes(); ++q)
      if ((E[i] != 0) != far[q]) tails += kt.tail(i, q);
  }
  return total.value() * cell_h2n(L) + tails.value() * L.cell_measure();
}

EnergyReport partition_energy(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma,
                              const KernelTable& kt) {
  const Lattice& L = kt.lattice();
  labels.validate();
  check_mask(omega, L, "partition_energy");
  const int m = labels.m;
  require(sigma.m() == m, "partition_energy: sigma size does not match labels");
  require(kt.classes() <= m, "partition_energy: far classes exceed phases");

  std::vector<CompensatedSum> ii(m * m), io(m * m);
  std::vector<double> acc_in(m), acc_out(m);
  const auto& lab = labels.labels;
  for_each_pair(
      kt, omega,
      [&](std::size_t) {
        std::fill(acc_in.begin(), acc_in.end(), 0.0);
        std::fill(acc_out.begin(), acc_out.end(), 0.0);
      },
      [&](std::size_t, std::size_t j, double w) { (omega[j] ? acc_in : acc_out)[lab[j]] += w; },
      [&](std::size_t i) {
        const int a = lab[i];
        for (int b = 0; b < m; ++b) {
          if (omega[i]) {
            if (acc_in[b] != 0.0) ii[a * m + b] += acc_in[b];
            if (acc_out[b] != 0.0) io[a * m + b] += acc_out[b];
          } else if (acc_in[b] != 0.0) {
            io[b * m + a] += acc_in[b];
          }
        }
      });
  const double h2n = cell_h2n(L), hn = L.cell_measure();
  EnergyReport r;
  r.in_in = Eigen::MatrixXd::Zero(m, m);
  r.in_out = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(m, m);
  std::vector<CompensatedSum> ts(m * m);
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!omega[i]) continue;
    for (int q = 0; q < kt.classes(); ++q) ts[lab[i] * m + q] += kt.tail(i, q);
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      r.in_in(a, b) = ii[a * m + b].value() * h2n;
      r.in_out(a, b) = io[a * m + b].value() * h2n + ts[a * m + b].value() * hn;
    }
  r.in_in = (r.in_in + r.in_in.transpose()).eval();
  r.out_in = r.in_out.transpose();
  CompensatedSum e;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) e += 0.5 * sigma(a, b) * (r.in_in(a, b) + r.in_out(a, b) + r.out_in(a, b));
  r.dirichlet = e.value();
  r.potential = 0.0;
  r.total = r.dirichlet;
  return r;
}

double dirichlet_energy(const VectorField& u, const Mask& omega, const KernelTable& kt, const FarValues& far) {
  const Lattice& L = kt.lattice();
  check_mask(omega, L, "dirichlet_energy");
  require(u.lattice.get() == &L || u.cells() == L.size(), "dirichlet_energy: field is on another lattice");
  require(static_cast<int>(far.size()) == kt.classes(), "dirichlet_energy: far values do not match classes");
  const int d = u.d;
  for (const auto& g : far) require(g.size() == d, "dirichlet_energy: far value dimension mismatch");
  CompensatedSum total;
  double row = 0.0;
  for_each_pair(
      kt, omega, [&](std::size_t) { row = 0.0; },
      [&](std::size_t i, std::size_t j, double w) {
        const double* a = u.at(i);
        const double* b = u.at(j);
        double s2 = 0.0;
        for (int k = 0; k < d; ++k) s2 += (a[k] - b[k]) * (a[k] - b[k]);
        row += s2 * w;
      },
      [&](std::size_t) { total += row; });
  CompensatedSum tails;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!omega[i]) continue;
    const double* a = u.at(i);
    for (int q = 0; q < kt.classes(); ++q) {
      double s2 = 0.0;
      for (int k = 0; k < d; ++k) s2 += (a[k] - far[q][k]) * (a[k] - far[q][k]);
      tails += s2 * kt.tail(i, q);
    }
  }
  const double gam = gamma_ns({L.n(), kt.s()});
  return 0.5 * gam * (total.value() * cell_h2n(L) + tails.value() * L.cell_measure());
}

EnergyReport ac_energy(const VectorField& u, double eps, const Potential& W, const Mask& omega,
                       const KernelTable& kt, const FarValues& far) {
  require(std::isfinite(eps) && eps > 0.0, "ac_energy: eps must be positive");
  require(W.dim() == u.d, "ac_energy: potential dimension mismatch");
  EnergyReport r;
  r.dirichlet = dirichlet_energy(u, omega, kt, far);
  CompensatedSum pot;
  for (std::size_t i = 0; i < u.cells(); ++i)
    if (omega[i]) pot += W.value(u.cell(i));
  r.potential = std::pow(eps, -2.0 * kt.s()) * kt.lattice().cell_measure() * pot.value();
  r.total = r.dirichlet + r.potential;
  return r;
}

EnergyReport ac_energy(const VectorField& u, double eps, const Wells& wells, const Mask& omega,
                       const KernelTable& kt, const FarValues& far) {
  return ac_energy(u, eps, ProductPotential(wells), omega, kt, far);
}

VectorField frac_laplacian(const VectorField& u, const KernelTable& kt, const FarValues& far) {
  const Lattice& L = kt.lattice();
  require(u.cells() == L.size(), "frac_laplacian: field is on another lattice");
  require(static_cast<int>(far.size()) == kt.classes(), "frac_laplacian: far values do not match classes");
  const int d = u.d;
  const double gam = gamma_ns({L.n(), kt.s()});
  const double hn = L.cell_measure();
  VectorField out(u.lattice, d);
  std::vector<double> acc(d);
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!L.interior(i)) continue;
    std::fill(acc.begin(), acc.end(), 0.0);
    const double* a = u.at(i);
    for (std::size_t j = 0; j < L.size(); ++j) {
      if (j == i) continue;
      const double w = kt.w_between(i, j);
      const double* b = u.at(j);
      for (int k = 0; k < d; ++k) acc[k] += w * (a[k] - b[k]);
    }
    for (int k = 0; k < d; ++k) {
      double t = acc[k] * hn;
      for (int q = 0; q < kt.classes(); ++q) t += kt.tail(i, q) * (a[k] - far[q][k]);
      out.at(i)[k] = gam * t;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Covariograms

double DiscCovariogram::measure() const { return std::numbers::pi * R_ * R_; }

double DiscCovariogram::operator()(double zx, double zy) const {
  const double r = std::hypot(zx, zy);
  if (r >= 2.0 * R_) return 0.0;
  return 2.0 * R_ * R_ * std::acos(r / (2.0 * R_)) - 0.5 * r * std::sqrt(4.0 * R_ * R_ - r * r);
}

double RectCovariogram::operator()(double zx, double zy) const {
  return std::max(0.0, a_ - std::abs(zx)) * std::max(0.0, b_ - std::abs(zy));
}

std::vector<double> RectCovariogram::kinks(double theta) const {
  std::vector<double> k;
  const double c = std::abs(std::cos(theta)), s = std::abs(std::sin(theta));
  if (c > 1e-15) k.push_back(a_ / c);
  if (s > 1e-15) k.push_back(b_ / s);
  return k;
}

std::vector<double> RectCovariogram::angle_breaks() const {
  const double t = std::atan2(b_, a_);
  return {0.0, t, 0.5 * std::numbers::pi, std::numbers::pi - t, std::numbers::pi};
}

MaskCovariogram::MaskCovariogram(const Lattice& lat, const Mask& E) : n_(lat.n()), h_(lat.h()) {
  require(E.size() == lat.size(), "covariogram: mask size does not match lattice");
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < E.size(); ++i)
    if (E[i]) cells.push_back(i);
  require(!cells.empty(), "covariogram: empty set");
  int x0 = lat.mx(), x1 = -1, y0 = lat.my(), y1 = -1;
  for (auto i : cells) {
    x0 = std::min(x0, lat.ix(i));
    x1 = std::max(x1, lat.ix(i));
    y0 = std::min(y0, lat.iy(i));
    y1 = std::max(y1, lat.iy(i));
  }
  rx_ = x1 - x0 + 1;
  ry_ = n_ == 2 ? y1 - y0 + 1 : 0;
  const int wx = 2 * rx_ + 1, wy = 2 * ry_ + 1;
  table_.assign(static_cast<std::size_t>(wx) * wy, 0.0);
  const double hn = lat.cell_measure();
  for (auto i : cells)
    for (auto j : cells) {
      const int dx = lat.ix(j) - lat.ix(i) + rx_, dy = lat.iy(j) - lat.iy(i) + ry_;
      table_[dx + static_cast<std::size_t>(wx) * dy] += hn;
    }
  measure_ = hn * static_cast<double>(cells.size());
  double dmax = 0.0;
  for (auto i : cells)
    for (auto j : cells) {
      const double dx = std::abs(lat.ix(j) - lat.ix(i)) + 1.0, dy = n_ == 2 ? std::abs(lat.iy(j) - lat.iy(i)) + 1.0 : 0.0;
      dmax = std::max(dmax, std::hypot(dx, dy));
    }
  diameter_ = dmax * h_;
}

double MaskCovariogram::operator()(double zx, double zy) const {
  const double fx = zx / h_, fy = n_ == 2 ? zy / h_ : 0.0;
  const int wx = 2 * rx_ + 1;
  auto at = [&](int ox, int oy) {
    if (std::abs(ox) > rx_ || std::abs(oy) > ry_) return 0.0;
    return table_[(ox + rx_) + static_cast<std::size_t>(wx) * (oy + ry_)];
  };
  const int ox = static_cast<int>(std::floor(fx)), oy = static_cast<int>(std::floor(fy));
  const double tx = fx - ox, ty = fy - oy;
  if (n_ == 1) return (1.0 - tx) * at(ox, 0) + tx * at(ox + 1, 0);
  return (1.0 - tx) * (1.0 - ty) * at(ox, oy) + tx * (1.0 - ty) * at(ox + 1, oy) + (1.0 - tx) * ty * at(ox, oy + 1) +
         tx * ty * at(ox + 1, oy + 1);
}

std::vector<double> MaskCovariogram::kinks(double theta) const {
  // The interpolant is smooth between crossings of the lattice lines.
  std::vector<double> k;
  const double c = std::abs(std::cos(theta)), sn = std::abs(std::sin(theta));
  for (int j = 1; c > 1e-15 && j * h_ < diameter_ * c; ++j) k.push_back(j * h_ / c);
  for (int j = 1; n_ == 2 && sn > 1e-15 && j * h_ < diameter_ * sn; ++j) k.push_back(j * h_ / sn);
  return k;
}

std::vector<double> MaskCovariogram::angle_breaks() const {
  if (n_ == 1) return {};
  std::vector<double> b;
  for (int oy = 0; oy <= 6; ++oy)
    for (int ox = -6; ox <= 6; ++ox)
      if (std::gcd(ox, oy) == 1 && (oy > 0 || ox > 0)) b.push_back(std::atan2(oy, ox));
  return b;
}

namespace {

// int_0^inf (|E| - g(r e_theta)) r^{-1-2s} dr
double radial_integral(const Covariogram& g, double theta, double s) {
  const double E = g.measure();
  const double D = g.diameter();
  const double c = std::cos(theta), sn = std::sin(theta);
  auto f = [&](double r) { return E - g(r * c, r * sn); };
  std::vector<double> cuts{0.0};
  for (double k : g.kinks(theta))
    if (k > 0.0 && k < D) cuts.push_back(k);
  cuts.push_back(D);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  const GaussRule& gr = gauss_legendre(40);
  const double e = 1.0 - 2.0 * s;
  const double r0 = 1e-6 * D;
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    double a = cuts[p];
    const double b = cuts[p + 1];
    if (p == 0) {
      // r = t^{1/(1-2s)} on [0, b/16]: the integrand becomes (|E| - g)/r / (1-2s).
      const double m0 = b / 16.0;
      const double tmax = std::pow(m0, e);
      for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
        const double t = 0.5 * tmax * (gr.nodes[q] + 1.0);
        // Below r0 the difference |E| - g cancels; use its slope at r0.
        const double r = std::max(std::pow(t, 1.0 / e), r0);
        acc += 0.5 * tmax * gr.weights[q] * f(r) / r / e;
      }
      const double m = 0.5 * b;
      acc += integrate([&](double r) { return f(r) * std::pow(r, -1.0 - 2.0 * s); }, m0, m, 40);
      a = m;
    }
    // Nodes clustered quadratically toward the right end.
    for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
      const double tau = 0.5 * (gr.nodes[q] + 1.0);
      const double r = a + (b - a) * (1.0 - (1.0 - tau) * (1.0 - tau));
      const double jac = 2.0 * (b - a) * (1.0 - tau);
      acc += 0.5 * gr.weights[q] * jac * f(r) * std::pow(r, -1.0 - 2.0 * s);
    }
  }
  return acc + E * std::pow(D, -2.0 * s) / (2.0 * s);
}

}  // namespace

double perimeter_by_covariogram(const Covariogram& g, double s) {
  require(s > 0.0 && s < 0.5, "perimeter: s must lie in (0, 1/2)");
  if (g.dim() == 1) return radial_integral(g, 0.0, s) + radial_integral(g, std::numbers::pi, s);
  const int sym = std::max(1, g.symmetry());
  const double period = 2.0 * std::numbers::pi / sym;
  std::vector<double> br{0.0, period};
  for (double a : g.angle_breaks())
    if (a > 0.0 && a < period) br.push_back(a);
  std::sort(br.begin(), br.end());
  const GaussRule& gr = gauss_legendre(32);
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    const double a = br[p], b = br[p + 1];
    if (b - a < 1e-15) continue;
    for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
      const double th = 0.5 * (a + b) + 0.5 * (b - a) * gr.nodes[q];
      acc += 0.5 * (b - a) * gr.weights[q] * radial_integral(g, th, s);
    }
  }
  return acc * sym;
}

double unit_ball_perimeter(int n, double s) {
  require(n == 1 || n == 2, "unit_ball_perimeter: n must be 1 or 2");
  require(s > 0.0 && s < 0.5, "unit_ball_perimeter: s must lie in (0, 1/2)");
  if (n == 1) return std::pow(2.0, 2.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s));
  return perimeter_by_covariogram(DiscCovariogram(1.0), s);
}

}  // namespace fpl
