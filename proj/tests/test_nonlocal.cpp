#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fpl/curvature.hpp"
#include "fpl/error.hpp"
#include "fpl/extension.hpp"
#include "fpl/nonlocal.hpp"
#include "fpl/periodic.hpp"
#include "fpl/specconst.hpp"

using namespace fpl;

namespace {

Mask interval_mask(const Lattice& lat, double a, double b) {
  Mask m(lat.size(), 0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = lat.center(i)[0];
    m[i] = x > a && x < b;
  }
  return m;
}

Mask complement(const Mask& m) {
  Mask c(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) c[i] = !m[i];
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

LabelField random_labels(const LatticePtr& lat, const Pattern& far, int m, std::mt19937_64& rng) {
  LabelField L = pattern_labels(lat, far, m);
  for (std::size_t i = 0; i < L.cells(); ++i)
    if (lat->interior(i)) L.labels[i] = static_cast<std::uint16_t>(rng() % m);
  return L;
}

}  // namespace

TEST_CASE("interaction of two unit intervals") {
  auto lat = build_lattice(1, 1.0 / 512, Box::interval(-1, 4), 2.0 / 512);
  const KernelTable kt = build_kernel(lat, 0.25);
  const Mask A = interval_mask(*lat, 0, 1), B = interval_mask(*lat, 2, 3);
  const double exact = 4 * (2 * std::sqrt(2.0) - 1 - std::sqrt(3.0));
  const double I = interaction(A, B, kt);
  CHECK(std::abs(I - exact) < 1e-3);
  CHECK(I == interaction(B, A, kt));
  CHECK(interaction(Mask(lat->size(), 0), B, kt) == 0.0);
  CHECK_THROWS_AS(interaction(A, interval_mask(*lat, 0.5, 2), kt), DomainError);
  // monotone under disjoint enlargement
  const Mask A2 = interval_mask(*lat, -0.5, 1);
  CHECK(interaction(A2, B, kt) > I);
}

TEST_CASE("fractional perimeter of an interval") {
  auto lat = build_lattice(1, 1.0 / 512, Box::interval(-1, 1), 1.0);
  const KernelTable kt = build_kernel(lat, 0.25);
  const Mask E = lat->interior_mask();
  const Mask all = all_cells(*lat);
  const double P = frac_perimeter(E, all, kt);
  CHECK(rel(P, 8 * std::sqrt(2.0)) < 5e-3);
  CHECK(frac_perimeter(Mask(lat->size(), 0), all, kt) == 0.0);
  // complement symmetry on the global window (the far field belongs to the complement)
  CHECK(rel(frac_perimeter(complement(E), all, kt, {true}), P) < 1e-12);
  // window restricted to the box: same three-term sum
  CHECK(rel(frac_perimeter(E, E, kt), P) < 1e-12);
}

TEST_CASE("scaling law on exactly rescaled lattices") {
  const double s = 0.3;
  for (int n : {1, 2}) {
    double base = 0.0;
    for (double lam : {1.0, 2.0, 4.0}) {
      const double h = lam / 32;
      auto lat = n == 1 ? build_lattice(1, h, Box::interval(-lam, lam), 0.5 * lam)
                        : build_lattice(2, h, Box::rect(-lam, lam, -lam, lam), 0.5 * lam);
      const KernelTable kt = build_kernel(lat, s);
      Mask E(lat->size(), 0), omega(lat->size(), 0);
      for (std::size_t i = 0; i < lat->size(); ++i) {
        const auto c = lat->center(i);
        const double x = c[0] / lam, y = c[1] / lam;
        E[i] = n == 1 ? (x > -0.6 && x < 0.3) : (x * x + 2 * y * y < 0.4 && x > -0.55);
        omega[i] = n == 1 ? (x > -0.8 && x < 0.8) : (std::abs(x) < 0.75 && std::abs(y) < 0.8);
      }
      const double P = frac_perimeter(E, omega, kt);
      if (lam == 1.0) {
        base = P;
      } else {
        CHECK(rel(P, std::pow(lam, n - 2 * s) * base) < 1e-10);
      }
    }
  }
}

TEST_CASE("partition energy") {
  const double s = 0.25;
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.5);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const KernelTable kt(lat, s, far);
  std::mt19937_64 rng(12);
  Eigen::MatrixXd e(2, 2);
  e << 0, 3.5, 3.5, 0;
  const SigmaMatrix s2(e);
  const Mask& omega = lat->interior_mask();
  for (int k = 0; k < 10; ++k) {
    const LabelField L = random_labels(lat, far, 2, rng);
    const EnergyReport r = partition_energy(L, omega, s2, kt);
    CHECK(rel(r.total, 3.5 * frac_perimeter(mask_of_label(L, 0), omega, kt, {true, false})) < 1e-12);
    CHECK(rel(r.total, 3.5 * frac_perimeter(mask_of_label(L, 1), omega, kt, {false, true})) < 1e-12);
    CHECK(r.in_in(0, 1) == doctest::Approx(r.in_in(1, 0)).epsilon(1e-14));
  }

  const KernelTable kc(lat, s, Pattern::constant(0, 1));
  const LabelField one(lat, 2, 0);
  CHECK(partition_energy(one, all_cells(*lat), s2, kc).total == 0.0);

  LabelField bad(lat, 2, 0);
  bad.labels[5] = 7;
  CHECK_THROWS_AS(partition_energy(bad, omega, s2, kc), DomainError);
}

TEST_CASE("partition energy is bracketed by sigma_min and sigma_max") {
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.25);
  const Pattern far = Pattern::sectors(3, 0, 0, 0.3);
  const KernelTable kt(lat, 0.2, far);
  const SigmaMatrix sg = sigma3(2.0, 1.5, 1.2);
  std::mt19937_64 rng(21);
  const Mask& omega = lat->interior_mask();
  for (int k = 0; k < 5; ++k) {
    const LabelField L = random_labels(lat, far, 3, rng);
    double sumP = 0.0;
    for (int j = 0; j < 3; ++j) {
      std::vector<bool> flag(3, false);
      flag[j] = true;
      sumP += frac_perimeter(mask_of_label(L, j), omega, kt, flag);
    }
    const double E = partition_energy(L, omega, sg, kt).total;
    CHECK(E >= 0.5 * sg.min_offdiag() * sumP * (1 - 1e-12));
    CHECK(E <= 0.5 * sg.max_offdiag() * sumP * (1 + 1e-12));
  }
}

TEST_CASE("Dirichlet energy of a label embedding equals gamma/2 times the partition energy") {
  const double s = 0.35;
  auto lat = build_lattice(2, 1.0 / 12, Box::rect(-1, 1, -1, 1), 0.25);
  const Pattern far = Pattern::sectors(3, 0.1, 0, 0.0);
  const KernelTable kt(lat, s, far);
  const Wells w({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0.5), Eigen::Vector2d(-0.3, 2)});
  const SigmaMatrix sg = sigma_from_wells(w);
  const FarValues fv = far_values_from_wells(w, 3);
  const double g = gamma_ns({2, s});
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const LabelField L = random_labels(lat, far, 3, rng);
    const double D = dirichlet_energy(embed_labels(L, w), lat->interior_mask(), kt, fv);
    CHECK(rel(D, 0.5 * g * partition_energy(L, lat->interior_mask(), sg, kt).total) < 1e-10);
  }
}

TEST_CASE("Dirichlet and Allen-Cahn energies") {
  const double s = 0.25;
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.5);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const KernelTable kt(lat, s, far);
  const Wells w = wells_1d({-1, 1});
  const FarValues fv = far_values_from_wells(w, 2);
  const Mask& omega = lat->interior_mask();

  Eigen::VectorXd c(1);
  c << 0.7;
  CHECK(dirichlet_energy(constant_field(lat, c), omega, kt, {c, c}) == doctest::Approx(0.0).epsilon(1e-14));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  VectorField u(lat, 1);
  for (double& v : u.values) v = U(rng);
  VectorField v = u;
  for (double& x : v.values) x += 0.4;
  Eigen::VectorXd f0(1), f1(1);
  f0 << -0.6;
  f1 << 1.4;
  CHECK(rel(dirichlet_energy(v, omega, kt, {f0, f1}), dirichlet_energy(u, omega, kt, fv)) < 1e-12);

  // a well everywhere (collar included) costs nothing
  Eigen::VectorXd a1(1);
  a1 << -1.0;
  const KernelTable k1(lat, s, Pattern::constant(0, 1));
  const EnergyReport zero = ac_energy(constant_field(lat, a1), 0.1, w, omega, k1, {a1});
  CHECK(zero.total == 0.0);

  const EnergyReport e1 = ac_energy(u, 0.1, w, omega, kt, fv);
  const EnergyReport e2 = ac_energy(u, 0.05, w, omega, kt, fv);
  CHECK(rel(e2.potential, std::pow(2.0, 2 * s) * e1.potential) < 1e-12);
  CHECK(e1.dirichlet == e2.dirichlet);
  CHECK(e1.total == doctest::Approx(e1.dirichlet + e1.potential).epsilon(1e-14));
  CHECK_THROWS_AS(ac_energy(u, 0.0, w, omega, kt, fv), DomainError);

  const EnergyReport sharp = ac_energy(embed_labels(pattern_labels(lat, far, 2), w), 0.1, w, omega, kt, fv);
  CHECK(sharp.potential == 0.0);
  CHECK(sharp.dirichlet > 0.0);
}

TEST_CASE("fractional Laplacian is the gradient of the Dirichlet energy") {
  for (int n : {1, 2}) {
    const double s = 0.3;
    auto lat = n == 1 ? build_lattice(1, 1.0 / 32, Box::interval(-1, 1), 0.25)
                      : build_lattice(2, 1.0 / 8, Box::rect(-1, 1, -1, 1), 0.25);
    const Pattern far = n == 1 ? Pattern::step(0.0, 0, 1, 2) : Pattern::sectors(2, 0, 0, 0.2);
    const KernelTable kt(lat, s, far);
    Eigen::VectorXd a(2), b(2);
    a << -1, 0.5;
    b << 0.3, 1;
    const FarValues fv{a, b};
    std::mt19937_64 rng(n);
    std::normal_distribution<double> N;
    const Mask& omega = lat->interior_mask();
    VectorField u = constant_field(lat, a);
    for (std::size_t i = 0; i < u.cells(); ++i) {
      const int q = far(lat->center(i)[0], lat->center(i)[1]);
      for (int k = 0; k < 2; ++k) u.at(i)[k] = lat->interior(i) ? N(rng) : fv[q](k);
    }
    const VectorField L = frac_laplacian(u, kt, fv);
    for (int trial = 0; trial < 10; ++trial) {
      VectorField phi(lat, 2);
      for (std::size_t i = 0; i < phi.cells(); ++i)
        for (int k = 0; k < 2; ++k) phi.at(i)[k] = lat->interior(i) ? N(rng) : 0.0;
      double pair = 0.0;
      for (std::size_t i = 0; i < phi.values.size(); ++i) pair += L.values[i] * phi.values[i];
      pair *= lat->cell_measure();
      const double t = 1e-4;
      VectorField up = u, um = u;
      for (std::size_t i = 0; i < u.values.size(); ++i) {
        up.values[i] += t * phi.values[i];
        um.values[i] -= t * phi.values[i];
      }
      const double fd = (dirichlet_energy(up, omega, kt, fv) - dirichlet_energy(um, omega, kt, fv)) / (2 * t);
      CHECK(std::abs(fd - pair) <= 1e-6 * std::max(1.0, std::abs(pair)));
    }
    Eigen::VectorXd c(2);
    c << 0.2, -0.1;
    const VectorField Lc = frac_laplacian(constant_field(lat, c), kt, {c, c});
    for (double v : Lc.values) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("periodic fractional Laplacian") {
  const double s = 0.3;
  for (int n : {1, 2}) {
    const Torus T{n, 32, 1.0};
    std::vector<double> u(T.size());
    const int kx = 3, ky = n == 2 ? 2 : 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = (static_cast<double>(i % T.N) + 0.5) * T.h();
      const double y = (static_cast<double>(i / T.N) + 0.5) * T.h();
      u[i] = std::cos(2 * std::numbers::pi * (kx * x + ky * y));
    }
    const std::vector<double> Lu = torus_frac_laplacian(T, u, s, TorusMethod::Spectral);
    const double lam = std::pow(2 * std::numbers::pi * std::hypot(kx, ky), 2 * s);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(Lu[i] - lam * u[i]) < 1e-10 * lam);
  }

  // quadrature path converges to the spectral one
  std::vector<double> err;
  for (int N : {32, 64, 128, 256}) {
    const Torus T{1, N, 1.0};
    std::vector<double> u(T.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = (static_cast<double>(i) + 0.5) * T.h();
      u[i] = std::exp(std::sin(2 * std::numbers::pi * x));
    }
    const auto a = torus_frac_laplacian(T, u, s, TorusMethod::Spectral);
    const auto b = torus_frac_laplacian(T, u, s, TorusMethod::Quadrature);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += a[i] * a[i];
    }
    err.push_back(std::sqrt(num / den));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    CHECK(err[k] < err[k - 1]);
    CHECK(std::log2(err[k - 1] / err[k]) >= 1.0);
  }
}

TEST_CASE("nonlocal mean curvature") {
  const double s = 0.25;
  CHECK(std::abs(nonlocal_mean_curvature(HalfPlane(0, 0, 0, 1), 0.3, 0.0, s)) < 1e-6);
  CHECK(std::abs(nonlocal_mean_curvature(HalfPlane(0.2, -0.1, 0.6, 0.8), 0.2 + 0.8, -0.1 - 0.6, s)) < 1e-6);
  CHECK(std::abs(nonlocal_mean_curvature(Intervals({{-1.0, 1.0}}), 1.0, 0.0, s) - 2 * std::sqrt(2.0)) < 1e-3);
  CHECK(std::abs(nonlocal_mean_curvature_1d({-1.0, 1.0}, -1.0, s) - 2 * std::sqrt(2.0)) < 1e-3);

  // disc: 2^{-2s} B(1/2, 1/2 - s) / s on the unit circle
  const Disc D(0, 0, 1);
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < 12; ++k) {
    const double t = 0.37 + k * 2 * std::numbers::pi / 12;
    const double H = nonlocal_mean_curvature(D, std::cos(t), std::sin(t), s);
    lo = std::min(lo, H);
    hi = std::max(hi, H);
  }
  CHECK(lo > 0.0);
  CHECK(hi - lo <= 1e-3);
  CHECK(std::abs(lo - 14.832597418411) < 1e-3);

  CHECK_THROWS_AS(nonlocal_mean_curvature(D, 0.5, 0.0, s), DomainError);
}

TEST_CASE("curvature of a lattice square matches the polygon") {
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.25);
  Mask E(lat->size(), 0);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto c = lat->center(i);
    E[i] = std::abs(c[0]) < 0.5 && std::abs(c[1]) < 0.5;
  }
  const MaskShape S(lat, E);
  const Polygon P({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
  const double hp = nonlocal_mean_curvature(P, 0.5, 0.0, 0.25);
  CHECK(hp > 0.0);
  // snapping moves a nearby point onto the face midpoint (0.5, h/2)
  CHECK(rel(nonlocal_mean_curvature(S, 0.49, 0.01, 0.25), nonlocal_mean_curvature(P, 0.5, 1.0 / 32, 0.25)) < 1e-6);
  CHECK_THROWS_AS(S.snap(0.0, 0.0), DomainError);
}

TEST_CASE("curvature right-hand side f_hk") {
  const double s = 0.25;
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.25);
  const KernelTable kt(lat, s, Pattern::halfplane(0, 0, 1, 0, 0, 1, 3));
  LabelField L = pattern_labels(lat, kt.far(), 3);
  CHECK(curvature_rhs_fhk(L, sigma3(1, 1, 1), 0, 1, 0.0, 0.0, kt) == 0.0);

  for (std::size_t i = 0; i < L.cells(); ++i) {
    const auto c = lat->center(i);
    if (std::hypot(c[0] - 0.1, c[1] - 0.4) < 0.2) L.labels[i] = 2;
  }
  const double hom = curvature_rhs_fhk(L, sigma3(1, 1, 1), 0, 1, 0.0, 0.0, kt);
  CHECK(hom > 0.0);
  // direct sum over the third-phase cells
  const std::size_t ix = static_cast<std::size_t>(lat->locate(0.0 + 1e-9, 0.0 + 1e-9));
  double direct = 0.0;
  for (std::size_t j = 0; j < L.cells(); ++j)
    if (L[j] == 2 && j != ix) direct += kt.w_between(ix, j) * lat->cell_measure();
  CHECK(rel(hom, direct) < 1e-12);

  // additive sigma: coefficient 2 alpha_k / sigma_hk
  const SigmaMatrix sti = sigma3(2, 1.5, 1.2);
  const double f = curvature_rhs_fhk(L, sti, 0, 1, 0.0, 0.0, kt);
  CHECK(rel(f, 2 * (*sti.alpha)[1] / 2.0 * hom) < 1e-12);
  CHECK_THROWS_AS(curvature_rhs_fhk(L, sti, 1, 1, 0.0, 0.0, kt), DomainError);
}

TEST_CASE("Poisson extension") {
  const double s = 0.25;
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.5);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const Wells w = wells_1d({-1, 1});
  const FarValues fv = far_values_from_wells(w, 2);
  const auto z = default_z_levels(lat->h(), 0.5);
  CHECK(z.front() == doctest::Approx(lat->h() / 4));
  CHECK(z.back() >= 1.0);

  Eigen::VectorXd c(1);
  c << 0.3;
  const ExtensionSlab flat = poisson_extend(constant_field(lat, c), s, z, far, {c, c});
  for (double v : flat.values) CHECK(std::abs(v - 0.3) < 1e-12);
  CHECK(density_theta(flat, 0.1, 0.0, 0.0, 0.25, nullptr) == doctest::Approx(0.0).epsilon(1e-20));
  const ProductPotential W(wells_1d({0.3, 2}));
  CHECK(std::abs(density_theta(flat, 0.1, 0.0, 0.0, 0.25, &W)) < 1e-20);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  VectorField u(lat, 1);
  for (double& v : u.values) v = U(rng);
  const ExtensionSlab slab = poisson_extend(u, s, z, far, fv);
  for (double v : slab.values) {
    CHECK(v >= -1.0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }

  const VectorField step = embed_labels(pattern_labels(lat, far, 2), w);
  const ExtensionSlab st = poisson_extend(step, s, z, far, fv);
  // u^e = -1 + 2 (Poisson mass beyond the interface)
  const std::size_t i = static_cast<std::size_t>(lat->locate(-0.5));
  const double d = -lat->center(i)[0];
  const double c1 = sigma_ns({1, s});
  boost::math::quadrature::exp_sinh<double> q;
  for (std::size_t k : {std::size_t{1}, std::size_t{8}}) {
    const double zk = st.z[k];
    const double tail =
        q.integrate([&](double t) { return c1 * std::pow(zk, 2 * s) / std::pow((d + t) * (d + t) + zk * zk, 0.5 + s); });
    CHECK(std::abs(st.at(k, i)[0] - (-1.0 + 2.0 * tail)) < 1e-3);
  }
  CHECK(st.at(0, i)[0] == -1.0);
}

TEST_CASE("extension energy approaches the nonlocal energy under refinement") {
  const double s = 0.25;
  std::vector<double> slack;
  for (double h : {1.0 / 32, 1.0 / 128}) {
    auto lat = build_lattice(1, h, Box::interval(-1, 1), 1.0);
    const KernelTable kt = build_kernel(lat, s);
    VectorField u(lat, 1);
    for (std::size_t i = 0; i < u.cells(); ++i) {
      const double x = lat->center(i)[0];
      u.values[i] = std::exp(-x * x / 0.05);
    }
    const FarValues far{Eigen::VectorXd::Zero(1)};
    const double D = dirichlet_energy(u, all_cells(*lat), kt, far);
    const ExtensionSlab slab = poisson_extend(u, s, default_z_levels(h, 4.0), kt.far(), far);
    const double E = extension_energy(slab, 0.0, 0.0, 2.0);
    slack.push_back(std::abs(E / D - 1.0));
  }
  CHECK(slack[1] < slack[0]);
  CHECK(slack[1] < 0.05);
}

TEST_CASE("density of 0-homogeneous two-phase data is scale invariant") {
  const double s = 0.25;
  const double h = 1.0 / 256;
  auto lat = build_lattice(1, h, Box::interval(-1, 1), 1.0);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const Wells w = wells_1d({-1, 1});
  const FarValues fv = far_values_from_wells(w, 2);
  const VectorField u = embed_labels(pattern_labels(lat, far, 2), w);
  const ExtensionSlab slab = poisson_extend(u, s, default_z_levels(h, 0.5), far, fv);
  const double t1 = density_theta(slab, std::nullopt, 0.0, 0.0, 0.25);
  const double t2 = density_theta(slab, std::nullopt, 0.0, 0.0, 0.5);
  CHECK(t1 > 0.0);
  CHECK(rel(t1, t2) < 0.02);
}

TEST_CASE("perimeters from covariograms") {
  CHECK(rel(perimeter_by_covariogram(DiscCovariogram(1.0), 0.25), 62.13063877777980) < 1e-8);
  CHECK(rel(unit_ball_perimeter(2, 0.1), 111.8001138750688) < 1e-8);
  CHECK(rel(unit_ball_perimeter(2, 0.45), 145.2498565587421) < 1e-8);
  CHECK(rel(unit_ball_perimeter(2, 0.48), 332.3916027212090) < 1e-8);
  CHECK(rel(perimeter_by_covariogram(RectCovariogram(1, 1), 0.25), 27.211908360256519) < 1e-8);
  CHECK(rel(perimeter_by_covariogram(IntervalCovariogram(2.0), 0.25), 8 * std::sqrt(2.0)) < 1e-10);
  CHECK(rel(unit_ball_perimeter(1, 0.25), 8 * std::sqrt(2.0)) < 1e-10);

  // a lattice square has an exactly bilinear covariogram
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(0, 1, 0, 1), 0.125);
  const MaskCovariogram mc(*lat, lat->interior_mask());
  CHECK(mc.measure() == doctest::Approx(1.0));
  CHECK(rel(perimeter_by_covariogram(mc, 0.25), 27.211908360256519) < 1e-6);

  // homogeneity: P(lambda E) = lambda^{n-2s} P(E)
  CHECK(rel(perimeter_by_covariogram(DiscCovariogram(2.0), 0.3),
            std::pow(2.0, 1.4) * perimeter_by_covariogram(DiscCovariogram(1.0), 0.3)) < 1e-8);
}
