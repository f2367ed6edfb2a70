#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fpl/acsolver.hpp"
#include "fpl/error.hpp"
#include "fpl/specconst.hpp"

using namespace fpl;

namespace {

struct Setup {
  LatticePtr lat;
  std::shared_ptr<const KernelTable> kt;
  Wells w;
  FarValues far;
};

Setup step_1d(double h, double s = 0.25, double collar = 0.5) {
  Setup S;
  S.lat = build_lattice(1, h, Box::interval(-1, 1), collar);
  S.kt = std::make_shared<const KernelTable>(S.lat, s, Pattern::step(0.0, 0, 1, 2));
  S.w = wells_1d({-1, 1});
  S.far = far_values_from_wells(S.w, 2);
  return S;
}

double sup_norm(const VectorField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    double n2 = 0.0;
    for (int k = 0; k < u.d; ++k) n2 += u.at(i)[k] * u.at(i)[k];
    m = std::max(m, std::sqrt(n2));
  }
  return m;
}

}  // namespace

TEST_CASE("a well is a fixed point") {
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.25);
  auto kt = std::make_shared<const KernelTable>(lat, 0.25, Pattern::constant(0, 1));
  const Wells w = wells_1d({-1, 1});
  Eigen::VectorXd a1(1);
  a1 << -1.0;
  const ACProblem pb = make_problem(kt, w, 0.1, {a1});
  // FFT round-off only
  CHECK(residual_norm(pb, constant_field(lat, a1)) < 1e-12);
  const ACSolution sol = solve_min(pb, Init::from(constant_field(lat, a1)));
  CHECK(sol.converged);
  CHECK(sol.residual < 1e-12);
  for (double v : sol.u.values) CHECK(v == -1.0);
}

TEST_CASE("descent from the sharp step") {
  const Setup S = step_1d(1.0 / 128);
  const ACProblem pb = make_problem(S.kt, S.w, 1.0 / 16, S.far);
  CHECK(pb.tol() == doctest::Approx(1e-8 * std::pow(16.0, 0.5)));
  const VectorField step = pattern_field(*S.kt, S.far);
  const double E0 = ac_energy(step, pb.eps, S.w, S.lat->interior_mask(), *S.kt, S.far).total;
  const ACSolution sol = solve_min(pb, Init::from(step));
  CHECK(sol.converged);
  CHECK(sol.monotone);
  CHECK(sol.energy.total <= E0);
  CHECK(sol.residual <= pb.tol());
  CHECK(residual_norm(pb, sol.u) == sol.residual);
  for (std::size_t k = 1; k < sol.trace.size(); ++k) CHECK(sol.trace[k].energy <= sol.trace[k - 1].energy);
  // collar pinned
  for (std::size_t i = 0; i < sol.u.cells(); ++i)
    if (!S.lat->interior(i)) CHECK(sol.u.values[i] == step.values[i]);
  // odd symmetry of the minimizer
  const std::size_t N = sol.u.cells();
  for (std::size_t i = 0; i < N; ++i) CHECK(std::abs(sol.u.values[i] + sol.u.values[N - 1 - i]) < 1e-6);

  // the maximum principle bound
  const PotentialConstants pc = estimate_constants(S.w);
  CHECK(sup_norm(sol.u) <= pc.sup_bound(1.0) + 1e-6);

  const std::string path = "/tmp/fpl_test_trace.csv";
  write_trace_csv(path, sol.trace);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "iter,energy,residual,step");
}

TEST_CASE("residual is the energy gradient over the cell measure") {
  for (int n : {1, 2}) {
    const double s = 0.3;
    auto lat = n == 1 ? build_lattice(1, 1.0 / 32, Box::interval(-1, 1), 0.25)
                      : build_lattice(2, 1.0 / 8, Box::rect(-1, 1, -1, 1), 0.25);
    const Pattern far = n == 1 ? Pattern::step(0.0, 0, 1, 2) : Pattern::halfplane(0, 0, 0.6, 0.8, 0, 1, 2);
    auto kt = std::make_shared<const KernelTable>(lat, s, far);
    const Wells w({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0.3)});
    const FarValues fv = far_values_from_wells(w, 2);
    const ACProblem pb = make_problem(kt, w, 0.2, fv);
    std::mt19937_64 rng(5 + n);
    std::uniform_real_distribution<double> U(-0.5, 1.5);
    VectorField u = pattern_field(*kt, fv);
    for (std::size_t i = 0; i < u.cells(); ++i)
      if (lat->interior(i))
        for (int k = 0; k < 2; ++k) u.at(i)[k] = U(rng);
    const VectorField R = residual(pb, u);
    const Mask& omega = lat->interior_mask();
    const double hn = lat->cell_measure();
    int checked = 0;
    for (std::size_t i = 0; i < u.cells() && checked < 20; ++i) {
      if (!lat->interior(i) || rng() % 3) continue;
      ++checked;
      for (int k = 0; k < 2; ++k) {
        const double t = 1e-5;
        VectorField up = u, um = u;
        up.at(i)[k] += t;
        um.at(i)[k] -= t;
        const double fd = (ac_energy(up, pb.eps, w, omega, *kt, fv).total - ac_energy(um, pb.eps, w, omega, *kt, fv).total) /
                          (2 * t * hn);
        CHECK(std::abs(fd - R.at(i)[k]) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
    for (std::size_t i = 0; i < u.cells(); ++i)
      if (!lat->interior(i)) CHECK(R.at(i)[0] == 0.0);
  }
}

TEST_CASE("random restarts are reproducible") {
  const Setup S = step_1d(1.0 / 64);
  ACProblem pb = make_problem(S.kt, S.w, 1.0 / 8, S.far);
  const ACSolution a = solve_min(pb, Init::random(9, 2));
  const ACSolution b = solve_min(pb, Init::random(9, 2));
  CHECK(a.u.values == b.u.values);
  CHECK(a.energy.total == b.energy.total);
  CHECK(a.converged);
  CHECK(a.seed != 0);
}

TEST_CASE("non-convergence is reported") {
  const Setup S = step_1d(1.0 / 64);
  ACProblem pb = make_problem(S.kt, S.w, 1.0 / 64, S.far);
  pb.params.max_iters = 3;
  const ACSolution sol = solve_min(pb, Init::random(1, 1));
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations <= 3);
  CHECK_FALSE(sol.diagnostic.empty());

  ACProblem bad = make_problem(S.kt, S.w, 1.0 / 64, S.far);
  bad.eps = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("large eps with single-well data clears out") {
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.5);
  auto kt = std::make_shared<const KernelTable>(lat, 0.25, Pattern::constant(1, 2));
  const Wells w = wells_1d({-1, 1});
  const FarValues fv = far_values_from_wells(w, 2);
  const ACProblem pb = make_problem(kt, w, 2.0, fv);
  const ACSolution sol = solve_min(pb, Init::random(3, 1));
  REQUIRE(sol.converged);
  const double rho = estimate_constants(w).rho_W;
  for (std::size_t i = 0; i < sol.u.cells(); ++i)
    if (std::abs(lat->center(i)[0]) < 0.5) CHECK(std::abs(sol.u.values[i] - 1.0) <= rho);
}

TEST_CASE("reaction potential") {
  const double s = 0.25;
  auto lat = build_lattice(1, 1.0 / 256, Box::interval(-1, 1), 1.0);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const KernelTable kt(lat, s, far);
  const Wells w = wells_1d({-1, 1});

  const KernelTable k1(lat, s, Pattern::constant(0, 1));
  const VectorField z = reaction_potential(LabelField(lat, 2, 0), k1, w);
  for (double v : z.values) CHECK(std::abs(v) < 1e-12);

  // E = (-inf, 0): V_E(-delta) = gamma delta^{-2s} / (2s)
  const Mask E = mask_of_label(pattern_labels(lat, far, 2), 0);
  const std::vector<double> V = set_potential(E, kt, {true, false});
  const double g = gamma_ns({1, s});
  for (double delta : {0.1, 0.25}) {
    const std::size_t i = static_cast<std::size_t>(lat->locate(-delta - 1e-9));
    const double d = -lat->center(i)[0];
    CHECK(std::abs(V[i] / (g * std::pow(d, -2 * s) / (2 * s)) - 1.0) < 0.02);
    const std::size_t j = static_cast<std::size_t>(lat->locate(delta + 1e-9));
    CHECK(V[j] < 0.0);
    CHECK(V[i] > 0.0);
  }

  // -sum_j V_j a_j for the two-phase step
  const VectorField R = reaction_potential(pattern_labels(lat, far, 2), kt, w);
  const std::size_t i = static_cast<std::size_t>(lat->locate(-0.3));
  const std::vector<double> V1 = set_potential(mask_of_label(pattern_labels(lat, far, 2), 1), kt, {false, true});
  CHECK(R.values[i] == doctest::Approx(-(V[i] * -1.0 + V1[i] * 1.0)).epsilon(1e-12));
}

TEST_CASE("periodic solver is translation equivariant") {
  const Torus T{1, 64, 2.0};
  auto op = std::make_shared<const TorusOperator>(T, 0.25, TorusMethod::Quadrature);
  TorusProblem pb{op, std::make_shared<ProductPotential>(wells_1d({-1, 1})), 0.1, {}};
  pb.params.tol = 1e-11;
  std::vector<double> init(64);
  for (int i = 0; i < 64; ++i) init[i] = (i >= 16 && i < 40) ? 1.0 : -1.0;
  const int shift = 11;
  std::vector<double> shifted(64);
  for (int i = 0; i < 64; ++i) shifted[(i + shift) % 64] = init[i];
  const TorusSolution a = solve_torus(pb, init);
  const TorusSolution b = solve_torus(pb, shifted);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(b.u[(i + shift) % 64] - a.u[i]) < 1e-9);
  CHECK(a.energy <= torus_energy(pb, init));
}
