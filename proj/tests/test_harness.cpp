#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fpl/error.hpp"
#include "fpl/harness.hpp"

using namespace fpl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("slope fitter") {
  std::vector<double> x, y;
  for (int k = 0; k < 6; ++k) {
    x.push_back(std::ldexp(1.0, -k));
    y.push_back(3.7 * std::pow(x.back(), 0.83));
  }
  const SlopeFit f = fit_slope(x, y);
  CHECK(std::abs(f.slope - 0.83) < 1e-12);
  CHECK(f.max_residual <= 1e-10);
  CHECK(std::exp(f.intercept) == doctest::Approx(3.7));
  CHECK(f.points == 6);

  // u_eps = u* + eps^{2s} w measured in sup norm
  const double s = 0.3;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> w(50);
  for (double& v : w) v = U(rng);
  double wmax = 0;
  for (double v : w) wmax = std::max(wmax, std::abs(v));
  std::vector<double> e, d;
  for (int k = 3; k <= 7; ++k) {
    const double eps = std::ldexp(2.0, -k);
    double m = 0;
    for (double v : w) m = std::max(m, std::abs(std::pow(eps, 2 * s) * v));
    e.push_back(eps);
    d.push_back(m);
  }
  const SlopeFit g = fit_slope(e, d);
  CHECK(std::abs(g.slope - 2 * s) < 1e-3);
  CHECK(g.ci_lo <= g.slope);
  CHECK(g.ci_hi >= g.slope);

  CHECK_THROWS_AS(fit_slope({1.0}, {1.0}), DomainError);
}

TEST_CASE("dyadic eps and extrapolation") {
  const auto eps = dyadic_eps(Box::interval(-1, 1), 3, 7);
  REQUIRE(eps.size() == 5);
  CHECK(eps[0] == 0.25);
  CHECK(eps[4] == 2.0 / 128);
  CHECK(extrapolate_to_zero({0.2, 0.1, 0.04}, {1 + 2 * 0.2 + 0.2 * 0.2, 1 + 2 * 0.1 + 0.01, 1 + 0.08 + 0.0016}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small eps sweep") {
  SweepConfig c;
  c.s = 0.25;
  c.cells = 128;
  c.eps = dyadic_eps(c.box, 2, 4);
  const SweepResult r = sweep_eps(c);
  CHECK(r.complete);
  REQUIRE(r.records.size() == 3);
  for (std::size_t k = 1; k < r.records.size(); ++k) {
    CHECK(r.eps_values[k] < r.eps_values[k - 1]);
    CHECK(r.records[k].linf_K < r.records[k - 1].linf_K);
  }
  CHECK(r.K_cells > 0);
  CHECK(r.linf_fit.slope > 0.0);
  write_sweep_csv("/tmp/fpl_test_sweep.csv", r);
  const std::string csv = slurp("/tmp/fpl_test_sweep.csv");
  CHECK(csv.find("slope") != std::string::npos);

  SweepConfig bad = c;
  bad.eps = {0.1, 0.1};
  CHECK_THROWS_AS(sweep_eps(bad), DomainError);
}

TEST_CASE("diffuse and sharp routes agree with single-well data") {
  GammaConfig g;
  g.h = 1.0 / 64;
  g.eps = 8 * g.h;
  Eigen::MatrixXd e(2, 2);
  e << 0, 4, 4, 0;
  g.sigma = SigmaMatrix(e);
  g.far = Pattern::constant(1, 2);
  const GammaReport r = gamma_limit_check(g);
  CHECK(r.E_ac_labels == 0.0);
  CHECK(r.E_direct == 0.0);
  CHECK(r.mismatches == 0);
}

TEST_CASE("two-phase 1D: diffuse and sharp energies within 1%") {
  GammaConfig g;
  g.h = 1.0 / 512;
  g.eps = 8 * g.h;
  Eigen::MatrixXd e(2, 2);
  e << 0, 4, 4, 0;
  g.sigma = SigmaMatrix(e);
  g.far = Pattern::step(0.0, 0, 1, 2);
  const GammaReport r = gamma_limit_check(g);
  CHECK(r.ac_converged);
  CHECK(r.partition_flip_stable);
  CHECK(r.rel_gap <= 0.01);
}

TEST_CASE("s -> 1/2 ratio table") {
  std::vector<std::shared_ptr<const Covariogram>> same{std::make_shared<DiscCovariogram>(0.5),
                                                        std::make_shared<DiscCovariogram>(0.5)};
  const LimitTable t = s_to_half_limit(same, {"a", "b"}, {1.0, 1.0}, {0.40, 0.45, 0.48});
  for (const LimitRow& row : t.rows) CHECK(row.ratios[1] == 1.0);

  std::vector<std::shared_ptr<const Covariogram>> pair{std::make_shared<DiscCovariogram>(0.5),
                                                        std::make_shared<RectCovariogram>(1, 1)};
  std::vector<std::shared_ptr<const Covariogram>> big{std::make_shared<DiscCovariogram>(1.5),
                                                       std::make_shared<RectCovariogram>(3, 3)};
  const LimitTable a = s_to_half_limit(pair, {"disc", "square"}, {M_PI, 4.0}, {0.40, 0.45, 0.48});
  const LimitTable b = s_to_half_limit(big, {"disc", "square"}, {3 * M_PI, 12.0}, {0.40, 0.45, 0.48});
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    CHECK(std::abs(a.rows[k].ratios[1] / b.rows[k].ratios[1] - 1.0) < 1e-8);
  CHECK(a.classical_ratio[1] == doctest::Approx(4 / M_PI));
  write_limit_csv("/tmp/fpl_test_limit.csv", a);
  CHECK(slurp("/tmp/fpl_test_limit.csv").find("extrapolated") != std::string::npos);
}

TEST_CASE("monotonicity audit controls") {
  const double s = 0.25, h = 1.0 / 256;
  auto lat = build_lattice(1, h, Box::interval(-1, 1), 1.0);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  const Wells w = wells_1d({-1, 1});
  const FarValues fv = far_values_from_wells(w, 2);
  const ProductPotential W(w);
  std::vector<double> radii{0.125, 0.25, 0.5};
  const std::vector<std::array<double, 2>> centers{{0.0, 0.0}, {0.05, 0.0}};

  Eigen::VectorXd a(1);
  a << 1.0;
  const ExtensionSlab flat =
      poisson_extend(constant_field(lat, a), s, default_z_levels(h, 0.5), Pattern::constant(0, 1), {a});
  const AuditReport r0 = monotonicity_audit(flat, 0.1, &W, centers, radii);
  CHECK(r0.violations == 0);
  for (const AuditEntry& e : r0.entries)
    for (double t : e.theta) CHECK(t == doctest::Approx(0.0).epsilon(1e-20));

  const VectorField step = embed_labels(pattern_labels(lat, far, 2), w);
  ExtensionSlab clean = poisson_extend(step, s, default_z_levels(h, 0.5), far, fv);
  CHECK(monotonicity_audit(clean, std::nullopt, nullptr, centers, radii).violations == 0);

  // noise inside the smallest half-balls breaks monotonicity
  ExtensionSlab noisy = clean;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> N(0.0, 1.0);
  for (std::size_t i = 0; i < lat->size(); ++i)
    if (std::abs(lat->center(i)[0]) < 0.05)
      for (std::size_t l = 0; l < noisy.levels() && noisy.z[l] < 0.05; ++l) noisy.at(l, i)[0] += N(rng);
  const AuditReport r1 = monotonicity_audit(noisy, 0.1, &W, centers, radii);
  CHECK(r1.violations > 0);
  write_audit_csv("/tmp/fpl_test_audit.csv", r1);
  CHECK(slurp("/tmp/fpl_test_audit.csv").find("violation") != std::string::npos);
}

TEST_CASE("box counting") {
  auto lat = build_lattice(2, 1.0 / 64, Box::rect(0, 2, 0, 2), 2.0 / 64);
  Mask line(lat->size(), 0), block(lat->size(), 0);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    if (!lat->interior(i)) continue;
    const auto c = lat->center(i);
    line[i] = c[1] > 1.0 && c[1] < 1.0 + lat->h();
    block[i] = 1;
  }
  const BoxCount bl = box_counting_dim(*lat, line);
  REQUIRE(bl.valid);
  CHECK(std::abs(bl.dimension - 1.0) <= 0.1);
  CHECK(bl.sizes.size() >= 4);
  const BoxCount bb = box_counting_dim(*lat, block);
  CHECK(std::abs(bb.dimension - 2.0) <= 0.1);
  const BoxCount be = box_counting_dim(*lat, Mask(lat->size(), 0));
  CHECK_FALSE(be.valid);
  CHECK(std::isnan(be.dimension));
}

TEST_CASE("manifest") {
  Manifest m{"solve-ac", "0123456789abcdef", 42, {"a.csv", "b.fld"}};
  write_manifest("/tmp/fpl_test_manifest.txt", m);
  const std::string t = slurp("/tmp/fpl_test_manifest.txt");
  CHECK(t.find("config_hash = 0123456789abcdef") != std::string::npos);
  CHECK(t.find("seed = 42") != std::string::npos);
  CHECK(t.find(tool_version()) != std::string::npos);
}
