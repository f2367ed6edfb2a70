#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "doctest.h"
#include "fpl/error.hpp"
#include "fpl/field_io.hpp"
#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"

using namespace fpl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::string tmp(const std::string& name) { return "/tmp/fpl_test_lattice_" + name; }

}  // namespace

TEST_CASE("build_lattice counting") {
  auto a = build_lattice(1, 1.0 / 256, Box::interval(-1, 1), 1.0);
  CHECK(a->interior_count() == 512);
  CHECK(a->size() - a->interior_count() == 512);
  CHECK(a->collar_cells() == 256);

  auto b = build_lattice(2, 1.0 / 64, Box::rect(0, 1, 0, 1), 2.0 / 64);
  CHECK(b->interior_count() == 4096);
  CHECK(b->mx() == 68);
  CHECK(b->size() == 68u * 68u);

  CHECK_THROWS_AS(build_lattice(1, 1.0 / 64, Box::interval(0, 1), 1.0 / 64), DomainError);
  CHECK_THROWS_AS(build_lattice(1, 0.25, Box::interval(0, 0.5), 1.0), DomainError);
  CHECK_THROWS_AS(build_lattice(3, 0.25, Box::interval(0, 4), 1.0), DomainError);
}

TEST_CASE("cell enumeration and classification") {
  auto lat = build_lattice(2, 0.125, Box::rect(-1, 1, 0, 1), 0.25);
  std::size_t interior = 0;
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto c = lat->center(i);
    const bool inside = c[0] > -1 && c[0] < 1 && c[1] > 0 && c[1] < 1;
    CHECK(inside == lat->interior(i));
    CHECK(lat->index(lat->ix(i), lat->iy(i)) == i);
    CHECK(lat->locate(c[0], c[1]) == static_cast<long>(i));
    interior += inside;
  }
  CHECK(interior == lat->interior_count());
  CHECK(lat->locate(10.0, 0.0) == -1);
}

TEST_CASE("kernel weights against an adaptive-quadrature oracle") {
  // Cell pair [0,1/2] x [1/2,1], |x-y|^{-3/2}.
  auto lat = build_lattice(1, 0.5, Box::interval(-1, 1), 1.0);
  const KernelTable kt = build_kernel(lat, 0.25);
  CHECK(std::abs(kt.w(1) * 0.25 - 1.6568542494923801752) < 1e-6);

  // Unit-cell averages in 2D, s = 1/4.
  CHECK(std::abs(unit_weight_2d(1, 0, 0.25) - 3.6470875154971999822) < 1e-6);
  CHECK(std::abs(unit_weight_2d(1, 1, 0.25) - 0.6760083986859470811) < 1e-6);
  CHECK(std::abs(unit_weight_2d(2, 0, 0.25) - 0.20328767214612800433) < 1e-6);
  CHECK(std::abs(unit_weight_2d(3, 1, 0.25) - 0.059372475898012227998) < 1e-6);
  CHECK(std::abs(unit_weight_2d(5, 2, 0.25) - 0.015133016095737656481) < 1e-6);
  CHECK_THROWS_AS(build_kernel(lat, 0.5), DomainError);
  CHECK_THROWS_AS(build_kernel(lat, 0.0), DomainError);
}

TEST_CASE("kernel symmetry, positivity and far-field regime") {
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.5);
  const double s = 0.3;
  const KernelTable kt = build_kernel(lat, s);
  const double h = lat->h();
  for (long dx = -10; dx <= 10; ++dx)
    for (long dy = -10; dy <= 10; ++dy) {
      if (dx == 0 && dy == 0) continue;
      CHECK(kt.w(dx, dy) == kt.w(-dx, -dy));
      CHECK(kt.w(dx, dy) > 0.0);
    }
  CHECK(kt.w(0, 0) == 0.0);
  double prev = 2.0;
  for (long k : {4, 8, 16, 30}) {
    const double r = k * h;
    const double ratio = kt.w(k, 0) * std::pow(r, 2 + 2 * s);
    CHECK(std::abs(ratio - 1.0) < prev);
    prev = std::abs(ratio - 1.0);
  }
  CHECK(prev < 1e-3);
  for (long k = 2; k < 30; ++k) CHECK(kt.w(k + 1, 0) < kt.w(k, 0));

  const double t1 = radial_tail(1, 0.25, 2.0);
  CHECK(t1 == doctest::Approx(2.0 * std::pow(2.0, -0.5) / 0.5));
}

TEST_CASE("kernel mass: offsets plus tail give the cell-averaged exterior integral") {
  // Cell average of int_{R^n \ cell} |x - y|^{-n-2s} dy = P_{2s}(cell) / |cell|:
  // 1D closed form 2 h^{-2s} / (2s (1-2s)); 2D from the unit-square perimeter.
  const double s = 0.25;
  {
    auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 1.0);
    const KernelTable kt = build_kernel(lat, s);
    const double h = lat->h();
    for (std::size_t i : {lat->index(64), lat->index(lat->collar_cells())}) {
      const double mass = kt.row_sum(i) * h + kt.tail_total(i);
      CHECK(std::abs(mass * std::pow(h, 2 * s) / 8.0 - 1.0) < 1e-2);
    }
  }
  {
    auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.5);
    const KernelTable kt = build_kernel(lat, s);
    const double h = lat->h();
    const std::size_t i = lat->index(lat->mx() / 2, lat->my() / 2);
    const double mass = kt.row_sum(i) * h * h + kt.tail_total(i);
    CHECK(std::abs(mass * std::pow(h, 2 * s) / 27.211908360256519 - 1.0) < 1e-2);
  }
}

TEST_CASE("far tails split by class") {
  auto lat = build_lattice(1, 1.0 / 32, Box::interval(-1, 1), 0.5);
  const KernelTable kt(lat, 0.25, Pattern::step(0.0, 0, 1, 2));
  const std::size_t left = lat->index(0), right = lat->index(lat->mx() - 1);
  CHECK(kt.tail(left, 0) > kt.tail(left, 1));
  CHECK(kt.tail(right, 1) > kt.tail(right, 0));
  CHECK(kt.tail(left, 0) == doctest::Approx(kt.tail(right, 1)).epsilon(1e-12));
  CHECK(kt.tail_total(left) == doctest::Approx(kt.tail(left, 0) + kt.tail(left, 1)));
}

TEST_CASE("patterns") {
  const Pattern st = Pattern::step(0.0, 0, 1, 2);
  CHECK(st(-0.1) == 0);
  CHECK(st(0.0) == 1);
  const Pattern hp = Pattern::halfplane(0, 0, 0, 1, 2, 1, 3);
  CHECK(hp(0, 1) == 1);
  CHECK(hp(0, -1) == 2);
  const Pattern sec = Pattern::sectors(3, 0, 0, 0.0);
  CHECK(sec(1, 0.1) == 0);
  CHECK(sec(-1, 0.1) == 1);
  CHECK(sec(0.1, -1) == 2);
  const Pattern bd = Pattern::bands({-0.5, 0.5}, {0, 2, 1}, 3);
  CHECK(bd(-1) == 0);
  CHECK(bd(0) == 2);
  CHECK(bd(1) == 1);
}

TEST_CASE("threshold_to_labels and the label embedding") {
  auto lat = build_lattice(1, 1.0 / 32, Box::interval(-1, 1), 0.25);
  const Wells w = wells_1d({-1, 1});
  Eigen::VectorXd a2(1);
  a2 << 1.0;
  const LabelField l2 = threshold_to_labels(constant_field(lat, a2), w);
  for (auto v : l2.labels) CHECK(v == 1);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  for (auto v : threshold_to_labels(constant_field(lat, zero), w).labels) CHECK(v == 0);

  std::mt19937_64 rng(2);
  const Wells w3 = wells_1d({0, 2, 1});
  LabelField L(lat, 3);
  for (auto& v : L.labels) v = static_cast<std::uint16_t>(rng() % 3);
  CHECK(threshold_to_labels(embed_labels(L, w3), w3).labels == L.labels);

  const LabelField stp = pattern_labels(lat, Pattern::step(0.0, 0, 1, 2), 2);
  CHECK(threshold_to_labels(embed_labels(stp, w), w).labels == stp.labels);

  LabelField badl(lat, 2);
  badl.labels[3] = 5;
  CHECK_THROWS_AS(badl.validate(), DomainError);
}

TEST_CASE("transition_set") {
  auto lat = build_lattice(1, 1.0 / 64, Box::interval(-1, 1), 0.25);
  const Wells w = wells_1d({-1, 1});
  Eigen::VectorXd a1(1);
  a1 << -1.0;
  CHECK(count(transition_set(constant_field(lat, a1), w, 0.1)) == 0);

  VectorField u(lat, 1);
  for (std::size_t i = 0; i < u.cells(); ++i) u.values[i] = std::tanh(lat->center(i)[0] / 0.05);
  const Mask band = transition_set(u, w, 0.5);
  // contiguous run around x = 0, matching direct evaluation of |tanh| <= 1/2
  long first = -1, last = -1;
  std::size_t n = 0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    const bool expect = std::abs(std::tanh(lat->center(i)[0] / 0.05)) <= 0.5;
    CHECK(static_cast<bool>(band[i]) == expect);
    if (band[i]) {
      if (first < 0) first = static_cast<long>(i);
      last = static_cast<long>(i);
      ++n;
    }
  }
  CHECK(n > 0);
  CHECK(static_cast<std::size_t>(last - first + 1) == n);
  CHECK(lat->center(static_cast<std::size_t>(first))[0] < 0.0);
  CHECK(lat->center(static_cast<std::size_t>(last))[0] > 0.0);
  CHECK(count(transition_set(u, w, 3.0)) == 0);
}

TEST_CASE("field files round trip and serialize deterministically") {
  auto lat = build_lattice(2, 1.0 / 8, Box::rect(0, 1, -1, 1), 0.25);
  VectorField u(lat, 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N;
  for (double& v : u.values) v = N(rng);
  write_field(tmp("u1.fld"), u, 0.3);
  write_field(tmp("u2.fld"), u, 0.3);
  CHECK(slurp(tmp("u1.fld")) == slurp(tmp("u2.fld")));
  CHECK(slurp(tmp("u1.fld")).size() == 64 + 8 * u.values.size());
  const LoadedVectorField back = read_vector_field(tmp("u1.fld"));
  CHECK(back.s == 0.3);
  CHECK(back.field.values == u.values);
  CHECK(back.field.lattice->mx() == lat->mx());
  CHECK(back.field.lattice->interior_count() == lat->interior_count());

  LabelField L(lat, 5);
  for (auto& v : L.labels) v = static_cast<std::uint16_t>(rng() % 5);
  write_field(tmp("l.fld"), L, 0.2);
  const std::string bytes = slurp(tmp("l.fld"));
  CHECK(bytes.substr(0, 4) == "FPL1");
  const LoadedLabelField lb = read_label_field(tmp("l.fld"));
  CHECK(lb.field.labels == L.labels);
  CHECK(lb.field.m == 5);

  CHECK_THROWS_AS(read_label_field(tmp("u1.fld")), FormatError);
  CHECK_THROWS_AS(read_vector_field(tmp("missing.fld")), FormatError);
  std::remove(tmp("u1.fld").c_str());
  std::remove(tmp("u2.fld").c_str());
  std::remove(tmp("l.fld").c_str());
}
