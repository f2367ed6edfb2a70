#pragma once

// Nonlocal mean curvature of a set at a boundary point, evaluated by pairing
// opposite rays so the singular part cancels, and the right-hand side f_hk of
// the curvature equation between two phases of a partition.

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"
#include "fpl/wells.hpp"

namespace fpl {

class Shape {
 public:
  virtual ~Shape() = default;
  virtual int dim() const = 0;
  virtual bool contains(double x, double y) const = 0;
  // Sorted distances t > tmin at which x + t v crosses the boundary.
  virtual std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const = 0;
  // Direction of the boundary tangent at a boundary point, in [0, pi); NaN
  // if unknown.
  virtual double tangent_angle(double x, double y) const;
  // Radius of a disc around the origin holding every boundary feature.
  virtual double extent() const = 0;
};

using ShapePtr = std::shared_ptr<const Shape>;

// Union of disjoint closed intervals on the line.
class Intervals final : public Shape {
 public:
  explicit Intervals(std::vector<std::array<double, 2>> iv);
  int dim() const override { return 1; }
  bool contains(double x, double) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double extent() const override;

 private:
  std::vector<std::array<double, 2>> iv_;
};

class Disc final : public Shape {
 public:
  Disc(double cx, double cy, double R);
  int dim() const override { return 2; }
  bool contains(double x, double y) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double tangent_angle(double x, double y) const override;
  double extent() const override { return std::hypot(cx_, cy_) + R_; }

 private:
  double cx_, cy_, R_;
};

// {(y - p) . nu <= 0}: nu is the outer normal.
class HalfPlane final : public Shape {
 public:
  HalfPlane(double px, double py, double nux, double nuy);
  int dim() const override { return 2; }
  bool contains(double x, double y) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double tangent_angle(double, double) const override;
  double extent() const override { return std::hypot(px_, py_); }

 private:
  double px_, py_, nx_, ny_;
};

// Closed simple polygon; even-odd rule.
class Polygon final : public Shape {
 public:
  explicit Polygon(std::vector<std::array<double, 2>> v);
  int dim() const override { return 2; }
  bool contains(double x, double y) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double tangent_angle(double x, double y) const override;
  double extent() const override;

 private:
  std::vector<std::array<double, 2>> v_;
};

// Open simple polyline whose end segments continue as rays; the set lies to
// its left.
class Polyline final : public Shape {
 public:
  explicit Polyline(std::vector<std::array<double, 2>> v);
  int dim() const override { return 2; }
  bool contains(double x, double y) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double tangent_angle(double x, double y) const override;
  double extent() const override;

 private:
  std::vector<std::array<double, 2>> v_;
  double far_;  // length used for the end rays
};

// Union of lattice cells; the complement includes everything off the lattice.
class MaskShape final : public Shape {
 public:
  MaskShape(LatticePtr lat, Mask E);
  int dim() const override { return lattice_->n(); }
  bool contains(double x, double y) const override;
  std::vector<double> crossings(double x, double y, double vx, double vy, double tmin) const override;
  double extent() const override;
  double tangent_angle(double x, double y) const override;
  // Nearest midpoint of a cell face separating E from its complement, or
  // DomainError when none lies within h of (x, y).
  std::array<double, 2> snap(double x, double y) const;
  const Lattice& lattice() const { return *lattice_; }

 private:
  LatticePtr lattice_;
  Mask E_;
};

// H(x) = p.v. int (chi_{E^c} - chi_E)(y) |x - y|^{-(n+2s)} dy at x on the
// boundary. Mask shapes snap x to the nearest separating face first.
double nonlocal_mean_curvature(const Shape& E, double x, double y, double s);

// Convenience for a 1D set given by its boundary points b_1 < ... < b_{2k}.
double nonlocal_mean_curvature_1d(const std::vector<double>& boundary, double x, double s);

// f_hk(x) = sum_{j != h,k} ((s_hk + s_kj - s_hj)/s_hk) int_{E_j} |x-y|^{-(n+2s)} dy,
// with the integrals over the cells of label j (the cell holding x dropped)
// plus far-field tails. Labels are 0-based.
double curvature_rhs_fhk(const LabelField& labels, const SigmaMatrix& sigma, int h_idx, int k_idx, double x,
                         double y, const KernelTable& kt);

}  // namespace fpl
