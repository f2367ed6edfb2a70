#pragma once

// Uniform cell lattices over a box with an exterior collar, the fields that
// live on them, and exterior patterns assigning a phase class to every point
// outside the box.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fpl/wells.hpp"

namespace fpl {

struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};

  static Box interval(double a, double b) { return Box{{a, 0.0}, {b, 0.0}}; }
  static Box rect(double x0, double x1, double y0, double y1) { return Box{{x0, y0}, {x1, y1}}; }
};

using Mask = std::vector<std::uint8_t>;

class Lattice {
 public:
  // Cells are enumerated x-fastest over the box extended by the collar.
  Lattice(int n, double h, Box box, double collar_width, double tail_radius = 0.0);

  int n() const { return n_; }
  double h() const { return h_; }
  const Box& box() const { return box_; }
  double collar_width() const { return collar_; }
  double tail_radius() const { return tail_radius_; }
  int collar_cells() const { return C_; }

  // Extended lattice dimensions (my = 1 when n = 1).
  int mx() const { return dims_[0]; }
  int my() const { return dims_[1]; }
  // Interior dimensions.
  int nx() const { return inner_[0]; }
  int ny() const { return inner_[1]; }

  std::size_t size() const { return static_cast<std::size_t>(dims_[0]) * dims_[1]; }
  std::size_t interior_count() const { return static_cast<std::size_t>(inner_[0]) * inner_[1]; }
  std::size_t index(int ix, int iy = 0) const { return static_cast<std::size_t>(iy) * dims_[0] + ix; }
  int ix(std::size_t i) const { return static_cast<int>(i % dims_[0]); }
  int iy(std::size_t i) const { return static_cast<int>(i / dims_[0]); }

  std::array<double, 2> center(std::size_t i) const;
  // Lower corner of the extended box.
  std::array<double, 2> origin() const { return origin_; }
  std::array<double, 2> ext_hi() const;

  bool interior(std::size_t i) const { return interior_[i] != 0; }
  const Mask& interior_mask() const { return interior_; }
  double cell_measure() const { return n_ == 1 ? h_ : h_ * h_; }

  // Cell containing a point of the extended box, or -1.
  long locate(double x, double y = 0.0) const;

 private:
  int n_;
  double h_;
  Box box_;
  double collar_;
  double tail_radius_;
  int C_;
  std::array<int, 2> inner_{1, 1};
  std::array<int, 2> dims_{1, 1};
  std::array<double, 2> origin_{0.0, 0.0};
  Mask interior_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

LatticePtr build_lattice(int n, double h, Box box, double collar_width, double tail_radius = 0.0);

// Phase classes (0-based) for points of the plane; used for collar data and
// for everything beyond the collar.
struct Pattern {
  int classes = 1;
  std::function<int(double, double)> classify;
  std::string name = "constant";

  int operator()(double x, double y = 0.0) const { return classify(x, y); }

  static Pattern constant(int cls, int classes);
  // class `left` for x < x0, `right` otherwise.
  static Pattern step(double x0, int left, int right, int classes);
  // Half-plane split by the line through p with unit normal nu: class
  // `positive` where (x - p).nu >= 0.
  static Pattern halfplane(double px, double py, double nux, double nuy, int negative, int positive, int classes);
  // k equal angular sectors around (cx, cy) starting at angle theta0;
  // sector j gets class j.
  static Pattern sectors(int k, double cx, double cy, double theta0);
  // 1D bands: cut points c_1 < ... < c_{r}; band b (b = 0..r) gets cls[b].
  static Pattern bands(std::vector<double> cuts, std::vector<int> cls, int classes);
};

struct VectorField {
  LatticePtr lattice;
  int d = 1;
  std::vector<double> values;  // cell-major, d entries per cell

  VectorField() = default;
  VectorField(LatticePtr lat, int dim, double fill = 0.0);

  std::size_t cells() const { return lattice->size(); }
  double* at(std::size_t i) { return values.data() + i * d; }
  const double* at(std::size_t i) const { return values.data() + i * d; }
  std::span<const double> cell(std::size_t i) const { return {at(i), static_cast<std::size_t>(d)}; }
  bool finite() const;
};

// Labels are 0-based in memory; files and user-facing output use 1..m.
struct LabelField {
  LatticePtr lattice;
  int m = 2;
  std::vector<std::uint16_t> labels;

  LabelField() = default;
  LabelField(LatticePtr lat, int phases, int fill = 0);

  std::size_t cells() const { return lattice->size(); }
  int operator[](std::size_t i) const { return labels[i]; }
  void validate() const;
};

LabelField pattern_labels(const LatticePtr& lat, const Pattern& pattern, int m);
// Overwrites the collar cells of `labels` from the pattern.
void apply_collar(LabelField& labels, const Pattern& pattern);
VectorField embed_labels(const LabelField& labels, const Wells& wells);
VectorField constant_field(const LatticePtr& lat, const Eigen::VectorXd& value);

LabelField threshold_to_labels(const VectorField& u, const Wells& wells);
Mask transition_set(const VectorField& u, const Wells& wells, double t);

Mask all_cells(const Lattice& lat);
Mask mask_of_label(const LabelField& labels, int label);
Mask disc_mask(const Lattice& lat, double cx, double cy, double r);
std::size_t count(const Mask& m);

}  // namespace fpl
