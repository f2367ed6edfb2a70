#include "fpl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpl/error.hpp"

namespace fpl {

namespace {

int cells_along(double len, double h) {
  const double q = len / h;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q)) throw DomainError("lattice: box length must be a multiple of h");
  return static_cast<int>(r);
}

}  // namespace

Lattice::Lattice(int n, double h, Box box, double collar_width, double tail_radius)
    : n_(n), h_(h), box_(box), collar_(collar_width), tail_radius_(tail_radius) {
  require(n == 1 || n == 2, "lattice: n must be 1 or 2");
  require(std::isfinite(h) && h > 0.0, "lattice: h must be positive");
  require(collar_width >= 2.0 * h * (1.0 - 1e-12), "lattice: collar_width must be at least 2h");
  for (int k = 0; k < n; ++k) {
    require(box.hi[k] > box.lo[k], "lattice: degenerate box");
    require(box.hi[k] - box.lo[k] >= 4.0 * h * (1.0 - 1e-12), "lattice: box smaller than 4h");
    inner_[k] = cells_along(box.hi[k] - box.lo[k], h);
  }
  C_ = static_cast<int>(std::ceil(collar_width / h - 1e-9));
  for (int k = 0; k < n; ++k) {
    dims_[k] = inner_[k] + 2 * C_;
    origin_[k] = box.lo[k] - C_ * h;
  }
  // The far-field closure starts where the collar ends.
  const double edge = C_ * h;
  if (tail_radius_ <= 0.0) tail_radius_ = edge;
  require(tail_radius_ >= edge * (1.0 - 1e-12), "lattice: tail_radius must not be inside the collar");
  interior_.assign(size(), 0);
  for (std::size_t i = 0; i < size(); ++i) {
    const int x = ix(i), y = iy(i);
    bool in = x >= C_ && x < C_ + inner_[0];
    if (n == 2) in = in && y >= C_ && y < C_ + inner_[1];
    interior_[i] = in ? 1 : 0;
  }
}

std::array<double, 2> Lattice::center(std::size_t i) const {
  std::array<double, 2> c{origin_[0] + (ix(i) + 0.5) * h_, 0.0};
  if (n_ == 2) c[1] = origin_[1] + (iy(i) + 0.5) * h_;
  return c;
}

std::array<double, 2> Lattice::ext_hi() const {
  std::array<double, 2> e{origin_[0] + dims_[0] * h_, 0.0};
  if (n_ == 2) e[1] = origin_[1] + dims_[1] * h_;
  return e;
}

long Lattice::locate(double x, double y) const {
  const long cx = static_cast<long>(std::floor((x - origin_[0]) / h_));
  if (cx < 0 || cx >= dims_[0]) return -1;
  long cy = 0;
  if (n_ == 2) {
    cy = static_cast<long>(std::floor((y - origin_[1]) / h_));
    if (cy < 0 || cy >= dims_[1]) return -1;
  }
  return cy * dims_[0] + cx;
}

LatticePtr build_lattice(int n, double h, Box box, double collar_width, double tail_radius) {
  return std::make_shared<const Lattice>(n, h, box, collar_width, tail_radius);
}

Pattern Pattern::constant(int cls, int classes) {
  require(cls >= 0 && cls < classes, "pattern: class out of range");
  return Pattern{classes, [cls](double, double) { return cls; }, "constant"};
}

Pattern Pattern::step(double x0, int left, int right, int classes) {
  require(left >= 0 && left < classes && right >= 0 && right < classes, "pattern: class out of range");
  return Pattern{classes, [=](double x, double) { return x < x0 ? left : right; }, "step"};
}

Pattern Pattern::halfplane(double px, double py, double nux, double nuy, int negative, int positive, int classes) {
  require(negative >= 0 && negative < classes && positive >= 0 && positive < classes, "pattern: class out of range");
  return Pattern{classes,
                 [=](double x, double y) { return (x - px) * nux + (y - py) * nuy >= 0.0 ? positive : negative; },
                 "halfplane"};
}

Pattern Pattern::sectors(int k, double cx, double cy, double theta0) {
  require(k >= 1, "pattern: need at least one sector");
  return Pattern{k,
                 [=](double x, double y) {
                   double th = std::atan2(y - cy, x - cx) - theta0;
                   const double two_pi = 2.0 * std::numbers::pi;
                   th = std::fmod(th, two_pi);
                   if (th < 0) th += two_pi;
                   return std::min(k - 1, static_cast<int>(th / (two_pi / k)));
                 },
                 "sectors"};
}

Pattern Pattern::bands(std::vector<double> cuts, std::vector<int> cls, int classes) {
  require(cls.size() == cuts.size() + 1, "pattern: bands need one class more than cuts");
  require(std::is_sorted(cuts.begin(), cuts.end()), "pattern: cuts must increase");
  for (int c : cls) require(c >= 0 && c < classes, "pattern: class out of range");
  return Pattern{classes,
                 [cuts, cls](double x, double) {
                   std::size_t b = 0;
                   while (b < cuts.size() && x >= cuts[b]) ++b;
                   return cls[b];
                 },
                 "bands"};
}

VectorField::VectorField(LatticePtr lat, int dim, double fill) : lattice(std::move(lat)), d(dim) {
  require(d >= 1, "field: dimension must be positive");
  values.assign(lattice->size() * d, fill);
}

bool VectorField::finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

LabelField::LabelField(LatticePtr lat, int phases, int fill) : lattice(std::move(lat)), m(phases) {
  require(m >= 1 && m <= kMaxPhases, "labels: m must be in 1..16");
  require(fill >= 0 && fill < m, "labels: fill label out of range");
  labels.assign(lattice->size(), static_cast<std::uint16_t>(fill));
}

void LabelField::validate() const {
  require(labels.size() == lattice->size(), "labels: size mismatch");
  for (auto l : labels) require(l < m, "labels: label outside 1..m");
}

LabelField pattern_labels(const LatticePtr& lat, const Pattern& pattern, int m) {
  require(pattern.classes <= m, "labels: pattern has more classes than phases");
  LabelField out(lat, m);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto c = lat->center(i);
    out.labels[i] = static_cast<std::uint16_t>(pattern(c[0], c[1]));
  }
  return out;
}

void apply_collar(LabelField& labels, const Pattern& pattern) {
  const Lattice& lat = *labels.lattice;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (lat.interior(i)) continue;
    const auto c = lat.center(i);
    labels.labels[i] = static_cast<std::uint16_t>(pattern(c[0], c[1]));
  }
}

VectorField embed_labels(const LabelField& labels, const Wells& wells) {
  require(static_cast<int>(wells.m()) == labels.m, "embed: phase count mismatch");
  VectorField u(labels.lattice, wells.d);
  for (std::size_t i = 0; i < labels.cells(); ++i) {
    const auto& a = wells.points[labels.labels[i]];
    for (int k = 0; k < wells.d; ++k) u.at(i)[k] = a[k];
  }
  return u;
}

VectorField constant_field(const LatticePtr& lat, const Eigen::VectorXd& value) {
  VectorField u(lat, static_cast<int>(value.size()));
  for (std::size_t i = 0; i < lat->size(); ++i)
    for (int k = 0; k < u.d; ++k) u.at(i)[k] = value[k];
  return u;
}

LabelField threshold_to_labels(const VectorField& u, const Wells& wells) {
  require(u.d == wells.d, "threshold: dimension mismatch");
  LabelField out(u.lattice, static_cast<int>(wells.m()));
  for (std::size_t i = 0; i < u.cells(); ++i)
    out.labels[i] = static_cast<std::uint16_t>(nearest_well(wells, u.cell(i)).second);
  return out;
}

Mask transition_set(const VectorField& u, const Wells& wells, double t) {
  require(t > 0.0, "transition_set: t must be positive");
  require(u.d == wells.d, "transition_set: dimension mismatch");
  Mask out(u.cells(), 0);
  for (std::size_t i = 0; i < u.cells(); ++i) out[i] = nearest_well(wells, u.cell(i)).first >= t ? 1 : 0;
  return out;
}

Mask all_cells(const Lattice& lat) { return Mask(lat.size(), 1); }

Mask mask_of_label(const LabelField& labels, int label) {
  Mask out(labels.cells(), 0);
  for (std::size_t i = 0; i < labels.cells(); ++i) out[i] = labels.labels[i] == label ? 1 : 0;
  return out;
}

Mask disc_mask(const Lattice& lat, double cx, double cy, double r) {
  Mask out(lat.size(), 0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto c = lat.center(i);
    const double dx = c[0] - cx, dy = c[1] - cy;
    out[i] = dx * dx + dy * dy < r * r ? 1 : 0;
  }
  return out;
}

std::size_t count(const Mask& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1)); }

}  // namespace fpl
