#include "fpl/curvature.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"

namespace fpl {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
  a = std::fmod(a, kPi);
  return a < 0 ? a + kPi : a;
}

// Ray x + t v against segment p + u (q - p); u unbounded past an open end.
void hit_segment(double x, double y, double vx, double vy, const std::array<double, 2>& p,
                 const std::array<double, 2>& q, bool open_lo, bool open_hi, double tmin, std::vector<double>& out) {
  const double ex = q[0] - p[0], ey = q[1] - p[1];
  const double den = vx * ey - vy * ex;
  if (std::abs(den) < 1e-300) return;
  const double wx = p[0] - x, wy = p[1] - y;
  const double cr = wx * ey - wy * ex;
  // x on the segment's line: the only hit is x itself.
  if (std::abs(cr) <= 1e-13 * std::hypot(ex, ey) * (1.0 + std::hypot(wx, wy))) return;
  const double t = cr / den;
  const double u = (wx * vy - wy * vx) / den;
  if (t <= tmin) return;
  if (!open_lo && u < -1e-12) return;
  if (!open_hi && u > 1.0 + 1e-12) return;
  out.push_back(t);
}

void sort_unique(std::vector<double>& t) {
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return b - a <= 1e-14 * (1.0 + b); }), t.end());
}

double seg_dist(double x, double y, const std::array<double, 2>& p, const std::array<double, 2>& q, bool open_lo,
                bool open_hi) {
  const double ex = q[0] - p[0], ey = q[1] - p[1];
  double u = ((x - p[0]) * ex + (y - p[1]) * ey) / (ex * ex + ey * ey);
  if (!open_lo) u = std::max(u, 0.0);
  if (!open_hi) u = std::min(u, 1.0);
  return std::hypot(x - p[0] - u * ex, y - p[1] - u * ey);
}

bool polygon_contains(const std::vector<std::array<double, 2>>& v, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i][1] > y) != (v[j][1] > y) &&
        x < (v[j][0] - v[i][0]) * (y - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0])
      in = !in;
  }
  return in;
}

// Piecewise-constant indicator along a ray: breakpoints and the state on
// each of the segments [0,t1], [t1,t2], ..., [tk, inf).
struct RayProfile {
  std::vector<double> t;
  std::vector<bool> inside;
};

RayProfile profile(const Shape& E, double x, double y, double vx, double vy, double tmin) {
  RayProfile r;
  r.t = E.crossings(x, y, vx, vy, tmin);
  sort_unique(r.t);
  const std::size_t k = r.t.size();
  for (std::size_t seg = 0; seg <= k; ++seg) {
    double tm;
    if (k == 0) tm = 1.0;
    else if (seg == 0) tm = 0.5 * r.t[0];
    else if (seg == k) tm = r.t[k - 1] + std::max(1.0, r.t[k - 1]);
    else tm = 0.5 * (r.t[seg - 1] + r.t[seg]);
    r.inside.push_back(E.contains(x + tm * vx, y + tm * vy));
  }
  return r;
}

// int_0^inf [f(x + t v) + f(x - t v)] t^{-1-2s} dt with f = +1 off E, -1 on E.
double paired_ray(const Shape& E, double x, double y, double vx, double vy, double s, double tmin) {
  const RayProfile a = profile(E, x, y, vx, vy, tmin);
  const RayProfile b = profile(E, x, y, -vx, -vy, tmin);
  std::vector<double> cuts = a.t;
  cuts.insert(cuts.end(), b.t.begin(), b.t.end());
  sort_unique(cuts);
  auto state = [](const RayProfile& r, double tm) {
    const std::size_t k = std::upper_bound(r.t.begin(), r.t.end(), tm) - r.t.begin();
    return r.inside[k] ? -1.0 : 1.0;
  };
  double acc = 0.0;
  double lo = 0.0;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    const double hi = i < cuts.size() ? cuts[i] : std::numeric_limits<double>::infinity();
    const double tm = i < cuts.size() ? 0.5 * (lo + hi) : lo + std::max(1.0, lo);
    const double g = state(a, tm) + state(b, tm);
    if (g != 0.0) {
      if (lo == 0.0) throw DomainError("curvature: point is not a regular boundary point");
      const double top = std::isinf(hi) ? 0.0 : std::pow(hi, -2.0 * s);
      acc += g * (std::pow(lo, -2.0 * s) - top) / (2.0 * s);
    }
    lo = hi;
  }
  return acc;
}

// Tangent from the centroid of E near x: the normal points from the
// centroid toward x.
double centroid_tangent(const Shape& E, double x, double y, double r) {
  constexpr int N = 32;
  double cx = 0.0, cy = 0.0;
  int cnt = 0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double px = x + r * (2.0 * (a + 0.5) / N - 1.0), py = y + r * (2.0 * (b + 0.5) / N - 1.0);
      if (std::hypot(px - x, py - y) > r || !E.contains(px, py)) continue;
      cx += px;
      cy += py;
      ++cnt;
    }
  if (cnt == 0 || cnt == N * N) return std::numeric_limits<double>::quiet_NaN();
  cx /= cnt;
  cy /= cnt;
  return wrap_pi(std::atan2(y - cy, x - cx) + 0.5 * kPi);
}

}  // namespace

double Shape::tangent_angle(double x, double y) const { return centroid_tangent(*this, x, y, 0.02 * (1.0 + extent())); }

Intervals::Intervals(std::vector<std::array<double, 2>> iv) : iv_(std::move(iv)) {
  std::sort(iv_.begin(), iv_.end());
  for (std::size_t k = 0; k < iv_.size(); ++k) {
    require(iv_[k][0] < iv_[k][1], "intervals: empty interval");
    if (k > 0) require(iv_[k - 1][1] < iv_[k][0], "intervals: intervals must be disjoint");
  }
}

bool Intervals::contains(double x, double) const {
  for (const auto& I : iv_)
    if (x >= I[0] && x <= I[1]) return true;
  return false;
}

std::vector<double> Intervals::crossings(double x, double, double vx, double, double tmin) const {
  std::vector<double> t;
  for (const auto& I : iv_)
    for (double e : I) {
      const double d = (e - x) / vx;
      if (d > tmin) t.push_back(d);
    }
  sort_unique(t);
  return t;
}

double Intervals::extent() const {
  double e = 0.0;
  for (const auto& I : iv_) e = std::max({e, std::abs(I[0]), std::abs(I[1])});
  return e;
}

Disc::Disc(double cx, double cy, double R) : cx_(cx), cy_(cy), R_(R) { require(R > 0.0, "disc: radius must be positive"); }

bool Disc::contains(double x, double y) const { return std::hypot(x - cx_, y - cy_) <= R_; }

std::vector<double> Disc::crossings(double x, double y, double vx, double vy, double tmin) const {
  const double wx = x - cx_, wy = y - cy_;
  const double vv = vx * vx + vy * vy;
  const double b = wx * vx + wy * vy;
  double c = wx * wx + wy * wy - R_ * R_;
  if (std::abs(c) <= 1e-13 * R_ * R_) c = 0.0;  // x on the circle
  const double disc = b * b - vv * c;
  std::vector<double> t;
  if (disc <= 0.0) return t;
  const double sq = std::sqrt(disc);
  // Stable roots of vv t^2 + 2 b t + c.
  const double q = -(b + std::copysign(sq, b));
  double t1 = q / vv, t2 = q != 0.0 ? c / q : -t1;
  if (t1 > t2) std::swap(t1, t2);
  if (t1 > tmin) t.push_back(t1);
  if (t2 > tmin) t.push_back(t2);
  return t;
}

double Disc::tangent_angle(double x, double y) const { return wrap_pi(std::atan2(y - cy_, x - cx_) + 0.5 * kPi); }

HalfPlane::HalfPlane(double px, double py, double nux, double nuy) : px_(px), py_(py) {
  const double L = std::hypot(nux, nuy);
  require(L > 0.0, "half-plane: zero normal");
  nx_ = nux / L;
  ny_ = nuy / L;
}

bool HalfPlane::contains(double x, double y) const { return (x - px_) * nx_ + (y - py_) * ny_ <= 0.0; }

std::vector<double> HalfPlane::crossings(double x, double y, double vx, double vy, double tmin) const {
  const double den = vx * nx_ + vy * ny_;
  std::vector<double> t;
  if (std::abs(den) < 1e-300) return t;
  const double off = (x - px_) * nx_ + (y - py_) * ny_;
  if (std::abs(off) <= 1e-13 * (1.0 + std::hypot(x - px_, y - py_))) return t;
  const double d = -off / den;
  if (d > tmin) t.push_back(d);
  return t;
}

double HalfPlane::tangent_angle(double, double) const { return wrap_pi(std::atan2(ny_, nx_) + 0.5 * kPi); }

Polygon::Polygon(std::vector<std::array<double, 2>> v) : v_(std::move(v)) {
  require(v_.size() >= 3, "polygon: need at least three vertices");
}

bool Polygon::contains(double x, double y) const { return polygon_contains(v_, x, y); }

std::vector<double> Polygon::crossings(double x, double y, double vx, double vy, double tmin) const {
  std::vector<double> t;
  for (std::size_t i = 0; i < v_.size(); ++i) hit_segment(x, y, vx, vy, v_[i], v_[(i + 1) % v_.size()], false, false, tmin, t);
  sort_unique(t);
  return t;
}

double Polygon::tangent_angle(double x, double y) const {
  double best = std::numeric_limits<double>::infinity();
  double ang = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const auto& p = v_[i];
    const auto& q = v_[(i + 1) % v_.size()];
    const double d = seg_dist(x, y, p, q, false, false);
    if (d < best) {
      best = d;
      ang = wrap_pi(std::atan2(q[1] - p[1], q[0] - p[0]));
    }
  }
  return ang;
}

double Polygon::extent() const {
  double e = 0.0;
  for (const auto& p : v_) e = std::max(e, std::hypot(p[0], p[1]));
  return e;
}

Polyline::Polyline(std::vector<std::array<double, 2>> v) : v_(std::move(v)) {
  require(v_.size() >= 2, "polyline: need at least two vertices");
  far_ = 1e6 * (1.0 + extent());
}

bool Polyline::contains(double x, double y) const {
  // Close the curve far away on its left.
  const auto& a = v_[0];
  const auto& b = v_[1];
  const auto& c = v_[v_.size() - 2];
  const auto& d = v_.back();
  auto unit = [](double ux, double uy) {
    const double L = std::hypot(ux, uy);
    return std::array<double, 2>{ux / L, uy / L};
  };
  const auto d0 = unit(b[0] - a[0], b[1] - a[1]);
  const auto d1 = unit(d[0] - c[0], d[1] - c[1]);
  std::vector<std::array<double, 2>> poly;
  const std::array<double, 2> s0{a[0] - far_ * d0[0], a[1] - far_ * d0[1]};
  const std::array<double, 2> s1{d[0] + far_ * d1[0], d[1] + far_ * d1[1]};
  poly.push_back(s0);
  poly.insert(poly.end(), v_.begin(), v_.end());
  poly.push_back(s1);
  poly.push_back({s1[0] - far_ * d1[1], s1[1] + far_ * d1[0]});
  poly.push_back({s0[0] - far_ * d0[1], s0[1] + far_ * d0[0]});
  return polygon_contains(poly, x, y);
}

std::vector<double> Polyline::crossings(double x, double y, double vx, double vy, double tmin) const {
  std::vector<double> t;
  const std::size_t k = v_.size() - 1;
  for (std::size_t i = 0; i < k; ++i) hit_segment(x, y, vx, vy, v_[i], v_[i + 1], i == 0, i + 1 == k, tmin, t);
  sort_unique(t);
  return t;
}

double Polyline::tangent_angle(double x, double y) const {
  double best = std::numeric_limits<double>::infinity();
  double ang = std::numeric_limits<double>::quiet_NaN();
  const std::size_t k = v_.size() - 1;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = seg_dist(x, y, v_[i], v_[i + 1], i == 0, i + 1 == k);
    if (d < best) {
      best = d;
      ang = wrap_pi(std::atan2(v_[i + 1][1] - v_[i][1], v_[i + 1][0] - v_[i][0]));
    }
  }
  return ang;
}

double Polyline::extent() const {
  double e = 0.0;
  for (const auto& p : v_) e = std::max(e, std::hypot(p[0], p[1]));
  return e;
}

MaskShape::MaskShape(LatticePtr lat, Mask E) : lattice_(std::move(lat)), E_(std::move(E)) {
  require(E_.size() == lattice_->size(), "mask shape: mask size does not match lattice");
}

bool MaskShape::contains(double x, double y) const {
  const long i = lattice_->locate(x, y);
  return i >= 0 && E_[i] != 0;
}

std::vector<double> MaskShape::crossings(double x, double y, double vx, double vy, double tmin) const {
  const Lattice& L = *lattice_;
  const auto o = L.origin();
  const auto hi = L.ext_hi();
  const double h = L.h();
  const int n = L.n();
  // Candidate breakpoints: every grid line the ray meets inside the lattice.
  std::vector<double> cand;
  auto lines = [&](double p, double v, double lo, double up, int count) {
    if (std::abs(v) < 1e-300) return;
    for (int k = 0; k <= count; ++k) {
      const double t = (lo + k * h - p) / v;
      if (t > tmin) cand.push_back(t);
    }
    (void)up;
  };
  lines(x, vx, o[0], hi[0], L.mx());
  if (n == 2) lines(y, vy, o[1], hi[1], L.my());
  sort_unique(cand);
  std::vector<double> t;
  bool prev = contains(x + 0.5 * (cand.empty() ? 1.0 : cand[0]) * vx, y + 0.5 * (cand.empty() ? 1.0 : cand[0]) * vy);
  for (std::size_t k = 0; k < cand.size(); ++k) {
    const double tm = k + 1 < cand.size() ? 0.5 * (cand[k] + cand[k + 1]) : cand[k] + h;
    const bool cur = contains(x + tm * vx, y + tm * vy);
    if (cur != prev) t.push_back(cand[k]);
    prev = cur;
  }
  return t;
}

double MaskShape::extent() const {
  const auto o = lattice_->origin();
  const auto hi = lattice_->ext_hi();
  return std::max(std::hypot(o[0], o[1]), std::hypot(hi[0], hi[1]));
}

double MaskShape::tangent_angle(double x, double y) const { return centroid_tangent(*this, x, y, 3.0 * lattice_->h()); }

std::array<double, 2> MaskShape::snap(double x, double y) const {
  const Lattice& L = *lattice_;
  const double h = L.h();
  const auto o = L.origin();
  const int n = L.n();
  const long cx = static_cast<long>(std::floor((x - o[0]) / h));
  const long cy = n == 2 ? static_cast<long>(std::floor((y - o[1]) / h)) : 0;
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 2> out{0.0, 0.0};
  auto in = [&](long ix, long iy) {
    if (ix < 0 || ix >= L.mx() || iy < 0 || iy >= L.my()) return false;
    return E_[L.index(static_cast<int>(ix), static_cast<int>(iy))] != 0;
  };
  auto consider = [&](double fx, double fy) {
    const double d = std::hypot(fx - x, fy - y);
    if (d < best) {
      best = d;
      out = {fx, fy};
    }
  };
  const long ry = n == 2 ? 2 : 0;
  for (long jy = cy - ry; jy <= cy + ry; ++jy)
    for (long jx = cx - 2; jx <= cx + 2; ++jx) {
      const double mx = o[0] + (jx + 0.5) * h, my = n == 2 ? o[1] + (jy + 0.5) * h : 0.0;
      if (in(jx, jy) != in(jx + 1, jy)) consider(mx + 0.5 * h, my);
      if (n == 2 && in(jx, jy) != in(jx, jy + 1)) consider(mx, my + 0.5 * h);
    }
  if (!(best <= h * (1.0 + 1e-9))) throw DomainError("curvature: point is not within h of the boundary");
  return out;
}

double nonlocal_mean_curvature(const Shape& E, double x, double y, double s) {
  require(s > 0.0 && s < 0.5, "curvature: s must lie in (0, 1/2)");
  if (const auto* m = dynamic_cast<const MaskShape*>(&E)) {
    const auto p = m->snap(x, y);
    x = p[0];
    y = p[1];
  }
  const double tmin = 1e-12 * (1.0 + E.extent());
  if (E.dim() == 1) return paired_ray(E, x, y, 1.0, 0.0, s, tmin);

  double theta0 = E.tangent_angle(x, y);
  if (!std::isfinite(theta0)) throw DomainError("curvature: point is not on the boundary");
  // Directions psi in (0, pi) past the tangent; psi = (pi/2) tau^{1/(1-2s)}
  // on each half absorbs the tangential singularity.
  const GaussRule& g = gauss_legendre(48);
  const double e = 1.0 - 2.0 * s;
  const double tau_min = std::pow(1e-8 / (0.5 * kPi), e);
  CompensatedSum acc;
  for (int half = 0; half < 2; ++half)
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      // Directions closer than phi_min to the tangent meet the boundary
      // below the crossing resolution; the integrand is flat in tau there.
      const double tau = std::max(0.5 * (g.nodes[q] + 1.0), tau_min);
      const double phi = 0.5 * kPi * std::pow(tau, 1.0 / e);
      const double dphi = 0.5 * kPi / e * std::pow(tau, 2.0 * s / e);
      const double psi = half == 0 ? phi : kPi - phi;
      const double th = theta0 + psi;
      acc += 0.5 * g.weights[q] * dphi * paired_ray(E, x, y, std::cos(th), std::sin(th), s, tmin);
    }
  return acc.value();
}

double nonlocal_mean_curvature_1d(const std::vector<double>& boundary, double x, double s) {
  require(boundary.size() % 2 == 0 && !boundary.empty(), "curvature: need an even number of boundary points");
  std::vector<std::array<double, 2>> iv;
  for (std::size_t k = 0; k < boundary.size(); k += 2) iv.push_back({boundary[k], boundary[k + 1]});
  return nonlocal_mean_curvature(Intervals(std::move(iv)), x, 0.0, s);
}

double curvature_rhs_fhk(const LabelField& labels, const SigmaMatrix& sigma, int h_idx, int k_idx, double x,
                         double y, const KernelTable& kt) {
  const Lattice& L = kt.lattice();
  labels.validate();
  const int m = labels.m;
  require(m >= 3, "f_hk: needs at least three phases");
  require(sigma.m() == m, "f_hk: sigma size does not match labels");
  require(h_idx != k_idx, "f_hk: h and k must differ");
  require(h_idx >= 0 && h_idx < m && k_idx >= 0 && k_idx < m, "f_hk: phase index out of range");
  const long c = L.locate(x, y);
  require(c >= 0, "f_hk: point outside the lattice");
  const std::size_t ci = static_cast<std::size_t>(c);
  std::vector<CompensatedSum> mass(m);
  for (std::size_t j = 0; j < L.size(); ++j) {
    if (j == ci) continue;
    mass[labels[j]] += kt.w_between(ci, j);
  }
  const double shk = sigma(h_idx, k_idx);
  double f = 0.0;
  for (int j = 0; j < m; ++j) {
    if (j == h_idx || j == k_idx) continue;
    const double coef = (shk + sigma(k_idx, j) - sigma(h_idx, j)) / shk;
    double I = mass[j].value() * L.cell_measure();
    if (j < kt.classes()) I += kt.tail(ci, j);
    f += coef * I;
  }
  return f;
}

}  // namespace fpl
