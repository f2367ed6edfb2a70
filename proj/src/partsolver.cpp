#include "fpl/partsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "fpl/convolution.hpp"
#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

const Mask& PartitionProblem::window() const { return omega.empty() ? kernel->lattice().interior_mask() : omega; }

void PartitionProblem::validate() const {
  require(kernel != nullptr, "partition: missing kernel");
  require(exterior.lattice != nullptr && exterior.cells() == kernel->lattice().size(),
          "partition: labels are on another lattice");
  exterior.validate();
  require(sigma.m() == exterior.m, "partition: sigma size does not match labels");
  require(kernel->classes() <= exterior.m, "partition: far classes exceed phases");
  require(omega.empty() || omega.size() == exterior.cells(), "partition: window size mismatch");
  require(schedule.cooling > 0.0 && schedule.cooling < 1.0, "partition: cooling must lie in (0,1)");
  require(schedule.sweeps >= 0, "partition: negative sweep count");
}

double flip_delta(const LabelField& labels, std::size_t cell, int new_label, const Mask& omega,
                  const SigmaMatrix& sigma, const KernelTable& kt) {
  const Lattice& L = kt.lattice();
  require(cell < L.size(), "flip: cell out of range");
  require(new_label >= 0 && new_label < labels.m, "flip: label out of range");
  const int a = labels[cell];
  require(new_label != a, "flip: new label equals the current one");
  require(omega.size() == L.size(), "flip: window size mismatch");
  const int b = new_label;
  const bool in_c = omega[cell] != 0;
  CompensatedSum acc;
  for (std::size_t j = 0; j < L.size(); ++j) {
    if (j == cell || (!in_c && !omega[j])) continue;
    const int l = labels[j];
    const double ds = sigma(b, l) - sigma(a, l);
    if (ds != 0.0) acc += kt.w_between(cell, j) * ds;
  }
  const double hn = L.cell_measure();
  double t = 0.0;
  if (in_c)
    for (int q = 0; q < kt.classes(); ++q) t += kt.tail(cell, q) * (sigma(b, q) - sigma(a, q));
  return acc.value() * hn * hn + t * hn;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Per-cell label masses A_c[l] = sum_{j != c} w_cj [l_j = l] for cells of the window.
class LabelMasses {
 public:
  LabelMasses(const LabelField& lab, const Mask& omega, const KernelTable& kt)
      : kt_(kt), m_(lab.m), L_(kt.lattice()) {
    for (std::size_t i = 0; i < L_.size(); ++i)
      if (omega[i]) cells_.push_back(i);
    pos_.assign(L_.size(), -1);
    for (std::size_t k = 0; k < cells_.size(); ++k) pos_[cells_[k]] = static_cast<long>(k);
    A_.assign(cells_.size() * m_, 0.0);
    const Convolver conv = Convolver::linear(L_.mx(), L_.my(), [&kt](int dx, int dy) { return kt.w(dx, dy); });
    std::vector<double> in(L_.size()), out(L_.size());
    for (int l = 0; l < m_; ++l) {
      for (std::size_t i = 0; i < L_.size(); ++i) in[i] = lab[i] == l ? 1.0 : 0.0;
      conv.apply(in, out);
      for (std::size_t k = 0; k < cells_.size(); ++k) A_[k * m_ + l] = out[cells_[k]];
    }
  }
  const std::vector<std::size_t>& cells() const { return cells_; }
  const double* at(std::size_t k) const { return &A_[k * m_]; }
  void flip(std::size_t cell, int from, int to) {
    const int cx = L_.ix(cell), cy = L_.iy(cell);
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const std::size_t i = cells_[k];
      if (i == cell) continue;
      const double w = kt_.w(L_.ix(i) - cx, L_.iy(i) - cy);
      A_[k * m_ + from] -= w;
      A_[k * m_ + to] += w;
    }
  }

 private:
  const KernelTable& kt_;
  int m_;
  const Lattice& L_;
  std::vector<std::size_t> cells_;
  std::vector<long> pos_;
  std::vector<double> A_;
};

double local_delta(const LabelMasses& M, std::size_t k, std::size_t cell, int a, int b, const SigmaMatrix& sigma,
                   const KernelTable& kt, int m, double hn) {
  const double* A = M.at(k);
  double pair = 0.0;
  for (int l = 0; l < m; ++l) pair += A[l] * (sigma(b, l) - sigma(a, l));
  double t = 0.0;
  for (int q = 0; q < kt.classes(); ++q) t += kt.tail(cell, q) * (sigma(b, q) - sigma(a, q));
  return pair * hn * hn + t * hn;
}

// Size of the terms entering a flip delta at `cell`, for relative tolerances.
double delta_scale(const KernelTable& kt, std::size_t cell, const SigmaMatrix& sigma) {
  const double hn = kt.lattice().cell_measure();
  return sigma.max_offdiag() * (hn * hn * kt.row_sum(cell) + hn * kt.tail_total(cell));
}

}  // namespace

double most_negative_flip(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma, const KernelTable& kt) {
  LabelMasses M(labels, omega, kt);
  const double hn = kt.lattice().cell_measure();
  double worst = 0.0;
  for (std::size_t k = 0; k < M.cells().size(); ++k) {
    const std::size_t c = M.cells()[k];
    for (int b = 0; b < labels.m; ++b)
      if (b != labels[c]) worst = std::min(worst, local_delta(M, k, c, labels[c], b, sigma, kt, labels.m, hn));
  }
  return worst;
}

bool is_flip_stable(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma, const KernelTable& kt,
                    double rel_tol) {
  LabelMasses M(labels, omega, kt);
  const double hn = kt.lattice().cell_measure();
  for (std::size_t k = 0; k < M.cells().size(); ++k) {
    const std::size_t c = M.cells()[k];
    const double tol = rel_tol * delta_scale(kt, c, sigma);
    for (int b = 0; b < labels.m; ++b)
      if (b != labels[c] && local_delta(M, k, c, labels[c], b, sigma, kt, labels.m, hn) < -tol) return false;
  }
  return true;
}

PartitionResult solve_partition(const PartitionProblem& pb) {
  pb.validate();
  const KernelTable& kt = *pb.kernel;
  const Lattice& L = kt.lattice();
  const Mask& omega = pb.window();
  const int m = pb.exterior.m;
  const double hn = L.cell_measure();
  LabelField lab = pb.exterior;
  PartitionResult res;
  res.initial_energy = partition_energy(lab, omega, pb.sigma, kt).total;

  std::mt19937_64 rng(pb.schedule.seed);
  auto propose = [&](int a) {
    int b = static_cast<int>(uniform01(rng) * (m - 1));
    if (b >= m - 1) b = m - 2;
    return b >= a ? b + 1 : b;
  };

  {
    LabelMasses M(lab, omega, kt);
    const auto& cells = M.cells();
    if (!cells.empty() && pb.schedule.sweeps > 0) {
      double T = pb.schedule.T0;
      if (T <= 0.0) {
        std::vector<double> probe;
        for (int k = 0; k < pb.schedule.probe; ++k) {
          const std::size_t idx = static_cast<std::size_t>(uniform01(rng) * cells.size()) % cells.size();
          const std::size_t c = cells[idx];
          probe.push_back(std::abs(local_delta(M, idx, c, lab[c], propose(lab[c]), pb.sigma, kt, m, hn)));
        }
        std::nth_element(probe.begin(), probe.begin() + probe.size() / 2, probe.end());
        T = probe[probe.size() / 2];
        if (!(T > 0.0)) T = 1e-12;
      }
      for (int sweep = 0; sweep < pb.schedule.sweeps; ++sweep, T *= pb.schedule.cooling) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
          const std::size_t c = cells[k];
          const int a = lab[c];
          const int b = propose(a);
          const double d = local_delta(M, k, c, a, b, pb.sigma, kt, m, hn);
          if (d < 0.0 || uniform01(rng) < std::exp(-d / T)) {
            M.flip(c, a, b);
            lab.labels[c] = static_cast<std::uint16_t>(b);
            ++res.accepted;
          }
        }
      }
    }
  }

  // Zero temperature from freshly computed masses: steepest single flips
  // until no flip lowers the energy beyond round-off. Run from the annealed
  // state and from the initial one; the lower energy is kept.
  auto descend = [&](LabelField& f) {
    LabelMasses M(f, omega, kt);
    const auto& cells = M.cells();
    int sweeps = 0;
    bool changed = true;
    while (changed && sweeps < pb.schedule.max_zero_sweeps) {
      changed = false;
      ++sweeps;
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const std::size_t c = cells[k];
        const int a = f[c];
        const double tol = 1e-13 * delta_scale(kt, c, pb.sigma);
        int best = -1;
        double bd = -tol;
        for (int b = 0; b < m; ++b) {
          if (b == a) continue;
          const double d = local_delta(M, k, c, a, b, pb.sigma, kt, m, hn);
          if (d < bd) {
            bd = d;
            best = b;
          }
        }
        if (best >= 0) {
          M.flip(c, a, best);
          f.labels[c] = static_cast<std::uint16_t>(best);
          changed = true;
          ++res.accepted;
        }
      }
    }
    return sweeps;
  };
  res.zero_sweeps = descend(lab);
  double E = partition_energy(lab, omega, pb.sigma, kt).total;
  if (pb.schedule.sweeps > 0) {
    LabelField alt = pb.exterior;
    const int zs = descend(alt);
    const double Ea = partition_energy(alt, omega, pb.sigma, kt).total;
    if (Ea < E) {
      lab = std::move(alt);
      res.zero_sweeps = zs;
    }
  }
  res.flip_stable = is_flip_stable(lab, omega, pb.sigma, kt);
  res.energy = partition_energy(lab, omega, pb.sigma, kt);
  res.labels = std::move(lab);
  return res;
}

NonInfiltrationCert noninfiltration_constant(const SigmaMatrix& sigma, double s, int n, double P,
                                             std::optional<Regime> regime) {
  require(n == 1 || n == 2, "non-infiltration: n must be 1 or 2");
  require(s > 0.0 && s < 0.5, "non-infiltration: s must lie in (0, 1/2)");
  require(P > 0.0 && std::isfinite(P), "non-infiltration: unit-ball perimeter must be positive");
  NonInfiltrationCert c;
  c.n = n;
  c.s = s;
  c.q = sigma.q;
  c.sigma_min = sigma.min_offdiag();
  c.sigma_max = sigma.max_offdiag();
  c.p2s_unit_ball = P;
  const double e = n / (2.0 * s);
  const double wn = std::pow(omega_k(n), 2.0 - 2.0 * s / n);
  Regime r = Regime::General;
  if (regime) {
    r = *regime;
    if (!sigma.has(r)) {
      c.formula = "NoCertificate";
      return c;
    }
  } else {
    for (Regime cand : {Regime::NearlyHomogeneous, Regime::STI3, Regime::SITI3})
      if (sigma.has(cand)) {
        r = cand;
        break;
      }
  }
  c.regime = r;
  switch (r) {
    case Regime::NearlyHomogeneous:
      c.constant = std::pow(s * (1.0 - sigma.q) * (1.0 - 2.0 * s) * P / (std::pow(2.0, e) * 3.0 * n * wn), e);
      for (int i = 0; i < sigma.m(); ++i) c.phases.push_back(i);
      c.formula = "p1";
      break;
    case Regime::STI3: {
      c.alpha_min = *std::min_element(sigma.alpha->begin(), sigma.alpha->end());
      c.constant =
          std::pow(s * c.alpha_min * (1.0 - 2.0 * s) * P / (std::pow(2.0, 1.0 + e) * n * wn * c.sigma_max), e);
      c.phases = {0, 1, 2};
      c.formula = "p2";
      break;
    }
    case Regime::SITI3:
      c.constant =
          std::pow(s * c.sigma_min * (1.0 - 2.0 * s) * P / (std::pow(2.0, 1.0 + e) * n * wn * c.sigma_max), e);
      c.phases = {sigma.siti_pair->first, sigma.siti_pair->second};
      c.formula = "p3";
      break;
    case Regime::General:
      c.formula = "NoCertificate";
      return c;
  }
  c.valid = c.constant > 0.0;
  return c;
}

std::string to_string(BallVerdict v) {
  switch (v) {
    case BallVerdict::NotApplicable: return "not-applicable";
    case BallVerdict::Satisfied: return "satisfied";
    case BallVerdict::Violated: return "violated";
  }
  return "?";
}

std::vector<BallCheck> check_noninfiltration(const LabelField& labels, const NonInfiltrationCert& cert,
                                             const Mask& omega, double r_max) {
  std::vector<BallCheck> out;
  if (!cert.valid) return out;
  const Lattice& L = *labels.lattice;
  require(omega.size() == L.size(), "non-infiltration: window size mismatch");
  const int n = L.n();
  const double h = L.h();
  const double hn = L.cell_measure();
  // Bounding box of the window.
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  for (std::size_t i = 0; i < L.size(); ++i)
    if (omega[i]) {
      const auto c = L.center(i);
      for (int k = 0; k < n; ++k) {
        lo[k] = std::min(lo[k], c[k] - 0.5 * h);
        hi[k] = std::max(hi[k], c[k] + 0.5 * h);
      }
    }
  if (lo[0] > hi[0]) return out;
  if (r_max <= 0.0) r_max = 0.25 * (hi[0] - lo[0]);
  for (double r = r_max; r >= 2.0 * h; r *= 0.5) {
    const int step = std::max(1, static_cast<int>(std::floor(0.5 * r / h)));
    const int rc = static_cast<int>(std::ceil(r / h)) + 1;
    for (int cy = 0; cy < L.my(); cy += (n == 2 ? step : 1)) {
      for (int cx = 0; cx < L.mx(); cx += step) {
        const std::size_t ci = L.index(cx, cy);
        const auto x0 = L.center(ci);
        // Ball inside the window: every cell meeting it belongs to omega.
        bool inside = true;
        std::vector<double> meas(labels.m, 0.0), half(labels.m, 0.0);
        for (int dy = (n == 2 ? -rc : 0); dy <= (n == 2 ? rc : 0) && inside; ++dy)
          for (int dx = -rc; dx <= rc; ++dx) {
            const long jx = cx + dx, jy = cy + dy;
            const double ddx = std::max(0.0, std::abs(dx) - 0.5) * h, ddy = std::max(0.0, std::abs(dy) - 0.5) * h;
            if (std::hypot(ddx, ddy) >= r) continue;  // cell misses the ball
            if (jx < 0 || jy < 0 || jx >= L.mx() || jy >= L.my() || !omega[L.index(jx, jy)]) {
              inside = false;
              break;
            }
            const double dc = std::hypot(dx * h, dy * h);
            const int l = labels[L.index(jx, jy)];
            if (dc < r) meas[l] += hn;
            if (dc < 0.5 * r) half[l] += hn;
          }
        if (!inside) continue;
        for (int ph : cert.phases) {
          BallCheck b;
          b.x = x0[0];
          b.y = x0[1];
          b.r = r;
          b.phase = ph;
          b.measure = meas[ph];
          b.half_measure = half[ph];
          if (b.measure <= cert.constant * std::pow(r, n))
            b.verdict = b.half_measure == 0.0 ? BallVerdict::Satisfied : BallVerdict::Violated;
          out.push_back(b);
        }
      }
      if (n == 1) break;
    }
  }
  return out;
}

std::size_t count_violations(const std::vector<BallCheck>& checks) {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(),
                                                [](const BallCheck& b) { return b.verdict == BallVerdict::Violated; }));
}

void write_certificate_csv(const std::string& path, const NonInfiltrationCert& cert,
                           const std::vector<BallCheck>& checks) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << std::setprecision(17);
  f << "key,value\n";
  f << "certificate," << (cert.valid ? cert.formula : "NoCertificate") << '\n';
  f << "regime," << to_string(cert.regime) << '\n';
  f << "constant," << cert.constant << '\n';
  f << "phases,\"";
  for (std::size_t k = 0; k < cert.phases.size(); ++k) f << (k ? " " : "") << cert.phases[k] + 1;
  f << "\"\n";
  f << "n," << cert.n << "\ns," << cert.s << "\nq," << cert.q << "\nalpha_min," << cert.alpha_min << "\nsigma_min,"
    << cert.sigma_min << "\nsigma_max," << cert.sigma_max << "\np2s_unit_ball," << cert.p2s_unit_ball << '\n';
  f << "balls_checked," << checks.size() << "\nviolations," << count_violations(checks) << '\n';
  f << "\nx,y,r,phase,measure,half_measure,verdict\n";
  for (const auto& b : checks)
    f << b.x << ',' << b.y << ',' << b.r << ',' << b.phase + 1 << ',' << b.measure << ',' << b.half_measure << ','
      << to_string(b.verdict) << '\n';
}

double siti_strip_halfwidth(const SigmaMatrix& sigma, int n) {
  require(sigma.has(Regime::SITI3) && sigma.siti_pair, "competitor: sigma is not SITI3");
  require(n >= 1, "competitor: n must be positive");
  const int i = sigma.siti_pair->first, j = sigma.siti_pair->second, k = 3 - i - j;
  const double ratio = omega_k(n - 1) / omega_k(n - 2 >= 0 ? n - 2 : 0);
  return std::min(1.0, ratio * (sigma(i, j) / (sigma(i, k) + sigma(k, j)) - 1.0)) / 3.0;
}

CompetitorResult siti_competitor_test(const SigmaMatrix& sigma, double s, double h, double collar) {
  require(sigma.has(Regime::SITI3) && sigma.siti_pair, "competitor: sigma is not SITI3");
  CompetitorResult r;
  r.i0 = sigma.siti_pair->first;
  r.j0 = sigma.siti_pair->second;
  r.k0 = 3 - r.i0 - r.j0;
  r.strip_halfwidth = siti_strip_halfwidth(sigma, 2);
  auto lat = build_lattice(2, h, Box::rect(-1, 1, -1, 1), collar);
  // Label i0 above the x-axis, j0 below.
  const Pattern far = Pattern::halfplane(0.0, 0.0, 0.0, 1.0, r.j0, r.i0, 3);
  const KernelTable kt(lat, s, far);
  const Mask D = disc_mask(*lat, 0.0, 0.0, 1.0);
  LabelField flat = pattern_labels(lat, far, 3);
  LabelField strip = flat;
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const auto c = lat->center(i);
    if (std::abs(c[0]) < 0.5 && std::abs(c[1]) < r.strip_halfwidth) strip.labels[i] = static_cast<std::uint16_t>(r.k0);
  }
  r.flat = partition_energy(flat, D, sigma, kt).total;
  r.strip = partition_energy(strip, D, sigma, kt).total;
  r.margin = r.flat - r.strip;
  return r;
}

}  // namespace fpl
