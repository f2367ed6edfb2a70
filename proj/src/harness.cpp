#include "fpl/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "fpl/error.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit: size mismatch");
  require(x.size() >= 2, "fit: need at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "fit: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "fit: abscissae must not all coincide");
  SlopeFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    rss += r * r;
    f.max_residual = std::max(f.max_residual, std::abs(r));
  }
  if (n > 2) {
    f.std_error = std::sqrt(rss / (n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    f.ci_lo = f.slope - t * f.std_error;
    f.ci_hi = f.slope + t * f.std_error;
  } else {
    f.ci_lo = f.ci_hi = f.slope;
  }
  return f;
}

std::vector<double> dyadic_eps(const Box& box, int k_lo, int k_hi) {
  require(k_lo <= k_hi, "eps list: empty range");
  const double width = box.hi[0] - box.lo[0];
  std::vector<double> out;
  for (int k = k_lo; k <= k_hi; ++k) out.push_back(std::ldexp(width, -k));
  return out;
}

namespace {

double default_collar(const Box& box, double collar) { return collar > 0.0 ? collar : 0.5 * (box.hi[0] - box.lo[0]); }

// Midpoints between neighbouring cells of different labels.
std::vector<std::array<double, 2>> interface_points(const LabelField& lab) {
  const Lattice& L = *lab.lattice;
  std::vector<std::array<double, 2>> pts;
  for (int iy = 0; iy < L.my(); ++iy)
    for (int ix = 0; ix < L.mx(); ++ix) {
      const std::size_t i = L.index(ix, iy);
      const auto c = L.center(i);
      if (ix + 1 < L.mx() && lab[L.index(ix + 1, iy)] != lab[i]) pts.push_back({c[0] + 0.5 * L.h(), c[1]});
      if (iy + 1 < L.my() && lab[L.index(ix, iy + 1)] != lab[i]) pts.push_back({c[0], c[1] + 0.5 * L.h()});
    }
  return pts;
}

std::vector<double> distance_to(const Lattice& L, const std::vector<std::array<double, 2>>& pts) {
  std::vector<double> d(L.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < L.size(); ++i) {
    const auto c = L.center(i);
    for (const auto& p : pts) d[i] = std::min(d[i], std::hypot(c[0] - p[0], c[1] - p[1]));
  }
  return d;
}

// Distance from cell centres to the boundary of the box.
double box_depth(const Lattice& L, std::size_t i) {
  const auto c = L.center(i);
  double d = std::min(c[0] - L.box().lo[0], L.box().hi[0] - c[0]);
  if (L.n() == 2) d = std::min({d, c[1] - L.box().lo[1], L.box().hi[1] - c[1]});
  return d;
}

}  // namespace

SweepResult sweep_eps(const SweepConfig& cfg) {
  require(!cfg.eps.empty(), "sweep: empty eps list");
  require(cfg.cells >= 8, "sweep: too few cells");
  SweepResult res;
  res.eps_values = cfg.eps;
  std::sort(res.eps_values.begin(), res.eps_values.end(), std::greater<>());
  for (std::size_t k = 1; k < res.eps_values.size(); ++k)
    require(res.eps_values[k] < res.eps_values[k - 1], "sweep: eps values must be distinct");
  const double width = cfg.box.hi[0] - cfg.box.lo[0];
  const double h = width / cfg.cells;
  auto lat = build_lattice(cfg.n, h, cfg.box, default_collar(cfg.box, cfg.collar));
  auto kt = std::make_shared<const KernelTable>(lat, cfg.s, cfg.far);
  const FarValues far = far_values_from_wells(cfg.wells, kt->classes());
  auto W = std::make_shared<const ProductPotential>(cfg.wells);

  std::vector<VectorField> sols;
  for (double eps : res.eps_values) {
    ACProblem pb = make_problem(kt, cfg.wells, eps, far);
    pb.params = cfg.params;
    const ACSolution sol = solve_min(pb, Init::threshold());
    SweepRecord rec;
    rec.eps = eps;
    rec.h = h;
    rec.energy = sol.energy;
    rec.converged = sol.converged;
    rec.iterations = sol.iterations;
    rec.residual = sol.residual;
    if (cfg.theta_radius > 0.0) {
      const double cx = 0.5 * (cfg.box.lo[0] + cfg.box.hi[0]);
      const double cy = cfg.n == 2 ? 0.5 * (cfg.box.lo[1] + cfg.box.hi[1]) : 0.0;
      const ExtensionSlab slab =
          poisson_extend(sol.u, cfg.s, default_z_levels(h, cfg.theta_radius), cfg.far, far);
      rec.theta = density_theta(slab, eps, cx, cy, cfg.theta_radius, W.get());
    }
    res.records.push_back(rec);
    sols.push_back(sol.u);
    if (!sol.converged) {
      res.message = "solve did not converge at eps = " + std::to_string(eps) + ": " + sol.diagnostic;
      return res;
    }
  }

  // Limit labels from the finest run, K away from its interfaces.
  const LabelField star = threshold_to_labels(sols.back(), cfg.wells);
  const auto dist = distance_to(*lat, interface_points(star));
  res.K_distance = std::max(8.0 * h, width / 8.0);
  const Mask& inner = lat->interior_mask();
  std::vector<std::size_t> K, window;
  for (std::size_t i = 0; i < lat->size(); ++i) {
    if (!inner[i]) continue;
    if (dist[i] >= res.K_distance) K.push_back(i);
    if (box_depth(*lat, i) >= width / 8.0) window.push_back(i);
  }
  res.K_cells = K.size();
  require(!K.empty(), "sweep: the compact set K is empty");
  const double hn = lat->cell_measure();
  std::vector<double> lin, pot;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    auto& rec = res.records[k];
    const VectorField& u = sols[k];
    for (std::size_t i : K) {
      const Eigen::VectorXd& a = cfg.wells[star[i]];
      double d2 = 0.0;
      for (int c = 0; c < u.d; ++c) d2 += (u.at(i)[c] - a[c]) * (u.at(i)[c] - a[c]);
      rec.linf_K = std::max(rec.linf_K, std::sqrt(d2));
    }
    for (std::size_t i : window) rec.potential_integral += hn * W->value(u.cell(i));
    rec.transition_cells = count(transition_set(u, cfg.wells, 0.25 * cfg.wells.min_gap()));
    lin.push_back(rec.linf_K);
    pot.push_back(rec.potential_integral);
  }
  if (res.eps_values.size() >= 2) {
    if (std::all_of(lin.begin(), lin.end(), [](double v) { return v > 0.0; }))
      res.linf_fit = fit_slope(res.eps_values, lin);
    if (std::all_of(pot.begin(), pot.end(), [](double v) { return v > 0.0; }))
      res.potential_fit = fit_slope(res.eps_values, pot);
  }
  res.complete = true;
  return res;
}

void write_sweep_csv(const std::string& path, const SweepResult& r) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << std::setprecision(17);
  f << "eps,h,converged,iterations,residual,dirichlet,potential,total,linf_K,potential_integral,transition_cells,theta,"
       "slope_linf,slope_linf_lo,slope_linf_hi,slope_potential,slope_potential_lo,slope_potential_hi\n";
  for (const auto& rec : r.records) {
    f << rec.eps << ',' << rec.h << ',' << (rec.converged ? 1 : 0) << ',' << rec.iterations << ',' << rec.residual
      << ',' << rec.energy.dirichlet << ',' << rec.energy.potential << ',' << rec.energy.total << ',' << rec.linf_K
      << ',' << rec.potential_integral << ',' << rec.transition_cells << ',';
    if (std::isfinite(rec.theta)) f << rec.theta;
    f << ',' << r.linf_fit.slope << ',' << r.linf_fit.ci_lo << ',' << r.linf_fit.ci_hi << ','
      << r.potential_fit.slope << ',' << r.potential_fit.ci_lo << ',' << r.potential_fit.ci_hi << '\n';
  }
}

GammaReport gamma_limit_check(const GammaConfig& cfg) {
  require(cfg.sigma.m() >= 2, "gamma check: sigma missing");
  Wells wells;
  if (cfg.wells) {
    wells = *cfg.wells;
  } else {
    const Embedding e = embed_sigma(cfg.sigma);
    require(e.embeddable && e.points, "gamma check: sigma is not embeddable");
    wells = *e.points;
  }
  require(static_cast<int>(wells.m()) == cfg.sigma.m(), "gamma check: wells and sigma disagree");
  require(cfg.far.classify != nullptr, "gamma check: missing exterior pattern");
  const int m = cfg.sigma.m();
  auto lat = build_lattice(1, cfg.h, cfg.box, default_collar(cfg.box, cfg.collar));
  auto kt = std::make_shared<const KernelTable>(lat, cfg.s, cfg.far);
  const FarValues far = far_values_from_wells(wells, kt->classes());
  const Mask& inner = lat->interior_mask();

  GammaReport rep;
  ACProblem pb = make_problem(kt, wells, cfg.eps, far);
  pb.params = cfg.params;
  const ACSolution sol = solve_min(pb, Init::threshold());
  rep.ac_converged = sol.converged;
  rep.labels_ac = threshold_to_labels(sol.u, wells);
  apply_collar(rep.labels_ac, cfg.far);
  rep.E_ac_labels = partition_energy(rep.labels_ac, inner, cfg.sigma, *kt).total;
  const double gamma = gamma_ns(FracParams{1, cfg.s});
  rep.diffuse_ratio = rep.E_ac_labels > 0.0 ? (2.0 / gamma) * sol.energy.dirichlet / rep.E_ac_labels : 0.0;

  PartitionProblem pp{kt, cfg.sigma, pattern_labels(lat, cfg.far, m), {}, cfg.schedule};
  const PartitionResult pr = solve_partition(pp);
  rep.partition_flip_stable = pr.flip_stable;
  rep.labels_direct = pr.labels;
  rep.E_direct = pr.energy.total;
  rep.rel_gap = rep.E_direct > 0.0 ? std::abs(rep.E_ac_labels - rep.E_direct) / rep.E_direct
                                   : std::abs(rep.E_ac_labels - rep.E_direct);

  rep.phases_ac.assign(m, 0);
  rep.phases_direct.assign(m, 0);
  // Cells within the margin of an interface of either field are not compared.
  std::vector<std::uint8_t> near(lat->size(), 0);
  for (const LabelField* lf : {&rep.labels_ac, &rep.labels_direct})
    for (int ix = 0; ix + 1 < lat->mx(); ++ix)
      if ((*lf)[ix] != (*lf)[ix + 1])
        for (int k = ix + 1 - cfg.interface_margin; k <= ix + cfg.interface_margin; ++k)
          if (k >= 0 && k < lat->mx()) near[k] = 1;
  for (std::size_t i = 0; i < lat->size(); ++i) {
    if (!inner[i]) continue;
    ++rep.phases_ac[rep.labels_ac[i]];
    ++rep.phases_direct[rep.labels_direct[i]];
    if (near[i]) continue;
    ++rep.compared_cells;
    if (rep.labels_ac[i] != rep.labels_direct[i]) ++rep.mismatches;
  }
  return rep;
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && !x.empty(), "extrapolation: bad nodes");
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double l = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) {
        require(x[i] != x[j], "extrapolation: repeated node");
        l *= (0.0 - x[j]) / (x[i] - x[j]);
      }
    v += l * y[i];
  }
  return v;
}

LimitTable s_to_half_limit(const std::vector<std::shared_ptr<const Covariogram>>& sets,
                           const std::vector<std::string>& names, const std::vector<double>& classical,
                           const std::vector<double>& s_values) {
  require(sets.size() >= 2, "limit: need at least two sets");
  require(names.size() == sets.size() && classical.size() == sets.size(), "limit: size mismatch");
  require(!s_values.empty(), "limit: no s values");
  for (std::size_t k = 0; k < s_values.size(); ++k) {
    require(s_values[k] > 0.0 && s_values[k] < 0.5, "limit: s must lie in (0, 1/2)");
    require(k == 0 || s_values[k] > s_values[k - 1], "limit: s values must increase");
  }
  LimitTable t;
  t.names = names;
  t.classical = classical;
  const std::size_t K = sets.size();
  for (double s : s_values) {
    LimitRow row;
    row.s = s;
    for (const auto& g : sets) row.normalized.push_back((1.0 - 2.0 * s) * perimeter_by_covariogram(*g, s));
    for (std::size_t k = 0; k < K; ++k) row.ratios.push_back(row.normalized[k] / row.normalized[0]);
    t.rows.push_back(row);
  }
  std::vector<double> x;
  for (double s : s_values) x.push_back(1.0 - 2.0 * s);
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> y;
    for (const auto& row : t.rows) y.push_back(row.normalized[k]);
    t.extrapolated.push_back(extrapolate_to_zero(x, y));
  }
  for (std::size_t k = 0; k < K; ++k) {
    t.extrapolated_ratio.push_back(t.extrapolated[k] / t.extrapolated[0]);
    t.classical_ratio.push_back(classical[k] / classical[0]);
  }
  return t;
}

void write_limit_csv(const std::string& path, const LimitTable& t) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << std::setprecision(17);
  f << "s";
  for (const auto& n : t.names) f << ",normalized_" << n;
  for (const auto& n : t.names) f << ",ratio_" << n;
  f << '\n';
  for (const auto& row : t.rows) {
    f << row.s;
    for (double v : row.normalized) f << ',' << v;
    for (double v : row.ratios) f << ',' << v;
    f << '\n';
  }
  f << "extrapolated";
  for (double v : t.extrapolated) f << ',' << v;
  for (double v : t.extrapolated_ratio) f << ',' << v;
  f << "\nclassical";
  for (double v : t.classical) f << ',' << v;
  for (double v : t.classical_ratio) f << ',' << v;
  f << '\n';
}

AuditReport monotonicity_audit(const ExtensionSlab& slab, std::optional<double> eps, const Potential* W,
                               const std::vector<std::array<double, 2>>& centers, std::vector<double> radii,
                               double budget_factor) {
  require(!radii.empty(), "audit: no radii");
  std::sort(radii.begin(), radii.end());
  const double h = slab.lattice->h();
  AuditReport rep;
  rep.budget_factor = budget_factor;
  for (const auto& c : centers) {
    AuditEntry e;
    e.x0 = c[0];
    e.y0 = c[1];
    e.radii = radii;
    for (double r : radii) e.theta.push_back(density_theta(slab, eps, c[0], c[1], r, W));
    e.flagged.assign(radii.size(), 0);
    for (std::size_t k = 1; k < radii.size(); ++k) {
      const double budget = budget_factor * h / radii[k - 1];
      if (e.theta[k] < e.theta[k - 1] - budget * std::abs(e.theta[k - 1])) {
        e.flagged[k] = 1;
        ++e.violations;
      }
    }
    rep.violations += e.violations;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

void write_audit_csv(const std::string& path, const AuditReport& r) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << std::setprecision(17);
  f << "x0,y0,r,theta,violation\n";
  for (const auto& e : r.entries)
    for (std::size_t k = 0; k < e.radii.size(); ++k)
      f << e.x0 << ',' << e.y0 << ',' << e.radii[k] << ',' << e.theta[k] << ',' << int{e.flagged[k]} << '\n';
}

BoxCount box_counting_dim(const Lattice& L, const Mask& mask, int k_min, int k_max) {
  require(mask.size() == L.size(), "box counting: mask size mismatch");
  require(k_min >= 0, "box counting: negative scale");
  BoxCount bc;
  if (count(mask) == 0) return bc;  // undefined for the empty set
  const int extent = std::min(L.mx(), L.n() == 2 ? L.my() : L.mx());
  if (k_max < 0) {
    k_max = k_min;
    while ((extent >> (k_max + 1)) >= 4) ++k_max;
  }
  // box grid anchored at the lower corner of the mask's bounding box
  int x0 = L.mx(), y0 = L.my();
  for (std::size_t i = 0; i < L.size(); ++i)
    if (mask[i]) {
      x0 = std::min(x0, L.ix(i));
      y0 = std::min(y0, L.iy(i));
    }
  for (int k = k_min; k <= k_max; ++k) {
    const int b = 1 << k;
    const int bx = (L.mx() - x0 + b - 1) / b, by = (L.my() - y0 + b - 1) / b;
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(bx) * by, 0);
    for (std::size_t i = 0; i < L.size(); ++i)
      if (mask[i]) hit[static_cast<std::size_t>((L.iy(i) - y0) / b) * bx + (L.ix(i) - x0) / b] = 1;
    bc.sizes.push_back(b * L.h());
    bc.counts.push_back(static_cast<double>(std::count(hit.begin(), hit.end(), 1)));
  }
  if (bc.sizes.size() < 4) return bc;
  std::vector<double> inv;
  for (double d : bc.sizes) inv.push_back(1.0 / d);
  bc.fit = fit_slope(inv, bc.counts);
  bc.dimension = bc.fit.slope;
  bc.valid = true;
  return bc;
}

Reference1D solve_reference_1d(double s, double h, double eps) {
  Reference1D ref;
  auto lat = build_lattice(1, h, Box::interval(-1.0, 1.0), 1.0);
  const Pattern far = Pattern::step(0.0, 0, 1, 2);
  ref.kernel = std::make_shared<const KernelTable>(lat, s, far);
  const Wells wells = wells_1d({-1.0, 1.0});
  ref.problem = make_problem(ref.kernel, wells, eps, far_values_from_wells(wells, 2));
  ref.solution = solve_min(ref.problem, Init::threshold());
  return ref;
}

std::string tool_version() { return "1.0.0"; }

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << "command = " << m.command << '\n';
  f << "config_hash = " << m.config_hash << '\n';
  f << "seed = " << m.seed << '\n';
  f << "version = " << tool_version() << '\n';
  for (const auto& o : m.outputs) f << "output = " << o << '\n';
}

}  // namespace fpl
