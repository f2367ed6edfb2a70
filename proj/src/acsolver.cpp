#include "fpl/acsolver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>

#include "fpl/error.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  f << "iter,energy,residual,step\n" << std::setprecision(17);
  for (const auto& t : trace) f << t.iter << ',' << t.energy << ',' << t.residual << ',' << t.step << '\n';
}

double ACProblem::tol() const {
  return params.tol > 0.0 ? params.tol : 1e-8 * std::pow(eps, -2.0 * kernel->s());
}

void ACProblem::validate() const {
  require(kernel != nullptr, "problem: missing kernel");
  require(W != nullptr, "problem: missing potential");
  require(std::isfinite(eps) && eps > 0.0, "problem: eps must be positive");
  require(g.lattice != nullptr && g.cells() == lattice().size(), "problem: exterior data is on another lattice");
  require(g.d == W->dim(), "problem: exterior data dimension mismatch");
  require(g.finite(), "problem: exterior data must be finite");
  require(static_cast<int>(far.size()) == kernel->classes(), "problem: far values do not match classes");
  for (const auto& v : far) require(v.size() == g.d && v.allFinite(), "problem: bad far value");
}

VectorField pattern_field(const KernelTable& kt, const FarValues& far) {
  require(static_cast<int>(far.size()) == kt.classes(), "pattern field: far values do not match classes");
  const Lattice& L = kt.lattice();
  const int d = static_cast<int>(far.front().size());
  VectorField g(kt.lattice_ptr(), d);
  for (std::size_t i = 0; i < L.size(); ++i) {
    const auto c = L.center(i);
    const auto& v = far[kt.far()(c[0], c[1])];
    for (int k = 0; k < d; ++k) g.at(i)[k] = v[k];
  }
  return g;
}

ACProblem make_problem(std::shared_ptr<const KernelTable> kt, const Wells& wells, double eps, FarValues far) {
  ACProblem p;
  p.kernel = std::move(kt);
  p.W = std::make_shared<ProductPotential>(wells);
  p.eps = eps;
  p.far = std::move(far);
  p.g = pattern_field(*p.kernel, p.far);
  p.validate();
  return p;
}

Init Init::from(VectorField u) {
  Init i;
  i.kind = Kind::Field;
  i.field = std::move(u);
  return i;
}

Init Init::threshold() { return Init{}; }

Init Init::random(std::uint64_t seed, int restarts) {
  Init i;
  i.kind = Kind::Random;
  i.seed = seed;
  i.restarts = std::max(1, restarts);
  return i;
}

LatticeACOperator::LatticeACOperator(std::shared_ptr<const KernelTable> kt) : kt_(std::move(kt)) {
  const Lattice& L = kt_->lattice();
  const int C = L.collar_cells();
  const int nx = L.nx(), ny = L.n() == 2 ? L.ny() : 1;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) cells_.push_back(L.index(C + x, L.n() == 2 ? C + y : 0));
  const KernelTable& K = *kt_;
  conv_ = Convolver::linear(nx, ny, [&K](int dx, int dy) { return K.w(dx, dy); });
  gamma_ = gamma_ns({L.n(), K.s()});
  hn_ = L.cell_measure();
  for (auto i : cells_) {
    rs_.push_back(K.row_sum(i));
    tt_.push_back(K.tail_total(i));
    diag_.push_back(gamma_ * (hn_ * rs_.back() + tt_.back()));
  }
}

void LatticeACOperator::apply(std::span<const double> x, std::span<double> out) const {
  conv_.apply(x, out);
  for (std::size_t k = 0; k < cells_.size(); ++k)
    out[k] = gamma_ * (hn_ * (rs_[k] * x[k] - out[k]) + tt_[k] * x[k]);
}

std::vector<double> LatticeACOperator::affine(const VectorField& g, const FarValues& far) const {
  const KernelTable& K = *kt_;
  const Lattice& L = K.lattice();
  const int d = g.d;
  const Convolver full = Convolver::linear(L.mx(), L.my(), [&K](int dx, int dy) { return K.w(dx, dy); });
  std::vector<double> in(L.size()), c(L.size()), f(cells_.size() * d);
  for (int comp = 0; comp < d; ++comp) {
    for (std::size_t i = 0; i < L.size(); ++i) in[i] = L.interior(i) ? 0.0 : g.at(i)[comp];
    full.apply(in, c);
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const std::size_t i = cells_[k];
      double t = 0.0;
      for (int q = 0; q < K.classes(); ++q) t += K.tail(i, q) * far[q][comp];
      f[k * d + comp] = -gamma_ * (hn_ * c[i] + t);
    }
  }
  return f;
}

namespace {

double min_well_curvature(const Potential& W) {
  double kappa = std::numeric_limits<double>::infinity();
  for (const auto& a : W.zeros().points) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W.hessian({a.data(), static_cast<std::size_t>(a.size())}));
    kappa = std::min(kappa, es.eigenvalues().minCoeff());
  }
  return std::max(kappa, 0.0);
}

double sup_norm(const std::vector<double>& g, int d) {
  double m = 0.0;
  for (std::size_t i = 0; i * d < g.size(); ++i) {
    double s2 = 0.0;
    for (int k = 0; k < d; ++k) s2 += g[i * d + k] * g[i * d + k];
    m = std::max(m, std::sqrt(s2));
  }
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

struct DescentResult {
  double F = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
  std::string diagnostic;
  std::vector<TracePoint> trace;
};

// Minimizes F(x) = 1/2 <x, L x> + <f, x> + c + ieps sum_i W(x_i) starting
// from x, with F(x_start) = F0 supplied by the caller. `unit` converts F to
// reported energies.
class Descent {
 public:
  Descent(const ACOperator& op, const Potential& W, double ieps, int d, const std::vector<double>& f,
          const SolverParams& p)
      : op_(op), W_(W), ieps_(ieps), d_(d), f_(f), p_(p), N_(op.size()), buf_in_(N_), buf_out_(N_) {}

  void applyL(const std::vector<double>& x, std::vector<double>& out) const {
    out.resize(x.size());
    for (int c = 0; c < d_; ++c) {
      for (std::size_t i = 0; i < N_; ++i) buf_in_[i] = x[i * d_ + c];
      op_.apply(buf_in_, buf_out_);
      for (std::size_t i = 0; i < N_; ++i) out[i * d_ + c] = buf_out_[i];
    }
  }

  void gradient(const std::vector<double>& x, const std::vector<double>& Lx, std::vector<double>& g) const {
    g.resize(x.size());
    std::vector<double> gw(d_);
    for (std::size_t i = 0; i < N_; ++i) {
      W_.gradient({x.data() + i * d_, static_cast<std::size_t>(d_)}, gw);
      for (int c = 0; c < d_; ++c) {
        const std::size_t k = i * d_ + c;
        g[k] = Lx[k] + (f_.empty() ? 0.0 : f_[k]) + ieps_ * gw[c];
      }
    }
  }

  DescentResult run(std::vector<double>& x, double F0, double tol, double unit) const {
    DescentResult r;
    const std::size_t n = x.size();
    const double kappa = min_well_curvature(W_);
    std::vector<double> Dinv(n);
    const auto& diag = op_.diagonal();
    for (std::size_t i = 0; i < N_; ++i)
      for (int c = 0; c < d_; ++c) Dinv[i * d_ + c] = 1.0 / std::max(diag[i] + ieps_ * kappa, 1e-300);

    std::vector<double> Lx, g, p(n), Lp, xt(n), gnew, q(n);
    applyL(x, Lx);
    gradient(x, Lx, g);
    double F = F0;
    std::deque<std::vector<double>> S, Y;
    std::deque<double> rho;
    int since_refresh = 0;
    double last_step = 0.0;

    for (int it = 0;; ++it) {
      const double res = sup_norm(g, d_);
      if (p_.record_trace) r.trace.push_back({it, F * unit, res, last_step});
      r.iterations = it;
      r.residual = res;
      if (res <= tol) {
        r.converged = true;
        break;
      }
      if (it >= p_.max_iters) {
        r.diagnostic = "iteration limit reached";
        break;
      }
      // Two-loop recursion with the diagonal preconditioner as H0.
      q = g;
      std::vector<double> alpha(S.size());
      for (std::size_t k = S.size(); k-- > 0;) {
        alpha[k] = rho[k] * dot(S[k], q);
        for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * Y[k][i];
      }
      for (std::size_t i = 0; i < n; ++i) q[i] *= Dinv[i];
      for (std::size_t k = 0; k < S.size(); ++k) {
        const double beta = rho[k] * dot(Y[k], q);
        for (std::size_t i = 0; i < n; ++i) q[i] += (alpha[k] - beta) * S[k][i];
      }
      for (std::size_t i = 0; i < n; ++i) p[i] = -q[i];
      double gp = dot(g, p);
      if (!(gp < 0.0)) {
        S.clear();
        Y.clear();
        rho.clear();
        for (std::size_t i = 0; i < n; ++i) p[i] = -Dinv[i] * g[i];
        gp = dot(g, p);
      }
      applyL(p, Lp);
      const double pLp = dot(p, Lp);
      CompensatedSum lin;
      for (std::size_t i = 0; i < n; ++i) lin += (Lx[i] + (f_.empty() ? 0.0 : f_[i])) * p[i];
      const double gl = lin.value();

      double a = 1.0, dF = 0.0;
      bool ok = false;
      while (a >= p_.min_step) {
        for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + a * p[i];
        CompensatedSum dW;
        for (std::size_t i = 0; i < N_; ++i)
          dW += W_.value({xt.data() + i * d_, static_cast<std::size_t>(d_)}) -
                W_.value({x.data() + i * d_, static_cast<std::size_t>(d_)});
        dF = a * gl + 0.5 * a * a * pLp + ieps_ * dW.value();
        if (std::isfinite(dF) && dF <= p_.armijo_c * a * gp) {
          ok = true;
          break;
        }
        a *= p_.backtrack;
      }
      if (!ok) {
        r.diagnostic = "line search failed at the minimum step";
        break;
      }
      if (!(dF < 0.0)) r.monotone = false;
      x.swap(xt);
      F += dF;
      last_step = a;
      if (++since_refresh >= p_.refresh) {
        applyL(x, Lx);
        since_refresh = 0;
      } else {
        for (std::size_t i = 0; i < n; ++i) Lx[i] += a * Lp[i];
      }
      gradient(x, Lx, gnew);
      std::vector<double> sv(n), yv(n);
      for (std::size_t i = 0; i < n; ++i) {
        sv[i] = a * p[i];
        yv[i] = gnew[i] - g[i];
      }
      const double sy = dot(sv, yv);
      if (sy > 1e-12 * std::sqrt(dot(sv, sv) * dot(yv, yv))) {
        S.push_back(std::move(sv));
        Y.push_back(std::move(yv));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(S.size()) > p_.memory) {
          S.pop_front();
          Y.pop_front();
          rho.pop_front();
        }
      }
      g.swap(gnew);
    }
    r.F = F;
    return r;
  }

 private:
  const ACOperator& op_;
  const Potential& W_;
  double ieps_;
  int d_;
  const std::vector<double>& f_;
  const SolverParams& p_;
  std::size_t N_;
  mutable std::vector<double> buf_in_, buf_out_;
};

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

VectorField initial_field(const ACProblem& pb, const Init& init, std::uint64_t seed) {
  const Lattice& L = pb.lattice();
  VectorField u = pb.g;
  const int d = u.d;
  switch (init.kind) {
    case Init::Kind::Field:
      require(init.field.lattice != nullptr && init.field.cells() == L.size() && init.field.d == d,
              "init: field does not match the problem");
      require(init.field.finite(), "init: field must be finite");
      for (std::size_t i = 0; i < L.size(); ++i)
        if (L.interior(i))
          for (int k = 0; k < d; ++k) u.at(i)[k] = init.field.at(i)[k];
      break;
    case Init::Kind::Threshold:
      // g is already the far pattern continued through every cell.
      break;
    case Init::Kind::Random: {
      Eigen::VectorXd lo = pb.W->zeros().points[0], hi = lo;
      for (const auto& a : pb.W->zeros().points) {
        lo = lo.cwiseMin(a);
        hi = hi.cwiseMax(a);
      }
      std::mt19937_64 rng(seed);
      for (std::size_t i = 0; i < L.size(); ++i)
        if (L.interior(i))
          for (int k = 0; k < d; ++k) {
            const double t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            u.at(i)[k] = lo[k] + t * (hi[k] - lo[k]);
          }
      break;
    }
  }
  return u;
}

ACSolution solve_once(const ACProblem& pb, const LatticeACOperator& op, const std::vector<double>& f, VectorField u,
                      std::uint64_t seed) {
  const Lattice& L = pb.lattice();
  const int d = u.d;
  const double hn = L.cell_measure();
  const double ieps = std::pow(pb.eps, -2.0 * pb.kernel->s());
  const Mask& omega = L.interior_mask();
  const EnergyReport e0 = ac_energy(u, pb.eps, *pb.W, omega, *pb.kernel, pb.far);
  if (!std::isfinite(e0.total)) throw DomainError("solve: initial energy is not finite");

  std::vector<double> x(op.size() * d);
  for (std::size_t k = 0; k < op.size(); ++k)
    for (int c = 0; c < d; ++c) x[k * d + c] = u.at(op.cells()[k])[c];
  Descent desc(op, *pb.W, ieps, d, f, pb.params);
  DescentResult r = desc.run(x, e0.total / hn, pb.tol(), hn);
  for (std::size_t k = 0; k < op.size(); ++k)
    for (int c = 0; c < d; ++c) u.at(op.cells()[k])[c] = x[k * d + c];

  ACSolution sol;
  sol.residual = residual_norm(pb, u);
  sol.converged = sol.residual <= pb.tol();
  sol.iterations = r.iterations;
  sol.monotone = r.monotone;
  sol.diagnostic = r.diagnostic;
  if (!sol.converged && sol.diagnostic.empty()) sol.diagnostic = "residual above tolerance after refresh";
  sol.trace = std::move(r.trace);
  sol.energy = ac_energy(u, pb.eps, *pb.W, omega, *pb.kernel, pb.far);
  sol.u = std::move(u);
  sol.seed = seed;
  return sol;
}

}  // namespace

ACSolution solve_min(const ACProblem& problem, const Init& init) {
  problem.validate();
  const LatticeACOperator op(problem.kernel);
  const std::vector<double> f = op.affine(problem.g, problem.far);
  if (init.kind != Init::Kind::Random)
    return solve_once(problem, op, f, initial_field(problem, init, init.seed), init.seed);
  std::optional<ACSolution> best;
  std::uint64_t state = init.seed;
  for (int r = 0; r < init.restarts; ++r) {
    const std::uint64_t seed = r == 0 ? init.seed : splitmix(state);
    ACSolution s = solve_once(problem, op, f, initial_field(problem, init, seed), seed);
    if (!best || s.energy.total < best->energy.total) best = std::move(s);
  }
  return std::move(*best);
}

VectorField residual(const ACProblem& problem, const VectorField& u) {
  problem.validate();
  require(u.cells() == problem.lattice().size() && u.d == problem.g.d, "residual: field does not match the problem");
  const LatticeACOperator op(problem.kernel);
  const std::vector<double> f = op.affine(problem.g, problem.far);
  const int d = u.d;
  const double ieps = std::pow(problem.eps, -2.0 * problem.kernel->s());
  std::vector<double> x(op.size()), Lx(op.size());
  VectorField r(u.lattice, d);
  for (int c = 0; c < d; ++c) {
    for (std::size_t k = 0; k < op.size(); ++k) x[k] = u.at(op.cells()[k])[c];
    op.apply(x, Lx);
    for (std::size_t k = 0; k < op.size(); ++k) r.at(op.cells()[k])[c] = Lx[k] + f[k * d + c];
  }
  std::vector<double> gw(d);
  for (auto i : op.cells()) {
    problem.W->gradient(u.cell(i), gw);
    for (int c = 0; c < d; ++c) r.at(i)[c] += ieps * gw[c];
  }
  return r;
}

double residual_norm(const ACProblem& problem, const VectorField& u) {
  const VectorField r = residual(problem, u);
  double m = 0.0;
  for (std::size_t i = 0; i < r.cells(); ++i) {
    double s2 = 0.0;
    for (int c = 0; c < r.d; ++c) s2 += r.at(i)[c] * r.at(i)[c];
    m = std::max(m, std::sqrt(s2));
  }
  return m;
}

std::vector<double> set_potential(const Mask& E, const KernelTable& kt, const std::vector<bool>& far_in_E) {
  const Lattice& L = kt.lattice();
  require(E.size() == L.size(), "set potential: mask size does not match lattice");
  require(static_cast<int>(far_in_E.size()) == kt.classes(), "set potential: far flags do not match classes");
  const double gam = gamma_ns({L.n(), kt.s()});
  const Convolver conv = Convolver::linear(L.mx(), L.my(), [&kt](int dx, int dy) { return kt.w(dx, dy); });
  std::vector<double> in(L.size()), c(L.size()), V(L.size(), 0.0);
  for (std::size_t i = 0; i < L.size(); ++i) in[i] = E[i] ? 1.0 : 0.0;
  conv.apply(in, c);
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!L.interior(i)) continue;
    // Kernel mass of the cells with the opposite membership.
    const double other = E[i] ? kt.row_sum(i) - c[i] : c[i];
    double t = 0.0;
    for (int q = 0; q < kt.classes(); ++q)
      if (far_in_E[q] != (E[i] != 0)) t += kt.tail(i, q);
    V[i] = gam * (L.cell_measure() * other + t) * (E[i] ? 1.0 : -1.0);
  }
  return V;
}

VectorField reaction_potential(const LabelField& labels, const KernelTable& kt, const Wells& wells) {
  labels.validate();
  require(static_cast<int>(wells.m()) == labels.m, "reaction potential: phase count mismatch");
  const Lattice& L = kt.lattice();
  VectorField out(labels.lattice, wells.d);
  for (int j = 0; j < labels.m; ++j) {
    const Mask E = mask_of_label(labels, j);
    std::vector<bool> far(kt.classes());
    for (int q = 0; q < kt.classes(); ++q) far[q] = q == j;
    const auto V = set_potential(E, kt, far);
    for (std::size_t i = 0; i < L.size(); ++i)
      for (int k = 0; k < wells.d; ++k) out.at(i)[k] -= V[i] * wells.points[j][k];
  }
  return out;
}

double TorusProblem::tol() const { return params.tol > 0.0 ? params.tol : 1e-8 * std::pow(eps, -2.0 * op->s()); }

double torus_energy(const TorusProblem& pb, const std::vector<double>& u) {
  const int d = pb.W->dim();
  const std::size_t N = pb.op->size();
  require(u.size() == N * d, "torus: field size mismatch");
  const Torus& T = pb.op->torus();
  const double hn = T.n == 1 ? T.h() : T.h() * T.h();
  std::vector<double> x(N), Lx(N);
  CompensatedSum e;
  for (int c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < N; ++i) x[i] = u[i * d + c];
    pb.op->apply(x, Lx);
    for (std::size_t i = 0; i < N; ++i) e += 0.5 * x[i] * Lx[i];
  }
  const double ieps = std::pow(pb.eps, -2.0 * pb.op->s());
  for (std::size_t i = 0; i < N; ++i) e += ieps * pb.W->value({u.data() + i * d, static_cast<std::size_t>(d)});
  return hn * e.value();
}

TorusSolution solve_torus(const TorusProblem& pb, std::vector<double> init) {
  require(pb.op && pb.W, "torus: incomplete problem");
  require(std::isfinite(pb.eps) && pb.eps > 0.0, "torus: eps must be positive");
  const int d = pb.W->dim();
  const Torus& T = pb.op->torus();
  const double hn = T.n == 1 ? T.h() : T.h() * T.h();
  const double ieps = std::pow(pb.eps, -2.0 * pb.op->s());
  const std::vector<double> none;
  Descent desc(*pb.op, *pb.W, ieps, d, none, pb.params);
  const double E0 = torus_energy(pb, init);
  DescentResult r = desc.run(init, E0 / hn, pb.tol(), hn);
  TorusSolution sol;
  sol.d = d;
  sol.iterations = r.iterations;
  sol.trace = std::move(r.trace);
  // Fresh residual.
  std::vector<double> Lx, g;
  desc.applyL(init, Lx);
  desc.gradient(init, Lx, g);
  sol.residual = sup_norm(g, d);
  sol.converged = sol.residual <= pb.tol();
  sol.energy = torus_energy(pb, init);
  sol.u = std::move(init);
  return sol;
}

}  // namespace fpl
