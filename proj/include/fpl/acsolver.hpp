#pragma once

// Critical points and minimizers of the discrete fractional Allen-Cahn
// energy with exterior Dirichlet data, by preconditioned L-BFGS with an
// Armijo line search.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fpl/convolution.hpp"
#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"
#include "fpl/nonlocal.hpp"
#include "fpl/operator.hpp"
#include "fpl/periodic.hpp"
#include "fpl/wells.hpp"

namespace fpl {

struct SolverParams {
  int max_iters = 20000;
  double tol = -1.0;  // sup-norm of the residual; negative means 1e-8 eps^{-2s}
  int memory = 12;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-20;
  int refresh = 100;  // recompute the linear part from scratch this often
  bool record_trace = true;
};

struct TracePoint {
  int iter = 0;
  double energy = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);

struct ACProblem {
  std::shared_ptr<const KernelTable> kernel;
  std::shared_ptr<const Potential> W;
  double eps = 0.1;
  VectorField g;   // exterior data; only the collar is read
  FarValues far;   // value carried by each far class of the kernel
  SolverParams params;

  const Lattice& lattice() const { return kernel->lattice(); }
  double tol() const;
  void validate() const;
};

// g on every cell from the far pattern of the kernel: cell i gets far[pattern(x_i)].
VectorField pattern_field(const KernelTable& kt, const FarValues& far);
ACProblem make_problem(std::shared_ptr<const KernelTable> kt, const Wells& wells, double eps, FarValues far);

struct Init {
  enum class Kind { Field, Threshold, Random };
  Kind kind = Kind::Threshold;
  VectorField field;
  std::uint64_t seed = 42;
  int restarts = 1;

  static Init from(VectorField u);
  static Init threshold();
  static Init random(std::uint64_t seed, int restarts = 3);
};

struct ACSolution {
  VectorField u;
  double residual = 0.0;
  EnergyReport energy;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // every accepted step lowered the energy
  std::string diagnostic;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
};

// Linear part of the lattice Euler-Lagrange operator on the interior cells:
// (L x)_i = gamma [h^n (R_i x_i - sum_{j interior} w_ij x_j) + T_i x_i].
class LatticeACOperator final : public ACOperator {
 public:
  explicit LatticeACOperator(std::shared_ptr<const KernelTable> kt);
  std::size_t size() const override { return cells_.size(); }
  void apply(std::span<const double> x, std::span<double> out) const override;
  const std::vector<double>& diagonal() const override { return diag_; }
  // Lattice index of the k-th unknown.
  const std::vector<std::size_t>& cells() const { return cells_; }
  // Affine part from the collar data and far values, d entries per unknown.
  std::vector<double> affine(const VectorField& g, const FarValues& far) const;

 private:
  std::shared_ptr<const KernelTable> kt_;
  std::vector<std::size_t> cells_;
  Convolver conv_;
  std::vector<double> rs_, tt_, diag_;
  double gamma_ = 0.0, hn_ = 0.0;
};

ACSolution solve_min(const ACProblem& problem, const Init& init);

// frac_laplacian(u) + eps^{-2s} grad W(u) on interior cells, zero on the collar.
VectorField residual(const ACProblem& problem, const VectorField& u);
// Max over interior cells of the Euclidean norm of the residual.
double residual_norm(const ACProblem& problem, const VectorField& u);

// -sum_j V_j(x) a_j per interior cell with
// V_j(x) = gamma (int |chi_j(x) - chi_j(y)|^2 |x-y|^{-(n+2s)} dy)(2 chi_j(x) - 1).
VectorField reaction_potential(const LabelField& labels, const KernelTable& kt, const Wells& wells);
// V_E for a single set E (with the far classes flagged in far_in_E).
std::vector<double> set_potential(const Mask& E, const KernelTable& kt, const std::vector<bool>& far_in_E);

struct TorusProblem {
  std::shared_ptr<const TorusOperator> op;
  std::shared_ptr<const Potential> W;
  double eps = 0.1;
  SolverParams params;
  double tol() const;
};

struct TorusSolution {
  std::vector<double> u;  // cell-major, d entries per cell
  int d = 1;
  double residual = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

TorusSolution solve_torus(const TorusProblem& problem, std::vector<double> init);
double torus_energy(const TorusProblem& problem, const std::vector<double>& u);

}  // namespace fpl
