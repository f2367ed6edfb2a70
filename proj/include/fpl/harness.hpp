#pragma once

// Experiments built on the solvers: eps -> 0 sweeps with rate fits, the
// diffuse-versus-sharp cross-check, s -> 1/2 perimeter ratios, radius
// ladders of the monotone density, and box counting.

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpl/acsolver.hpp"
#include "fpl/extension.hpp"
#include "fpl/lattice.hpp"
#include "fpl/nonlocal.hpp"
#include "fpl/partsolver.hpp"
#include "fpl/wells.hpp"

namespace fpl {

// Least-squares line through (log x, log y) with a 95% Student-t interval on
// the slope.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double max_residual = 0.0;  // in log space
  std::size_t points = 0;
};
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepConfig {
  int n = 1;
  double s = 0.25;
  int cells = 1024;  // along each axis of the box
  Box box = Box::interval(-1.0, 1.0);
  double collar = -1.0;  // negative: half the box width
  Wells wells = wells_1d({-1.0, 1.0});
  Pattern far = Pattern::step(0.0, 0, 1, 2);
  std::vector<double> eps;
  double theta_radius = 0.0;  // > 0: record Theta at the centre of the box
  SolverParams params;
};

// eps_k = 2^{-k} |Omega| for k = k_lo..k_hi (|Omega| = box width).
std::vector<double> dyadic_eps(const Box& box, int k_lo, int k_hi);

struct SweepRecord {
  double eps = 0.0;
  double h = 0.0;
  EnergyReport energy;
  double linf_K = 0.0;
  double potential_integral = 0.0;
  std::size_t transition_cells = 0;
  double theta = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

struct SweepResult {
  std::vector<double> eps_values;  // strictly decreasing
  std::vector<SweepRecord> records;
  std::size_t K_cells = 0;
  double K_distance = 0.0;
  SlopeFit linf_fit, potential_fit;
  bool complete = false;
  std::string message;
};

SweepResult sweep_eps(const SweepConfig& config);
void write_sweep_csv(const std::string& path, const SweepResult& r);

struct GammaConfig {
  double s = 0.25;
  double h = 1.0 / 512;
  Box box = Box::interval(-1.0, 1.0);
  double collar = -1.0;
  SigmaMatrix sigma;
  std::optional<Wells> wells;  // default: embedding of sigma
  Pattern far;                 // also the initial state of both solvers
  double eps = 1.0 / 64;
  AnnealSchedule schedule;
  SolverParams params;
  int interface_margin = 2;  // cells ignored on each side of an interface
};

struct GammaReport {
  double E_ac_labels = 0.0;  // partition energy of the thresholded AC minimizer
  double E_direct = 0.0;     // solve_partition
  double rel_gap = 0.0;
  double diffuse_ratio = 0.0;  // (2/gamma) E_s(u_eps) / P^sigma(threshold of u_eps)
  std::size_t compared_cells = 0, mismatches = 0;
  bool ac_converged = false;
  bool partition_flip_stable = false;
  std::vector<int> phases_ac, phases_direct;  // cell counts per phase inside the box
  LabelField labels_ac, labels_direct;
};

GammaReport gamma_limit_check(const GammaConfig& config);

struct LimitRow {
  double s = 0.0;
  std::vector<double> normalized;  // (1-2s) P_{2s}(E_k)
  std::vector<double> ratios;      // against the first set
};

struct LimitTable {
  std::vector<std::string> names;
  std::vector<double> classical;  // classical perimeters
  std::vector<LimitRow> rows;
  std::vector<double> extrapolated;        // polynomial extrapolation to 1-2s = 0
  std::vector<double> extrapolated_ratio;  // ratio of the extrapolated values
  std::vector<double> classical_ratio;
};

// Richardson extrapolation in x = 1 - 2s through all nodes (Lagrange at 0).
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

LimitTable s_to_half_limit(const std::vector<std::shared_ptr<const Covariogram>>& sets,
                           const std::vector<std::string>& names, const std::vector<double>& classical,
                           const std::vector<double>& s_values);
void write_limit_csv(const std::string& path, const LimitTable& t);

struct AuditEntry {
  double x0 = 0.0, y0 = 0.0;
  std::vector<double> radii;  // ascending
  std::vector<double> theta;
  std::vector<std::uint8_t> flagged;  // flagged[k]: decrease from r_{k-1} to r_k beyond the budget
  int violations = 0;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  int violations = 0;
  double budget_factor = 5.0;
};

// Theta_{s,eps}(x0, r) on each ladder; a violation is a relative decrease
// theta(r_k) < theta(r_{k-1}) (1 - budget h / r_{k-1}).
AuditReport monotonicity_audit(const ExtensionSlab& slab, std::optional<double> eps, const Potential* W,
                               const std::vector<std::array<double, 2>>& centers, std::vector<double> radii,
                               double budget_factor = 5.0);
void write_audit_csv(const std::string& path, const AuditReport& r);

struct BoxCount {
  bool valid = false;
  double dimension = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sizes;  // box side lengths
  std::vector<double> counts;
  SlopeFit fit;
};

// Dyadic boxes of 2^k cells anchored at the lower corner of the mask's
// bounding box, k = k_min..k_max (k_max < 0: while at least four boxes fit
// across the lattice).
BoxCount box_counting_dim(const Lattice& lat, const Mask& mask, int k_min = 0, int k_max = -1);

// The 1D two-well reference: Omega = (-1,1), wells {-1,1}, sign exterior data.
struct Reference1D {
  std::shared_ptr<const KernelTable> kernel;
  ACProblem problem;
  ACSolution solution;
};
Reference1D solve_reference_1d(double s = 0.25, double h = 1.0 / 512, double eps = 1.0 / 64);

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
};
std::string tool_version();
void write_manifest(const std::string& path, const Manifest& m);

}  // namespace fpl
