#pragma once

// Minimization of the localized sigma-weighted partition energy over label
// fields by single-cell flips, the non-infiltration constants and their
// empirical check, and the third-phase competitor for SITI surface tensions.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"
#include "fpl/nonlocal.hpp"
#include "fpl/wells.hpp"

namespace fpl {

struct AnnealSchedule {
  double T0 = -1.0;  // negative: median |delta| over a random probe
  double cooling = 0.95;
  int sweeps = 200;
  std::uint64_t seed = 42;
  int probe = 256;
  int max_zero_sweeps = 10000;
};

struct PartitionProblem {
  std::shared_ptr<const KernelTable> kernel;
  SigmaMatrix sigma;
  LabelField exterior;  // labels outside omega stay fixed; inside it is the initial state
  Mask omega;           // empty: the interior of the lattice
  AnnealSchedule schedule;

  const Mask& window() const;
  void validate() const;
};

struct PartitionResult {
  LabelField labels;
  EnergyReport energy;
  double initial_energy = 0.0;
  bool flip_stable = false;
  int zero_sweeps = 0;
  long accepted = 0;
};

// Exact change of partition_energy when `cell` takes `new_label`.
double flip_delta(const LabelField& labels, std::size_t cell, int new_label, const Mask& omega,
                  const SigmaMatrix& sigma, const KernelTable& kt);

PartitionResult solve_partition(const PartitionProblem& problem);

// Largest energy drop available from one flip (0 when flip-stable up to the
// relative tolerance).
double most_negative_flip(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma, const KernelTable& kt);
bool is_flip_stable(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma, const KernelTable& kt,
                    double rel_tol = 1e-12);

struct NonInfiltrationCert {
  bool valid = false;  // false: NoCertificate
  Regime regime = Regime::General;
  double constant = 0.0;
  std::vector<int> phases;  // 0-based applicable phases
  int n = 1;
  double s = 0.25;
  double q = 0.0, alpha_min = 0.0, sigma_min = 0.0, sigma_max = 0.0;
  double p2s_unit_ball = 0.0;
  std::string formula;
};

// Picks the first applicable regime among nearly homogeneous, STI3, SITI3
// unless `regime` is given.
NonInfiltrationCert noninfiltration_constant(const SigmaMatrix& sigma, double s, int n, double p2s_unit_ball,
                                             std::optional<Regime> regime = std::nullopt);

enum class BallVerdict { NotApplicable, Satisfied, Violated };
std::string to_string(BallVerdict v);

struct BallCheck {
  double x = 0.0, y = 0.0, r = 0.0;
  int phase = 0;
  double measure = 0.0;       // |E_h n D_r|
  double half_measure = 0.0;  // |E_h n D_{r/2}|
  BallVerdict verdict = BallVerdict::NotApplicable;
};

// Dyadic radii r = r_max 2^{-k} down to 2h, centers on a lattice-point grid
// of spacing r/2, balls inside omega.
std::vector<BallCheck> check_noninfiltration(const LabelField& labels, const NonInfiltrationCert& cert,
                                             const Mask& omega, double r_max = -1.0);
std::size_t count_violations(const std::vector<BallCheck>& checks);
void write_certificate_csv(const std::string& path, const NonInfiltrationCert& cert,
                           const std::vector<BallCheck>& checks);

struct CompetitorResult {
  double flat = 0.0, strip = 0.0, margin = 0.0;
  double strip_halfwidth = 0.0;
  int i0 = 0, j0 = 1, k0 = 2;
};

// Half-width of the third-phase strip: (1/3) min{1, (w_{n-1}/w_{n-2})(s_ij/(s_ik + s_kj) - 1)}.
double siti_strip_halfwidth(const SigmaMatrix& sigma, int n);

// Flat interface i0 | j0 across D_1 against the same with the strip
// (-1/2, 1/2) x (-eps, eps) given to k0, on (-1,1)^2 with spacing h.
CompetitorResult siti_competitor_test(const SigmaMatrix& sigma, double s, double h = 1.0 / 48, double collar = 0.5);

}  // namespace fpl
