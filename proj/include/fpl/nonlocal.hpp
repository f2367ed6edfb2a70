#pragma once

// Discrete nonlocal functionals on a lattice: interactions, fractional
// perimeters, partition and Dirichlet energies, the fractional Laplacian,
// and perimeters of sets given by their covariogram.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"
#include "fpl/wells.hpp"

namespace fpl {

// Value carried by each far-field class.
using FarValues = std::vector<Eigen::VectorXd>;
FarValues far_values_from_wells(const Wells& wells, int classes);

struct EnergyReport {
  double dirichlet = 0.0;
  double potential = 0.0;
  double total = 0.0;
  // Ordered interactions I(E_a n Omega, E_b n Omega), I(E_a n Omega, E_b \ Omega)
  // and I(E_a \ Omega, E_b n Omega); empty for vector fields.
  Eigen::MatrixXd in_in, in_out, out_in;

  std::vector<std::string> csv_keys() const;
  std::vector<double> csv_values() const;
};

void write_energy_csv(const std::string& path, const EnergyReport& r);

// h^{2n} sum_{i in A, j in B} w_ij, plus tails of A against the far classes
// flagged in far_B.
double interaction(const Mask& A, const Mask& B, const KernelTable& kt, const std::vector<bool>& far_B = {});

// Three-term localized fractional perimeter. far_in_E flags the far classes
// belonging to E (default: none).
double frac_perimeter(const Mask& E, const Mask& omega, const KernelTable& kt,
                      const std::vector<bool>& far_in_E = {});

// Far class q carries label q.
EnergyReport partition_energy(const LabelField& labels, const Mask& omega, const SigmaMatrix& sigma,
                              const KernelTable& kt);

double dirichlet_energy(const VectorField& u, const Mask& omega, const KernelTable& kt, const FarValues& far);

EnergyReport ac_energy(const VectorField& u, double eps, const Potential& W, const Mask& omega,
                       const KernelTable& kt, const FarValues& far);
EnergyReport ac_energy(const VectorField& u, double eps, const Wells& wells, const Mask& omega,
                       const KernelTable& kt, const FarValues& far);

// gamma_{n,s} times the kernel sum with the cell itself dropped; zero on
// non-interior cells.
VectorField frac_laplacian(const VectorField& u, const KernelTable& kt, const FarValues& far);

// |E n (E + z)| for a fixed set E in R^n.
class Covariogram {
 public:
  virtual ~Covariogram() = default;
  virtual int dim() const = 0;
  virtual double measure() const = 0;
  virtual double operator()(double zx, double zy) const = 0;
  virtual double diameter() const = 0;
  // Radii along direction theta where g fails to be smooth.
  virtual std::vector<double> kinks(double theta) const { (void)theta; return {}; }
  // Angles where the radial integral fails to be smooth, within [0, 2 pi).
  virtual std::vector<double> angle_breaks() const { return {}; }
  // Angular symmetry factor: the integrand has period 2 pi / symmetry().
  virtual int symmetry() const { return 1; }
};

class DiscCovariogram final : public Covariogram {
 public:
  explicit DiscCovariogram(double R) : R_(R) {}
  int dim() const override { return 2; }
  double measure() const override;
  double operator()(double zx, double zy) const override;
  double diameter() const override { return 2.0 * R_; }
  std::vector<double> kinks(double) const override { return {2.0 * R_}; }
  int symmetry() const override { return 64; }

 private:
  double R_;
};

class RectCovariogram final : public Covariogram {
 public:
  RectCovariogram(double a, double b) : a_(a), b_(b) {}
  int dim() const override { return 2; }
  double measure() const override { return a_ * b_; }
  double operator()(double zx, double zy) const override;
  double diameter() const override { return std::hypot(a_, b_); }
  std::vector<double> kinks(double theta) const override;
  std::vector<double> angle_breaks() const override;
  int symmetry() const override { return 2; }

 private:
  double a_, b_;
};

class IntervalCovariogram final : public Covariogram {
 public:
  explicit IntervalCovariogram(double len) : L_(len) {}
  int dim() const override { return 1; }
  double measure() const override { return L_; }
  double operator()(double zx, double) const override { return std::max(0.0, L_ - std::abs(zx)); }
  double diameter() const override { return L_; }
  std::vector<double> kinks(double) const override { return {L_}; }

 private:
  double L_;
};

// Covariogram of a union of lattice cells: bilinear interpolation of the
// discrete autocorrelation, exact at lattice offsets.
class MaskCovariogram final : public Covariogram {
 public:
  MaskCovariogram(const Lattice& lat, const Mask& E);
  int dim() const override { return n_; }
  double measure() const override { return measure_; }
  double operator()(double zx, double zy) const override;
  double diameter() const override { return diameter_; }
  std::vector<double> kinks(double theta) const override;
  std::vector<double> angle_breaks() const override;
  int symmetry() const override { return 2; }

 private:
  int n_;
  double h_;
  int rx_, ry_;
  double measure_, diameter_;
  std::vector<double> table_;  // offsets (-rx..rx) x (-ry..ry)
};

// P_{2s}(E, R^n) = int (|E| - g(z)) |z|^{-n-2s} dz.
double perimeter_by_covariogram(const Covariogram& g, double s);

// P_{2s} of the unit ball D_1 in R^n.
double unit_ball_perimeter(int n, double s);

}  // namespace fpl
