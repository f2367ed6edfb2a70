#pragma once

// Multi-well potentials, their derivatives, and the surface-tension matrix
// induced by (or embedded into) a configuration of wells.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fpl {

inline constexpr int kMaxWellDim = 8;
inline constexpr int kMaxPhases = 16;

// Zero set {a_1, ..., a_m} of the prototypical potential W(z) = prod_j |z - a_j|^2.
struct Wells {
  int d = 1;
  std::vector<Eigen::VectorXd> points;
  double p = 4.0;  // growth exponent, 2m for the product form

  Wells() = default;
  // Throws DomainError on m < 2, repeated points or mixed dimensions.
  explicit Wells(std::vector<Eigen::VectorXd> pts);

  std::size_t m() const { return points.size(); }
  const Eigen::VectorXd& operator[](std::size_t j) const { return points[j]; }
  double min_gap() const;
};

Wells wells_1d(std::initializer_list<double> values);

// Evaluator interface for potentials satisfying (H1)-(H3). The solvers only
// call through this interface; Wells supplies the product form.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual int dim() const = 0;
  virtual double value(std::span<const double> z) const = 0;
  virtual void gradient(std::span<const double> z, std::span<double> out) const = 0;
  virtual Eigen::MatrixXd hessian(std::span<const double> z) const = 0;
  virtual const Wells& zeros() const = 0;
};

class ProductPotential final : public Potential {
 public:
  explicit ProductPotential(Wells wells) : wells_(std::move(wells)) {}
  int dim() const override { return wells_.d; }
  double value(std::span<const double> z) const override;
  void gradient(std::span<const double> z, std::span<double> out) const override;
  Eigen::MatrixXd hessian(std::span<const double> z) const override;
  const Wells& zeros() const override { return wells_; }

 private:
  Wells wells_;
};

double eval_W(const Wells& wells, std::span<const double> z);
void grad_W(const Wells& wells, std::span<const double> z, std::span<double> out);
Eigen::VectorXd grad_W(const Wells& wells, const Eigen::VectorXd& z);
Eigen::MatrixXd hessian_W(const Wells& wells, std::span<const double> z);

// Distance from z to the nearest well and the index of that well (ties go
// to the smallest index).
std::pair<double, std::size_t> nearest_well(const Wells& wells, std::span<const double> z);

struct PotentialConstants {
  double kappa_W = 0.0;  // Hessian lower bound near the wells
  double rho_W = 0.0;    // radius of the convexity neighbourhoods
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;  // (H3) growth constants
  double p = 0.0;

  // max((c2)^{1/(p-1)}, |g|_inf): the maximum-principle bound.
  double sup_bound(double g_sup) const;
};

PotentialConstants estimate_constants(const Wells& wells);

enum class Regime { NearlyHomogeneous, STI3, SITI3, General };
std::string to_string(Regime r);

struct SigmaMatrix {
  Eigen::MatrixXd entries;
  std::vector<Regime> regimes;  // every label that applies
  double q = 0.0;
  std::optional<std::vector<double>> alpha;       // STI3 additive decomposition
  std::optional<std::pair<int, int>> siti_pair;  // (i0, j0), 0-based

  SigmaMatrix() = default;
  // Validates membership in S_m and classifies.
  explicit SigmaMatrix(Eigen::MatrixXd e);

  int m() const { return static_cast<int>(entries.rows()); }
  double operator()(int i, int j) const { return entries(i, j); }
  double min_offdiag() const;
  double max_offdiag() const;
  bool has(Regime r) const;
};

// m = 3 convenience: (sigma_12, sigma_13, sigma_23).
SigmaMatrix sigma3(double s12, double s13, double s23);

struct RegimeInfo {
  std::vector<Regime> regimes;
  double q = 0.0;
  std::optional<std::vector<double>> alpha;
  std::optional<std::pair<int, int>> siti_pair;
};

RegimeInfo classify_regime(const Eigen::MatrixXd& sigma);

SigmaMatrix sigma_from_wells(const Wells& wells);

struct Embedding {
  bool embeddable = false;
  std::optional<Wells> points;
  Eigen::VectorXd eigenvalues;  // of the doubly centred Gram matrix, ascending
};

// Classical scaling test for l2-embeddability of sqrt(sigma).
Embedding embed_sigma(const SigmaMatrix& sigma);

}  // namespace fpl
