#pragma once

// Fractional Laplacian on a periodic box, by Fourier multiplier or by
// lattice quadrature with periodic images. Used to validate the quadrature
// path; the physics runs use exterior data.

#include <vector>

#include "fpl/convolution.hpp"
#include "fpl/operator.hpp"

namespace fpl {

struct Torus {
  int n = 1;
  int N = 64;            // cells per side
  double length = 1.0;   // side length
  double h() const { return length / N; }
  std::size_t size() const { return n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N; }
  void validate() const;
};

enum class TorusMethod { Spectral, Quadrature };

class TorusOperator final : public ACOperator {
 public:
  // images: periodic copies kept on each side in the quadrature path
  // (negative picks 16 in 1D, 2 in 2D).
  TorusOperator(Torus torus, double s, TorusMethod method, int images = -1);
  std::size_t size() const override { return torus_.size(); }
  void apply(std::span<const double> x, std::span<double> out) const override;
  const std::vector<double>& diagonal() const override { return diag_; }
  const Torus& torus() const { return torus_; }
  double s() const { return s_; }
  TorusMethod method() const { return method_; }

 private:
  Torus torus_;
  double s_;
  TorusMethod method_;
  Convolver conv_;
  std::vector<double> diag_;
};

// (-Delta)^s of a scalar periodic field.
std::vector<double> torus_frac_laplacian(const Torus& torus, const std::vector<double>& u, double s, TorusMethod method);

// Integral of |y|^{-(n+2s)} outside the cube of half-width R.
double cube_tail(int n, double s, double R);

}  // namespace fpl
