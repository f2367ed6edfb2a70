#pragma once

// FFT-based application of a translation-invariant operator on a rectangular
// block of cells (x fastest). Not safe for concurrent apply() calls on one
// instance: the work buffers are shared.

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace fpl {

class Convolver {
 public:
  // Linear convolution: out_i = sum_j K(ix - jx, iy - jy) in_j over the block.
  // K is queried for offsets in (-nx, nx) x (-ny, ny).
  static Convolver linear(int nx, int ny, const std::function<double(int, int)>& K);
  // Circular convolution on an nx x ny torus; K queried for offsets in [0, nx) x [0, ny).
  static Convolver circular(int nx, int ny, const std::function<double(int, int)>& K);
  // Pure Fourier multiplier on an nx x ny torus; symbol queried per
  // wavenumber pair (kx, ky) with kx in [0, nx/2], ky in (-ny/2, ny/2].
  static Convolver multiplier(int nx, int ny, const std::function<double(int, int)>& symbol);

  Convolver() = default;  // empty; assign one of the above before use
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  void plan(int px, int py);
  void set_kernel_from_real(const std::vector<double>& k);

  int nx_ = 0, ny_ = 0, px_ = 0, py_ = 0;
  std::vector<std::complex<double>> khat_;
  mutable std::vector<double> rbuf_;
  mutable std::vector<std::complex<double>> cbuf_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

}  // namespace fpl
