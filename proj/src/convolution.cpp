#include "fpl/convolution.hpp"

#include <fftw3.h>

#include <utility>

#include "fpl/error.hpp"

namespace fpl {

namespace {

int good_size(int n) {
  // Smallest 2^a 3^b 5^c >= n.
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

void Convolver::plan(int px, int py) {
  px_ = px;
  py_ = py;
  const int hx = px / 2 + 1;
  rbuf_.assign(static_cast<std::size_t>(px) * py, 0.0);
  cbuf_.assign(static_cast<std::size_t>(hx) * py, {0.0, 0.0});
  auto* r = rbuf_.data();
  auto* c = reinterpret_cast<fftw_complex*>(cbuf_.data());
  // FFTW stores row-major with the last index fastest: dims (py, px).
  if (py == 1) {
    fwd_ = fftw_plan_dft_r2c_1d(px, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_c2r_1d(px, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
  } else {
    fwd_ = fftw_plan_dft_r2c_2d(py, px, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_c2r_2d(py, px, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!fwd_ || !bwd_) throw std::runtime_error("fftw planning failed");
}

void Convolver::set_kernel_from_real(const std::vector<double>& k) {
  std::copy(k.begin(), k.end(), rbuf_.begin());
  fftw_execute(static_cast<fftw_plan>(fwd_));
  khat_ = cbuf_;
  const double norm = 1.0 / (static_cast<double>(px_) * py_);
  for (auto& v : khat_) v *= norm;
}

Convolver Convolver::linear(int nx, int ny, const std::function<double(int, int)>& K) {
  require(nx >= 1 && ny >= 1, "convolver: empty block");
  Convolver c;
  c.nx_ = nx;
  c.ny_ = ny;
  const int px = good_size(2 * nx - 1);
  const int py = ny == 1 ? 1 : good_size(2 * ny - 1);
  c.plan(px, py);
  std::vector<double> k(static_cast<std::size_t>(px) * py, 0.0);
  for (int dy = -(ny - 1); dy <= ny - 1; ++dy)
    for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
      const int ax = (dx + px) % px, ay = (dy + py) % py;
      k[ax + static_cast<std::size_t>(px) * ay] = K(dx, dy);
    }
  c.set_kernel_from_real(k);
  return c;
}

Convolver Convolver::circular(int nx, int ny, const std::function<double(int, int)>& K) {
  require(nx >= 1 && ny >= 1, "convolver: empty block");
  Convolver c;
  c.nx_ = nx;
  c.ny_ = ny;
  c.plan(nx, ny);
  std::vector<double> k(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int dy = 0; dy < ny; ++dy)
    for (int dx = 0; dx < nx; ++dx) k[dx + static_cast<std::size_t>(nx) * dy] = K(dx, dy);
  c.set_kernel_from_real(k);
  return c;
}

Convolver Convolver::multiplier(int nx, int ny, const std::function<double(int, int)>& symbol) {
  require(nx >= 1 && ny >= 1, "convolver: empty block");
  Convolver c;
  c.nx_ = nx;
  c.ny_ = ny;
  c.plan(nx, ny);
  const int hx = nx / 2 + 1;
  c.khat_.assign(static_cast<std::size_t>(hx) * ny, {0.0, 0.0});
  const double norm = 1.0 / (static_cast<double>(nx) * ny);
  for (int ky = 0; ky < ny; ++ky) {
    const int sky = ky <= ny / 2 ? ky : ky - ny;
    for (int kx = 0; kx < hx; ++kx) c.khat_[kx + static_cast<std::size_t>(hx) * ky] = symbol(kx, sky) * norm;
  }
  return c;
}

Convolver::~Convolver() {
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

Convolver::Convolver(Convolver&& o) noexcept { *this = std::move(o); }

Convolver& Convolver::operator=(Convolver&& o) noexcept {
  if (this != &o) {
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    nx_ = o.nx_;
    ny_ = o.ny_;
    px_ = o.px_;
    py_ = o.py_;
    khat_ = std::move(o.khat_);
    rbuf_ = std::move(o.rbuf_);
    cbuf_ = std::move(o.cbuf_);
    fwd_ = std::exchange(o.fwd_, nullptr);
    bwd_ = std::exchange(o.bwd_, nullptr);
  }
  return *this;
}

void Convolver::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
  require(in.size() == cells && out.size() == cells, "convolver: size mismatch");
  std::fill(rbuf_.begin(), rbuf_.end(), 0.0);
  for (int y = 0; y < ny_; ++y)
    for (int x = 0; x < nx_; ++x) rbuf_[x + static_cast<std::size_t>(px_) * y] = in[x + static_cast<std::size_t>(nx_) * y];
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), rbuf_.data(), reinterpret_cast<fftw_complex*>(cbuf_.data()));
  for (std::size_t k = 0; k < cbuf_.size(); ++k) cbuf_[k] *= khat_[k];
  fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(cbuf_.data()), rbuf_.data());
  for (int y = 0; y < ny_; ++y)
    for (int x = 0; x < nx_; ++x) out[x + static_cast<std::size_t>(nx_) * y] = rbuf_[x + static_cast<std::size_t>(px_) * y];
}

}  // namespace fpl
