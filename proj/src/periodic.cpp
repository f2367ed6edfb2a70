#include "fpl/periodic.hpp"

#include <cmath>
#include <numbers>

#include "fpl/error.hpp"
#include "fpl/kernel.hpp"
#include "fpl/quadrature.hpp"
#include "fpl/specconst.hpp"

namespace fpl {

void Torus::validate() const {
  require(n == 1 || n == 2, "torus: n must be 1 or 2");
  require(N >= 4, "torus: need at least 4 cells per side");
  require(length > 0.0 && std::isfinite(length), "torus: length must be positive");
}

double cube_tail(int n, double s, double R) {
  if (n == 1) return 2.0 * std::pow(R, -2.0 * s) / (2.0 * s);
  // rho(theta) = R / max(|cos|, |sin|); eight equal octants.
  const double I = integrate([s](double t) { return std::pow(std::cos(t), 2.0 * s); }, 0.0, 0.25 * std::numbers::pi, 24);
  return 8.0 * std::pow(R, -2.0 * s) / (2.0 * s) * I;
}

TorusOperator::TorusOperator(Torus torus, double s, TorusMethod method, int images)
    : torus_(torus), s_(s), method_(method) {
  torus_.validate();
  FracParams fp{torus_.n, s};
  fp.validate_open();
  const int N = torus_.N;
  const int ny = torus_.n == 2 ? N : 1;
  const double two_pi_over_L = 2.0 * std::numbers::pi / torus_.length;
  if (method == TorusMethod::Spectral) {
    conv_ = Convolver::multiplier(N, ny, [&](int kx, int ky) {
      const double k2 = (static_cast<double>(kx) * kx + static_cast<double>(ky) * ky) * two_pi_over_L * two_pi_over_L;
      return std::pow(k2, s);
    });
    // Mean of the symbol over the spectrum.
    double acc = 0.0;
    for (int ky = 0; ky < ny; ++ky)
      for (int kx = 0; kx < N; ++kx) {
        const int ax = kx <= N / 2 ? kx : kx - N, ay = ky <= ny / 2 ? ky : ky - ny;
        acc += std::pow((static_cast<double>(ax) * ax + static_cast<double>(ay) * ay) * two_pi_over_L * two_pi_over_L, s);
      }
    diag_.assign(size(), acc / static_cast<double>(size()));
    return;
  }
  const int M = images >= 0 ? images : (torus_.n == 1 ? 16 : 2);
  const double h = torus_.h();
  const int n = torus_.n;
  const double gam = gamma_ns(fp);
  const double hn = n == 1 ? h : h * h;
  const double scale = std::pow(h, -(n + 2.0 * s));
  const double T = cube_tail(n, s, (M + 0.5) * torus_.length);
  const double Nc = static_cast<double>(size());
  auto wper = [&](int ox, int oy) {
    // Center the offset in (-N/2, N/2].
    if (ox > N / 2) ox -= N;
    if (n == 2 && oy > N / 2) oy -= N;
    CompensatedSum acc;
    const int My = n == 2 ? M : 0;
    for (int my = -My; my <= My; ++my)
      for (int mx = -M; mx <= M; ++mx) {
        const long ax = ox + static_cast<long>(mx) * N, ay = oy + static_cast<long>(my) * N;
        acc += n == 1 ? unit_weight_1d(ax, s) : unit_weight_2d(ax, ay, s);
      }
    return scale * acc.value();
  };
  std::vector<double> W(size());
  double rowsum = 0.0;
  for (int oy = 0; oy < ny; ++oy)
    for (int ox = 0; ox < N; ++ox) {
      const std::size_t k = ox + static_cast<std::size_t>(N) * oy;
      W[k] = (ox == 0 && oy == 0) ? 0.0 : wper(ox, oy);
      rowsum += W[k];
    }
  const double k0 = gam * (hn * rowsum + T * (1.0 - 1.0 / Nc));
  conv_ = Convolver::circular(N, ny, [&](int ox, int oy) {
    if (ox == 0 && oy == 0) return k0;
    return -gam * (hn * W[ox + static_cast<std::size_t>(N) * oy] + T / Nc);
  });
  diag_.assign(size(), k0);
}

void TorusOperator::apply(std::span<const double> x, std::span<double> out) const { conv_.apply(x, out); }

std::vector<double> torus_frac_laplacian(const Torus& torus, const std::vector<double>& u, double s,
                                         TorusMethod method) {
  require(u.size() == torus.size(), "torus: field size mismatch");
  TorusOperator op(torus, s, method);
  std::vector<double> out(u.size());
  op.apply(u, out);
  return out;
}

}  // namespace fpl
