#include "kinlim/xops.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

namespace kinlim {

namespace {
struct Plans {
  fftw_plan fwd = nullptr, bwd = nullptr;
};
std::mutex mtx;
std::map<int, Plans> cache;

const Plans& plans_for(int n) {
  std::lock_guard<std::mutex> lk(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Plans p;
  double* re = fftw_alloc_real(std::size_t(n));
  fftw_complex* cx = fftw_alloc_complex(std::size_t(n / 2 + 1));
  p.fwd = fftw_plan_dft_r2c_1d(n, re, cx, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(n, cx, re, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(re);
  fftw_free(cx);
  return cache.emplace(n, p).first->second;
}
}  // namespace

void spatial_dx(const SpatialGrid& xg, std::size_t block, const double* F,
                double* out) {
  if (xg.dim != 1) throw ConfigError("spatial_dx: only 1D spatial grids");
  const int n = xg.n;
  if (n == 1) {
    for (std::size_t a = 0; a < block; ++a) out[a] = 0.0;
    return;
  }
  const Plans& p = plans_for(n);
  const double L = xg.length;
  std::vector<double> re(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> cx(std::size_t(n / 2 + 1));
  auto* cxp = reinterpret_cast<fftw_complex*>(cx.data());
  for (std::size_t a = 0; a < block; ++a) {
    for (int c = 0; c < n; ++c) re[std::size_t(c)] = F[std::size_t(c) * block + a];
    fftw_execute_dft_r2c(p.fwd, re.data(), cxp);
    for (int m = 0; m <= n / 2; ++m) {
      const double w = 2.0 * M_PI * m / L;
      cx[std::size_t(m)] = std::complex<double>(0.0, w) * cx[std::size_t(m)];
    }
    if (n % 2 == 0) cx[std::size_t(n / 2)] = 0.0;
    fftw_execute_dft_c2r(p.bwd, cxp, re.data());
    const double inv = 1.0 / n;
    for (int c = 0; c < n; ++c) out[std::size_t(c) * block + a] = re[std::size_t(c)] * inv;
  }
}

void spatial_dx_scalar(const SpatialGrid& xg, const double* F, double* out) {
  spatial_dx(xg, 1, F, out);
}

std::array<double, 5> ddt5_weights(int offset, double dt) {
  // d/dt weights at node `offset` of a 5-point uniform stencil
  static const double tbl[5][5] = {
      {-25.0, 48.0, -36.0, 16.0, -3.0},
      {-3.0, -10.0, 18.0, -6.0, 1.0},
      {1.0, -8.0, 0.0, 8.0, -1.0},
      {-1.0, 6.0, -18.0, 10.0, 3.0},
      {3.0, -16.0, 36.0, -48.0, 25.0},
  };
  std::array<double, 5> w;
  for (int j = 0; j < 5; ++j) w[std::size_t(j)] = tbl[offset][j] / (12.0 * dt);
  return w;
}

int ddt5_start(int i, int n) {
  if (n < 5) throw ConfigError("time differencing needs at least 5 snapshots");
  int s = i - 2;
  if (s < 0) s = 0;
  if (s > n - 5) s = n - 5;
  return s;
}

KineticField transport_term(const KineticField& F) {
  KineticField out(F.xg, F.vg);
  spatial_dx(F.xg, F.vg.size(), F.data.data(), out.data.data());
  const std::size_t N = F.vg.size();
  for (std::size_t c = 0; c < F.cells(); ++c) {
    double* oc = out.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] *= F.vg.v(a)[0];
  }
  return out;
}

void lagrange4(double t0, double dt, int n, double t, int& start,
               std::array<double, 4>& w) {
  if (n < 4) throw ConfigError("time interpolation needs at least 4 snapshots");
  double s = (t - t0) / dt;
  int i = int(std::floor(s));
  start = i - 1;
  if (start < 0) start = 0;
  if (start > n - 4) start = n - 4;
  const double x = s - start;
  const double nodes[4] = {0.0, 1.0, 2.0, 3.0};
  for (int a = 0; a < 4; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      num *= x - nodes[b];
      den *= nodes[a] - nodes[b];
    }
    w[std::size_t(a)] = num / den;
  }
}

}  // namespace kinlim
