#include "kinlim/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

namespace kinlim {

std::array<double, 6> phi_kernel(const std::array<double, 3>& v, double gamma) {
  const double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  if (r2 == 0.0) throw NumericsError("phi_kernel: singular input v = 0");
  const double scale = std::pow(r2, 0.5 * (gamma + 2.0));
  std::array<double, 6> out;
  for (int c = 0; c < 6; ++c) {
    const int i = kSymIdx[std::size_t(c)][0], j = kSymIdx[std::size_t(c)][1];
    double p = (i == j ? 1.0 : 0.0) - v[std::size_t(i)] * v[std::size_t(j)] / r2;
    out[std::size_t(c)] = p * scale;
  }
  return out;
}

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FFTBuf {
  double* re = nullptr;
  fftw_complex* cx = nullptr;
  FFTBuf(std::size_t nr, std::size_t nc) {
    re = fftw_alloc_real(nr);
    cx = fftw_alloc_complex(nc);
  }
  ~FFTBuf() {
    fftw_free(re);
    fftw_free(cx);
  }
};
}  // namespace

struct ConvEngine::Impl {
  int P = 0;                 // padded extent per axis (2n)
  std::size_t nreal = 0;     // P^3
  std::size_t ncplx = 0;     // P*P*(P/2+1)
  fftw_plan fwd = nullptr;   // r2c, out-of-place
  fftw_plan bwd = nullptr;   // c2r, out-of-place
  std::array<std::vector<std::complex<double>>, 6> kspec;
  double scale = 0.0;        // dv^3 / P^3

  ~Impl() {
    std::lock_guard<std::mutex> lk(plan_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

ConvEngine::ConvEngine(const VelocityGrid& g, double gamma)
    : g_(g), impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.P = 2 * g.n;
  const int P = im.P;
  im.nreal = std::size_t(P) * P * P;
  im.ncplx = std::size_t(P) * P * (P / 2 + 1);
  im.scale = g.weight() / double(im.nreal);

  FFTBuf buf(im.nreal, im.ncplx);
  {
    std::lock_guard<std::mutex> lk(plan_mutex());
    im.fwd = fftw_plan_dft_r2c_3d(P, P, P, buf.re, buf.cx, FFTW_ESTIMATE);
    im.bwd = fftw_plan_dft_c2r_3d(P, P, P, buf.cx, buf.re, FFTW_ESTIMATE);
  }

  // Tabulate the kernel on wrapped difference indices.  Reachable differences
  // are |d| <= n-1 per axis; the ambiguous index n and the self term d = 0
  // are zeroed.
  for (int c = 0; c < 6; ++c) im.kspec[std::size_t(c)].assign(im.ncplx, {0, 0});
  for (int c = 0; c < 6; ++c) {
    for (std::size_t a = 0; a < im.nreal; ++a) buf.re[a] = 0.0;
    for (int di = -(g.n - 1); di <= g.n - 1; ++di)
      for (int dj = -(g.n - 1); dj <= g.n - 1; ++dj)
        for (int dk = -(g.n - 1); dk <= g.n - 1; ++dk) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          std::array<double, 3> d{di * g.dv, dj * g.dv, dk * g.dv};
          std::size_t wi = std::size_t((di + P) % P), wj = std::size_t((dj + P) % P),
                      wk = std::size_t((dk + P) % P);
          buf.re[(wi * P + wj) * P + wk] = phi_kernel(d, gamma)[std::size_t(c)];
        }
    fftw_execute_dft_r2c(im.fwd, buf.re, buf.cx);
    auto* out = reinterpret_cast<std::complex<double>*>(buf.cx);
    for (std::size_t a = 0; a < im.ncplx; ++a) im.kspec[std::size_t(c)][a] = out[a];
  }
}

ConvEngine::~ConvEngine() = default;

void ConvEngine::corrupt_kernel_sign() {
  for (auto& z : impl_->kspec[3]) z = -z;
}

namespace {
// scatter the n^3 block into the padded cube (rest zero), and gather back
void pad_in(const double* g, int n, int P, double* re) {
  std::fill(re, re + std::size_t(P) * P * P, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* src = g + (std::size_t(i) * n + j) * n;
      double* dst = re + (std::size_t(i) * P + j) * P;
      for (int k = 0; k < n; ++k) dst[k] = src[k];
    }
}
void gather_out(const double* re, int n, int P, double s, double* g) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* src = re + (std::size_t(i) * P + j) * P;
      double* dst = g + (std::size_t(i) * n + j) * n;
      for (int k = 0; k < n; ++k) dst[k] = src[k] * s;
    }
}
}  // namespace

void ConvEngine::sigma(const double* g, SigmaField& out) const {
  const Impl& im = *impl_;
  FFTBuf buf(im.nreal, im.ncplx);
  FFTBuf work(im.nreal, im.ncplx);
  pad_in(g, g_.n, im.P, buf.re);
  fftw_execute_dft_r2c(im.fwd, buf.re, buf.cx);
  const auto* gs = reinterpret_cast<const std::complex<double>*>(buf.cx);
  for (int c = 0; c < 6; ++c) {
    auto* ws = reinterpret_cast<std::complex<double>*>(work.cx);
    const auto& ks = im.kspec[std::size_t(c)];
    for (std::size_t a = 0; a < im.ncplx; ++a) ws[a] = ks[a] * gs[a];
    fftw_execute_dft_c2r(im.bwd, work.cx, work.re);
    out.c[std::size_t(c)].resize(g_.size());
    gather_out(work.re, g_.n, im.P, im.scale, out.c[std::size_t(c)].data());
  }
}

SigmaField ConvEngine::sigma(const Vec& g) const {
  SigmaField out;
  sigma(g.data(), out);
  return out;
}

void ConvEngine::contract(const std::array<const double*, 3>& in,
                          std::array<Vec, 3>& out) const {
  const Impl& im = *impl_;
  FFTBuf buf(im.nreal, im.ncplx);
  std::array<std::vector<std::complex<double>>, 3> acc;
  for (auto& a : acc) a.assign(im.ncplx, {0, 0});
  for (int j = 0; j < 3; ++j) {
    pad_in(in[std::size_t(j)], g_.n, im.P, buf.re);
    fftw_execute_dft_r2c(im.fwd, buf.re, buf.cx);
    const auto* gs = reinterpret_cast<const std::complex<double>*>(buf.cx);
    for (int i = 0; i < 3; ++i) {
      const auto& ks = im.kspec[std::size_t(sym_index(i, j))];
      auto& dst = acc[std::size_t(i)];
      for (std::size_t a = 0; a < im.ncplx; ++a) dst[a] += ks[a] * gs[a];
    }
  }
  for (int i = 0; i < 3; ++i) {
    auto* ws = reinterpret_cast<std::complex<double>*>(buf.cx);
    for (std::size_t a = 0; a < im.ncplx; ++a) ws[a] = acc[std::size_t(i)][a];
    fftw_execute_dft_c2r(im.bwd, buf.cx, buf.re);
    out[std::size_t(i)].resize(g_.size());
    gather_out(buf.re, g_.n, im.P, im.scale, out[std::size_t(i)].data());
  }
}

}  // namespace kinlim
