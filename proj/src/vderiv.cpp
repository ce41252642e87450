#include "kinlim/vderiv.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

namespace kinlim {

namespace {

// Walk all n^2 lines along `axis`; fn(base, stride).
template <class F>
void for_each_line(int n, int axis, F&& fn) {
  const std::size_t n2 = std::size_t(n) * n;
  switch (axis) {
    case 0:
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) fn(std::size_t(j) * n + k, n2);
      break;
    case 1:
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) fn(std::size_t(i) * n2 + k, std::size_t(n));
      break;
    default:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) fn((std::size_t(i) * n + j) * n, std::size_t(1));
  }
}

// D along a line; ratio arrays may be null (plain derivative).  acc=false
// overwrites out, acc=true accumulates coeff * result.
void d_line(const double* f, std::size_t b, std::size_t s, double* out, int n,
            double inv2d, const double* r1p, const double* r1m, const double* r2p,
            const double* r2m, bool acc, double coeff) {
  auto F = [&](int i) { return f[b + std::size_t(i) * s]; };
  auto put = [&](int i, double v) {
    if (acc)
      out[b + std::size_t(i) * s] += coeff * v;
    else
      out[b + std::size_t(i) * s] = v;
  };
  auto R = [](const double* r, int i) { return r ? r[i] : 1.0; };
  put(0, (-3.0 * F(0) + 4.0 * R(r1p, 0) * F(1) - R(r2p, 0) * F(2)) * inv2d);
  for (int i = 1; i < n - 1; ++i)
    put(i, (R(r1p, i) * F(i + 1) - R(r1m, i) * F(i - 1)) * inv2d);
  put(n - 1, (3.0 * F(n - 1) - 4.0 * R(r1m, n - 1) * F(n - 2) +
              R(r2m, n - 1) * F(n - 3)) *
                 inv2d);
}

// Exact transpose of d_line's matrix.
void dt_line(const double* f, std::size_t b, std::size_t s, double* out, int n,
             double inv2d, const double* r1p, const double* r1m, const double* r2p,
             const double* r2m, bool acc, double coeff) {
  auto F = [&](int i) { return f[b + std::size_t(i) * s]; };
  auto R = [](const double* r, int i) { return r ? r[i] : 1.0; };
  // accumulate row contributions into a small stack buffer, then store
  constexpr int kMax = 256;
  if (n > kMax) throw ConfigError("velocity derivative: n_v larger than 256");
  double tmp[kMax];
  for (int i = 0; i < n; ++i) tmp[i] = 0.0;
  tmp[0] += -3.0 * F(0);
  tmp[1] += 4.0 * R(r1p, 0) * F(0);
  tmp[2] += -R(r2p, 0) * F(0);
  for (int r = 1; r < n - 1; ++r) {
    tmp[r + 1] += R(r1p, r) * F(r);
    tmp[r - 1] += -R(r1m, r) * F(r);
  }
  tmp[n - 1] += 3.0 * F(n - 1);
  tmp[n - 2] += -4.0 * R(r1m, n - 1) * F(n - 1);
  tmp[n - 3] += R(r2m, n - 1) * F(n - 1);
  for (int i = 0; i < n; ++i) {
    double v = tmp[i] * inv2d;
    if (acc)
      out[b + std::size_t(i) * s] += coeff * v;
    else
      out[b + std::size_t(i) * s] = v;
  }
}

}  // namespace

void apply_d(const VelocityGrid& g, int axis, const double* f, double* out) {
  const double inv2d = 1.0 / (2.0 * g.dv);
  for_each_line(g.n, axis, [&](std::size_t b, std::size_t s) {
    d_line(f, b, s, out, g.n, inv2d, nullptr, nullptr, nullptr, nullptr, false, 1.0);
  });
}

void apply_dt(const VelocityGrid& g, int axis, const double* f, double* out) {
  const double inv2d = 1.0 / (2.0 * g.dv);
  for_each_line(g.n, axis, [&](std::size_t b, std::size_t s) {
    dt_line(f, b, s, out, g.n, inv2d, nullptr, nullptr, nullptr, nullptr, false, 1.0);
  });
}

namespace {
struct Spectral1D {
  fftw_plan fwd = nullptr, bwd = nullptr;
  int n = 0;
};
std::mutex spec_mutex;
std::map<int, Spectral1D> spec_plans;

const Spectral1D& spectral_plans(int n) {
  std::lock_guard<std::mutex> lk(spec_mutex);
  auto it = spec_plans.find(n);
  if (it != spec_plans.end()) return it->second;
  Spectral1D p;
  p.n = n;
  double* re = fftw_alloc_real(std::size_t(n));
  fftw_complex* cx = fftw_alloc_complex(std::size_t(n / 2 + 1));
  p.fwd = fftw_plan_dft_r2c_1d(n, re, cx, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(n, cx, re, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(re);
  fftw_free(cx);
  return spec_plans.emplace(n, p).first->second;
}
}  // namespace

void apply_d_spectral(const VelocityGrid& g, int axis, const double* f,
                      double* out) {
  const int n = g.n;
  const Spectral1D& p = spectral_plans(n);
  const double L = 2.0 * g.vmax;
  thread_local std::vector<double> re_v;
  thread_local std::vector<std::complex<double>> cx_v;
  re_v.resize(std::size_t(n) + 16);
  cx_v.resize(std::size_t(n / 2 + 1) + 8);
  double* re = re_v.data();
  auto* cx = reinterpret_cast<fftw_complex*>(cx_v.data());
  for_each_line(n, axis, [&](std::size_t b, std::size_t s) {
    for (int i = 0; i < n; ++i) re[i] = f[b + std::size_t(i) * s];
    fftw_execute_dft_r2c(p.fwd, re, cx);
    auto* z = cx_v.data();
    for (int k = 0; k <= n / 2; ++k) {
      double w = 2.0 * M_PI * k / L;
      z[k] = std::complex<double>(0.0, w) * z[k];
    }
    z[n / 2] = 0.0;  // drop the Nyquist mode
    fftw_execute_dft_c2r(p.bwd, cx, re);
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) out[b + std::size_t(i) * s] = re[i] * inv;
  });
}

namespace {

// Derivative weights of the 4-node Lagrange interpolant: nodes at integer
// offsets m[0..3] (units of the spacing), derivative evaluated at offset 0.
std::array<double, 4> lagrange_d_weights(const std::array<int, 4>& m) {
  std::array<double, 4> w{};
  for (int k = 0; k < 4; ++k) {
    double den = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != k) den *= double(m[std::size_t(k)] - m[std::size_t(j)]);
    double num = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (j == k) continue;
      double prod = 1.0;
      for (int l = 0; l < 4; ++l) {
        if (l == k || l == j) continue;
        prod *= double(0 - m[std::size_t(l)]);
      }
      num += prod;
    }
    w[std::size_t(k)] = num / den;
  }
  return w;
}

// out(row i) = sum_k w[i][k] f(start[i]+k), optionally accumulating
void stencil_line(const double* f, std::size_t b, std::size_t s, double* out,
                  int n, const int* start,
                  const std::array<double, 4>* w, bool acc, double coeff) {
  for (int i = 0; i < n; ++i) {
    const int s0 = start[i];
    double v = 0.0;
    for (int k = 0; k < 4; ++k)
      v += w[i][std::size_t(k)] * f[b + std::size_t(s0 + k) * s];
    if (acc)
      out[b + std::size_t(i) * s] += coeff * v;
    else
      out[b + std::size_t(i) * s] = v;
  }
}

// exact transpose: out(start[i]+k) += coeff * w[i][k] f(i)
void stencilT_line(const double* f, std::size_t b, std::size_t s, double* out,
                   int n, const int* start,
                   const std::array<double, 4>* w, bool acc, double coeff) {
  if (!acc)
    for (int i = 0; i < n; ++i) out[b + std::size_t(i) * s] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fi = coeff * f[b + std::size_t(i) * s];
    const int s0 = start[i];
    for (int k = 0; k < 4; ++k)
      out[b + std::size_t(s0 + k) * s] += w[i][std::size_t(k)] * fi;
  }
}

}  // namespace

ConjDeriv::ConjDeriv(const VelocityGrid& g, const Moments& m)
    : g_(&g), m_(m), RT_(kRGas * m.T) {
  if (g.n < 4) throw ConfigError("ConjDeriv: n_v must be at least 4");
  for (int ax = 0; ax < 3; ++ax) {
    auto& qh = qh_[std::size_t(ax)];
    auto& start = start_[std::size_t(ax)];
    auto& w = w_[std::size_t(ax)];
    auto& wr = wr_[std::size_t(ax)];
    qh.resize(std::size_t(g.n));
    start.resize(std::size_t(g.n));
    w.resize(std::size_t(g.n));
    wr.resize(std::size_t(g.n));
    const double u = m.u[std::size_t(ax)];
    // per-axis Gaussian factor s_i = exp(-e(i)); conjugation ratios below
    auto e = [&](int i) {
      double d = g.node(i) - u;
      return d * d / (4.0 * RT_);
    };
    const double invd = 1.0 / g.dv;
    for (int i = 0; i < g.n; ++i) {
      qh[std::size_t(i)] = (g.node(i) - u) / (2.0 * RT_);
      int s0 = g.node(i) > u ? i - 3 : i;
      if (s0 < 0) s0 = 0;
      if (s0 > g.n - 4) s0 = g.n - 4;
      start[std::size_t(i)] = s0;
      std::array<int, 4> off;
      for (int k = 0; k < 4; ++k) off[std::size_t(k)] = s0 + k - i;
      std::array<double, 4> lw = lagrange_d_weights(off);
      for (int k = 0; k < 4; ++k) {
        w[std::size_t(i)][std::size_t(k)] = lw[std::size_t(k)] * invd;
        wr[std::size_t(i)][std::size_t(k)] =
            lw[std::size_t(k)] * invd * std::exp(e(s0 + k) - e(i));
      }
    }
  }
}

void ConjDeriv::G(int axis, const double* f, double* out) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencil_line(f, b, s, out, g_->n, start_[a].data(), wr_[a].data(), false,
                 1.0);
  });
}

void ConjDeriv::GT(int axis, const double* f, double* out) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencilT_line(f, b, s, out, g_->n, start_[a].data(), wr_[a].data(), false,
                  1.0);
  });
}

void ConjDeriv::D(int axis, const double* f, double* out) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencil_line(f, b, s, out, g_->n, start_[a].data(), w_[a].data(), false,
                 1.0);
  });
}

void ConjDeriv::DT(int axis, const double* f, double* out) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencilT_line(f, b, s, out, g_->n, start_[a].data(), w_[a].data(), false,
                  1.0);
  });
}

void ConjDeriv::G_acc(int axis, const double* f, double* out, double coeff) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencil_line(f, b, s, out, g_->n, start_[a].data(), wr_[a].data(), true,
                 coeff);
  });
}

void ConjDeriv::GT_acc(int axis, const double* f, double* out, double coeff) const {
  const auto a = std::size_t(axis);
  for_each_line(g_->n, axis, [&](std::size_t b, std::size_t s) {
    stencilT_line(f, b, s, out, g_->n, start_[a].data(), wr_[a].data(), true,
                  coeff);
  });
}

namespace {
// out = base_op(f) - qhat .* f along `axis`
void subtract_q(const VelocityGrid& g, int axis, const Vec& qh, const double* f,
                double* out) {
  const int n = g.n;
  std::size_t a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++a) {
        int c = axis == 0 ? i : (axis == 1 ? j : k);
        out[a] -= qh[std::size_t(c)] * f[a];
      }
}
}  // namespace

void ConjDeriv::dhat(int axis, const double* f, double* out) const {
  G(axis, f, out);
  subtract_q(*g_, axis, qh_[std::size_t(axis)], f, out);
}

void ConjDeriv::dhatT(int axis, const double* f, double* out) const {
  GT(axis, f, out);
  subtract_q(*g_, axis, qh_[std::size_t(axis)], f, out);
}

Vec lorentz_apply(const VelocityGrid& g, const std::array<double, 3>& E,
                  const std::array<double, 3>& B, const double* f) {
  const std::size_t N = g.size();
  Vec out(N, 0.0), d(N);
  for (int ax = 0; ax < 3; ++ax) {
    apply_d(g, ax, f, d.data());
    for (std::size_t a = 0; a < N; ++a) {
      auto v = g.v(a);
      const double cx = v[1] * B[2] - v[2] * B[1];
      const double cy = v[2] * B[0] - v[0] * B[2];
      const double cz = v[0] * B[1] - v[1] * B[0];
      const double w = ax == 0 ? E[0] + cx : (ax == 1 ? E[1] + cy : E[2] + cz);
      out[a] += w * d[a];
    }
  }
  return out;
}

}  // namespace kinlim
