#include "kinlim/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "kinlim/xops.hpp"

namespace kinlim {

FluidState::FluidState(const SpatialGrid& g, bool with_fields)
    : xg(g), maxwell(with_fields) {
  const std::size_t n = g.size();
  rho.assign(n, 1.0);
  T.assign(n, 1.0);
  for (int i = 0; i < 3; ++i) {
    u[std::size_t(i)].assign(n, 0.0);
    E[std::size_t(i)].assign(n, 0.0);
    B[std::size_t(i)].assign(n, 0.0);
  }
}

std::vector<Moments> FluidState::moments() const {
  std::vector<Moments> m(xg.size());
  for (std::size_t c = 0; c < m.size(); ++c) m[c] = moments(c);
  return m;
}

double sound_speed(double T) { return std::sqrt(5.0 * kRGas * T / 3.0); }

namespace {

struct Cons {
  double rho;
  std::array<double, 3> m;
  double etot;
};

Cons to_cons(const FluidState& s, std::size_t c) {
  Cons q;
  q.rho = s.rho[c];
  double u2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    q.m[std::size_t(i)] = s.rho[c] * s.u[std::size_t(i)][c];
    u2 += s.u[std::size_t(i)][c] * s.u[std::size_t(i)][c];
  }
  q.etot = s.rho[c] * (s.T[c] + 0.5 * u2);
  return q;
}

// physical flux of the conservative Euler variables along x
void euler_flux(const Cons& q, std::array<double, 5>& f) {
  const double rho = q.rho;
  const double ux = q.m[0] / rho, uy = q.m[1] / rho, uz = q.m[2] / rho;
  const double u2 = ux * ux + uy * uy + uz * uz;
  const double T = q.etot / rho - 0.5 * u2;
  const double p = rho * kRGas * T;
  f[0] = q.m[0];
  f[1] = q.m[0] * ux + p;
  f[2] = q.m[1] * ux;
  f[3] = q.m[2] * ux;
  f[4] = (q.etot + p) * ux;
}

void check_positive(const FluidState& s) {
  for (std::size_t c = 0; c < s.xg.size(); ++c)
    if (s.rho[c] <= 0.0 || s.T[c] <= 0.0)
      throw DegenerateDensity("fluid state left the positive regime");
}

FluidTend zero_tend(const SpatialGrid& xg, bool fields) {
  FluidTend t;
  const std::size_t n = xg.size();
  t.d_rho.assign(n, 0.0);
  t.d_etot.assign(n, 0.0);
  for (int i = 0; i < 3; ++i) {
    t.d_m[std::size_t(i)].assign(n, 0.0);
    if (fields) {
      t.d_E[std::size_t(i)].assign(n, 0.0);
      t.d_B[std::size_t(i)].assign(n, 0.0);
    }
  }
  return t;
}

void spectral_divergence(const SpatialGrid& xg, const Vec& flux, Vec& acc) {
  Vec d(flux.size());
  spatial_dx_scalar(xg, flux.data(), d.data());
  for (std::size_t c = 0; c < acc.size(); ++c) acc[c] -= d[c];
}

FluidTend euler_rhs_spectral(const FluidState& s) {
  const std::size_t n = s.xg.size();
  FluidTend t = zero_tend(s.xg, false);
  std::array<Vec, 5> flux;
  for (auto& f : flux) f.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::array<double, 5> f;
    euler_flux(to_cons(s, c), f);
    for (int q = 0; q < 5; ++q) flux[std::size_t(q)][c] = f[std::size_t(q)];
  }
  spectral_divergence(s.xg, flux[0], t.d_rho);
  for (int i = 0; i < 3; ++i)
    spectral_divergence(s.xg, flux[std::size_t(i + 1)], t.d_m[std::size_t(i)]);
  spectral_divergence(s.xg, flux[4], t.d_etot);
  return t;
}

// MUSCL (unlimited central slopes) + Rusanov flux: second order on smooth
// data, which is the regime this artifact runs in.
FluidTend euler_rhs_fv(const FluidState& s) {
  const int n = s.xg.n;
  const double dx = s.xg.dx();
  FluidTend t = zero_tend(s.xg, false);
  // conservative cell values
  std::vector<Cons> q(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) q[std::size_t(c)] = to_cons(s, std::size_t(c));
  auto comp = [&](const Cons& v, int k) -> double {
    switch (k) {
      case 0: return v.rho;
      case 4: return v.etot;
      default: return v.m[std::size_t(k - 1)];
    }
  };
  auto set_comp = [&](Cons& v, int k, double x) {
    switch (k) {
      case 0: v.rho = x; break;
      case 4: v.etot = x; break;
      default: v.m[std::size_t(k - 1)] = x; break;
    }
  };
  auto wavespeed = [&](const Cons& v) {
    const double ux = v.m[0] / v.rho;
    const double u2 = (v.m[0] * v.m[0] + v.m[1] * v.m[1] + v.m[2] * v.m[2]) /
                      (v.rho * v.rho);
    const double T = v.etot / v.rho - 0.5 * u2;
    return std::fabs(ux) + sound_speed(std::max(T, 1e-14));
  };
  // interface i+1/2 between cells i and i+1
  std::vector<std::array<double, 5>> iface(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int im = s.xg.wrap(i - 1), ip = s.xg.wrap(i + 1), ipp = s.xg.wrap(i + 2);
    Cons ql, qr;
    for (int k = 0; k < 5; ++k) {
      const double sl = 0.5 * (comp(q[std::size_t(ip)], k) - comp(q[std::size_t(im)], k));
      const double sr = 0.5 * (comp(q[std::size_t(ipp)], k) - comp(q[std::size_t(i)], k));
      set_comp(ql, k, comp(q[std::size_t(i)], k) + 0.5 * sl);
      set_comp(qr, k, comp(q[std::size_t(ip)], k) - 0.5 * sr);
    }
    std::array<double, 5> fl, fr;
    euler_flux(ql, fl);
    euler_flux(qr, fr);
    const double a = std::max(wavespeed(ql), wavespeed(qr));
    for (int k = 0; k < 5; ++k)
      iface[std::size_t(i)][std::size_t(k)] =
          0.5 * (fl[std::size_t(k)] + fr[std::size_t(k)]) -
          0.5 * a * (comp(qr, k) - comp(ql, k));
  }
  for (int c = 0; c < n; ++c) {
    const int cm = s.xg.wrap(c - 1);
    for (int k = 0; k < 5; ++k) {
      const double d = (iface[std::size_t(c)][std::size_t(k)] -
                        iface[std::size_t(cm)][std::size_t(k)]) / dx;
      if (k == 0)
        t.d_rho[std::size_t(c)] -= d;
      else if (k == 4)
        t.d_etot[std::size_t(c)] -= d;
      else
        t.d_m[std::size_t(k - 1)][std::size_t(c)] -= d;
    }
  }
  return t;
}

}  // namespace

FluidTend euler_rhs(const FluidState& s, SpaceScheme scheme) {
  check_positive(s);
  return scheme == SpaceScheme::spectral ? euler_rhs_spectral(s)
                                         : euler_rhs_fv(s);
}

void curl_x(const SpatialGrid& xg, const std::array<Vec, 3>& V,
            std::array<Vec, 3>& out) {
  const std::size_t n = xg.size();
  Vec dy(n), dz(n);
  spatial_dx_scalar(xg, V[1].data(), dy.data());
  spatial_dx_scalar(xg, V[2].data(), dz.data());
  out[0].assign(n, 0.0);
  out[1].resize(n);
  out[2].resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    out[1][c] = -dz[c];
    out[2][c] = dy[c];
  }
}

FluidTend euler_maxwell_rhs(const FluidState& s) {
  check_positive(s);
  const std::size_t n = s.xg.size();
  // mass and momentum flux (p = (2/3) rho^{5/3} since T = rho^{2/3})
  FluidTend t = zero_tend(s.xg, true);
  std::array<Vec, 4> flux;
  for (auto& f : flux) f.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double p = (2.0 / 3.0) * std::pow(s.rho[c], 5.0 / 3.0);
    flux[0][c] = s.rho[c] * s.u[0][c];
    for (int i = 0; i < 3; ++i)
      flux[std::size_t(i + 1)][c] =
          s.rho[c] * s.u[std::size_t(i)][c] * s.u[0][c] + (i == 0 ? p : 0.0);
  }
  spectral_divergence(s.xg, flux[0], t.d_rho);
  for (int i = 0; i < 3; ++i)
    spectral_divergence(s.xg, flux[std::size_t(i + 1)], t.d_m[std::size_t(i)]);
  // Lorentz source -rho (E + u x B)
  for (std::size_t c = 0; c < n; ++c) {
    const double ux = s.u[0][c], uy = s.u[1][c], uz = s.u[2][c];
    const double cx = uy * s.B[2][c] - uz * s.B[1][c];
    const double cy = uz * s.B[0][c] - ux * s.B[2][c];
    const double cz = ux * s.B[1][c] - uy * s.B[0][c];
    t.d_m[0][c] -= s.rho[c] * (s.E[0][c] + cx);
    t.d_m[1][c] -= s.rho[c] * (s.E[1][c] + cy);
    t.d_m[2][c] -= s.rho[c] * (s.E[2][c] + cz);
  }
  // Maxwell block
  std::array<Vec, 3> cB, cE;
  curl_x(s.xg, s.B, cB);
  curl_x(s.xg, s.E, cE);
  for (int i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < n; ++c) {
      t.d_E[std::size_t(i)][c] =
          cB[std::size_t(i)][c] + 4.0 * M_PI * s.rho[c] * s.u[std::size_t(i)][c];
      t.d_B[std::size_t(i)][c] = -cE[std::size_t(i)][c];
    }
  return t;
}

double gauss_residual(const FluidState& s) {
  Vec d(s.xg.size());
  spatial_dx_scalar(s.xg, s.E[0].data(), d.data());
  double r = 0.0;
  for (std::size_t c = 0; c < d.size(); ++c)
    r = std::max(r, std::fabs(d[c] - 4.0 * M_PI * (1.0 - s.rho[c])));
  return r;
}

double divB_residual(const FluidState& s) {
  Vec d(s.xg.size());
  spatial_dx_scalar(s.xg, s.B[0].data(), d.data());
  double r = 0.0;
  for (std::size_t c = 0; c < d.size(); ++c) r = std::max(r, std::fabs(d[c]));
  return r;
}

PrimTend primitive_tendency(const FluidState& s, SpaceScheme scheme) {
  FluidTend t = s.maxwell ? euler_maxwell_rhs(s) : euler_rhs(s, scheme);
  PrimTend p;
  const std::size_t n = s.xg.size();
  p.d_rho = t.d_rho;
  p.d_T.resize(n);
  for (int i = 0; i < 3; ++i) p.d_u[std::size_t(i)].resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    double u2 = 0.0, udu = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double ui = s.u[std::size_t(i)][c];
      const double dui =
          (t.d_m[std::size_t(i)][c] - ui * t.d_rho[c]) / s.rho[c];
      p.d_u[std::size_t(i)][c] = dui;
      u2 += ui * ui;
      udu += ui * dui;
    }
    if (s.maxwell) {
      // T = rho^{2/3}
      p.d_T[c] = (2.0 / 3.0) * std::pow(s.rho[c], -1.0 / 3.0) * t.d_rho[c];
    } else {
      p.d_T[c] = t.d_etot[c] / s.rho[c] -
                 (s.T[c] + 0.5 * u2) * t.d_rho[c] / s.rho[c] - udu;
    }
  }
  return p;
}

namespace {

void axpy_state(FluidState& s, const FluidState& base, double a,
                const FluidTend& t) {
  // conservative update: s = cons(base) + a * t, converted back to primitives
  const std::size_t n = base.xg.size();
  s = base;
  for (std::size_t c = 0; c < n; ++c) {
    Cons q = to_cons(base, c);
    q.rho += a * t.d_rho[c];
    for (int i = 0; i < 3; ++i) q.m[std::size_t(i)] += a * t.d_m[std::size_t(i)][c];
    if (!base.maxwell) q.etot += a * t.d_etot[c];
    if (q.rho <= 0.0) throw DegenerateDensity("vacuum during fluid step");
    s.rho[c] = q.rho;
    double u2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      s.u[std::size_t(i)][c] = q.m[std::size_t(i)] / q.rho;
      u2 += s.u[std::size_t(i)][c] * s.u[std::size_t(i)][c];
    }
    s.T[c] = base.maxwell ? std::pow(q.rho, 2.0 / 3.0)
                          : q.etot / q.rho - 0.5 * u2;
    if (s.T[c] <= 0.0) throw DegenerateDensity("negative temperature");
    if (base.maxwell)
      for (int i = 0; i < 3; ++i) {
        s.E[std::size_t(i)][c] =
            base.E[std::size_t(i)][c] + a * t.d_E[std::size_t(i)][c];
        s.B[std::size_t(i)][c] =
            base.B[std::size_t(i)][c] + a * t.d_B[std::size_t(i)][c];
      }
  }
}

void blend(FluidState& out, const FluidState& a, double wa,
           const FluidState& b, double wb) {
  // convex combination in conservative variables
  const std::size_t n = a.xg.size();
  out = a;
  for (std::size_t c = 0; c < n; ++c) {
    Cons qa = to_cons(a, c), qb = to_cons(b, c);
    Cons q;
    q.rho = wa * qa.rho + wb * qb.rho;
    for (int i = 0; i < 3; ++i)
      q.m[std::size_t(i)] = wa * qa.m[std::size_t(i)] + wb * qb.m[std::size_t(i)];
    q.etot = wa * qa.etot + wb * qb.etot;
    out.rho[c] = q.rho;
    double u2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      out.u[std::size_t(i)][c] = q.m[std::size_t(i)] / q.rho;
      u2 += out.u[std::size_t(i)][c] * out.u[std::size_t(i)][c];
    }
    out.T[c] = a.maxwell ? std::pow(q.rho, 2.0 / 3.0) : q.etot / q.rho - 0.5 * u2;
    if (a.maxwell)
      for (int i = 0; i < 3; ++i) {
        out.E[std::size_t(i)][c] =
            wa * a.E[std::size_t(i)][c] + wb * b.E[std::size_t(i)][c];
        out.B[std::size_t(i)][c] =
            wa * a.B[std::size_t(i)][c] + wb * b.B[std::size_t(i)][c];
      }
  }
}

FluidTend rhs_dispatch(const FluidState& s, SpaceScheme scheme,
                       const FluidForcing& forcing) {
  FluidTend t = s.maxwell ? euler_maxwell_rhs(s) : euler_rhs(s, scheme);
  if (forcing) forcing(s, t);
  return t;
}

}  // namespace

std::vector<FluidState> advance_fluid(const FluidState& s0, double dt,
                                      int n_steps, SpaceScheme scheme,
                                      int snap_every,
                                      const FluidForcing& forcing) {
  std::vector<FluidState> snaps;
  snaps.push_back(s0);
  FluidState s = s0;
  const double dx = s.xg.dx();
  Vec dux(s.xg.size());
  for (int step = 0; step < n_steps; ++step) {
    // CFL and steepening guards
    double amax = 0.0;
    for (std::size_t c = 0; c < s.xg.size(); ++c)
      amax = std::max(amax, std::fabs(s.u[0][c]) + sound_speed(s.T[c]));
    if (amax * dt / dx > 1.0)
      throw NumericsError("fluid CFL violation: reduce dt");
    spatial_dx_scalar(s.xg, s.u[0].data(), dux.data());
    double gmax = 0.0;
    for (double g : dux) gmax = std::max(gmax, std::fabs(g));
    if (gmax * dt > 0.1)
      throw NumericsError("fluid steepening monitor tripped: stop before t_e");

    // SSP-RK3 (Shu-Osher)
    FluidState s1, s2, s3;
    axpy_state(s1, s, dt, rhs_dispatch(s, scheme, forcing));
    s1.time = s.time + dt;
    FluidState tmp;
    axpy_state(tmp, s1, dt, rhs_dispatch(s1, scheme, forcing));
    blend(s2, s, 0.75, tmp, 0.25);
    s2.time = s.time + 0.5 * dt;
    axpy_state(tmp, s2, dt, rhs_dispatch(s2, scheme, forcing));
    blend(s3, s, 1.0 / 3.0, tmp, 2.0 / 3.0);
    s3.time = s.time + dt;
    s = s3;
    if ((step + 1) % snap_every == 0 || step + 1 == n_steps)
      snaps.push_back(s);
  }
  return snaps;
}

FluidState FluidSeries::eval(double t) const {
  if (snaps.size() == 1) return snaps.front();
  int start = 0;
  std::array<double, 4> w{};
  lagrange4(t0, dt, int(snaps.size()), t, start, w);
  FluidState out = snaps[std::size_t(start)];
  const std::size_t n = out.xg.size();
  auto mix = [&](auto get) {
    for (std::size_t c = 0; c < n; ++c) {
      double v = 0.0;
      for (int j = 0; j < 4; ++j)
        v += w[std::size_t(j)] * get(snaps[std::size_t(start + j)], c);
      get(out, c) = v;
    }
  };
  mix([](auto& s, std::size_t c) -> double& { return const_cast<Vec&>(s.rho)[c]; });
  mix([](auto& s, std::size_t c) -> double& { return const_cast<Vec&>(s.T)[c]; });
  for (int i = 0; i < 3; ++i) {
    mix([i](auto& s, std::size_t c) -> double& {
      return const_cast<Vec&>(s.u[std::size_t(i)])[c];
    });
    mix([i](auto& s, std::size_t c) -> double& {
      return const_cast<Vec&>(s.E[std::size_t(i)])[c];
    });
    mix([i](auto& s, std::size_t c) -> double& {
      return const_cast<Vec&>(s.B[std::size_t(i)])[c];
    });
  }
  out.time = t;
  return out;
}

std::vector<Moments> FluidSeries::moments_at(double t) const {
  return eval(t).moments();
}

FluidSeries make_series(std::vector<FluidState> snaps) {
  FluidSeries fs;
  if (snaps.empty()) throw ConfigError("empty fluid trajectory");
  fs.t0 = snaps.front().time;
  fs.dt = snaps.size() > 1 ? snaps[1].time - snaps[0].time : 1.0;
  fs.snaps = std::move(snaps);
  return fs;
}

namespace {

// forward-mode scalar: value and d/dtheta
struct Dual {
  double v = 0.0, d = 0.0;
  Dual() = default;
  Dual(double val, double der) : v(val), d(der) {}
};
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }
Dual operator+(double a, Dual b) { return {a + b.v, b.d}; }
Dual sin_d(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }

struct MmsFields {
  Dual rho, ux, T;
};
MmsFields mms_fields(double theta, double a) {
  Dual th(theta, 1.0);
  Dual s = sin_d(th);
  MmsFields f;
  f.rho = 1.0 + a * s;
  f.ux = a * s;
  f.T = 1.0 + a * s;
  return f;
}

}  // namespace

FluidState mms_state(const SpatialGrid& xg, double a, double t) {
  FluidState s(xg, false);
  s.time = t;
  for (int c = 0; c < xg.n; ++c) {
    const double theta = 2.0 * M_PI * (xg.x(c) - t) / xg.length;
    MmsFields f = mms_fields(theta, a);
    s.rho[std::size_t(c)] = f.rho.v;
    s.u[0][std::size_t(c)] = f.ux.v;
    s.T[std::size_t(c)] = f.T.v;
  }
  return s;
}

FluidForcing mms_forcing(double a) {
  // volumetric source S = d_t Q + d_x F(Q) of the manufactured solution;
  // with theta = k (x - t), d_t = -k d/dtheta and d_x = +k d/dtheta, so
  // S = k (F' - Q') componentwise.
  return [a](const FluidState& s, FluidTend& t) {
    const double k = 2.0 * M_PI / s.xg.length;
    for (int c = 0; c < s.xg.n; ++c) {
      MmsFields f = mms_fields(k * (s.xg.x(c) - s.time), a);
      Dual m = f.rho * f.ux;
      Dual u2 = f.ux * f.ux;
      Dual etot = f.rho * (f.T + 0.5 * u2);
      Dual p = kRGas * (f.rho * f.T);
      Dual flux_rho = m;
      Dual flux_mx = m * f.ux + p;
      Dual flux_e = (etot + p) * f.ux;
      t.d_rho[std::size_t(c)] += k * (flux_rho.d - f.rho.d);
      t.d_m[0][std::size_t(c)] += k * (flux_mx.d - m.d);
      t.d_etot[std::size_t(c)] += k * (flux_e.d - etot.d);
    }
  };
}

}  // namespace kinlim
