#include <cmath>

#include "doctest.h"
#include "kinlim/fluid.hpp"

using namespace kinlim;

namespace {
double field_rel_err(const FluidState& a, const FluidState& b) {
  double num = 0.0, den = 0.0;
  auto acc = [&](const Vec& x, const Vec& y) {
    for (std::size_t c = 0; c < x.size(); ++c) {
      num += (x[c] - y[c]) * (x[c] - y[c]);
      den += y[c] * y[c];
    }
  };
  acc(a.rho, b.rho);
  acc(a.T, b.T);
  for (int i = 0; i < 3; ++i) acc(a.u[std::size_t(i)], b.u[std::size_t(i)]);
  return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("manufactured solution: forcing matches the analytic time derivative") {
  SpatialGrid xg(32, 1.0);
  const double a = 0.05, t = 0.3, h = 1e-5;
  FluidState s = mms_state(xg, a, t);
  FluidTend tend = euler_rhs(s, SpaceScheme::spectral);
  mms_forcing(a)(s, tend);
  FluidState sp = mms_state(xg, a, t + h), sm = mms_state(xg, a, t - h);
  for (int c = 0; c < xg.n; ++c) {
    const std::size_t cc = std::size_t(c);
    const double want_drho = (sp.rho[cc] - sm.rho[cc]) / (2.0 * h);
    CHECK(tend.d_rho[cc] == doctest::Approx(want_drho).epsilon(1e-5));
    const double want_dm =
        (sp.rho[cc] * sp.u[0][cc] - sm.rho[cc] * sm.u[0][cc]) / (2.0 * h);
    CHECK(tend.d_m[0][cc] == doctest::Approx(want_dm).epsilon(1e-5));
  }
}

TEST_CASE("manufactured solution: integrator converges at order >= 2 in dt") {
  SpatialGrid xg(32, 1.0);
  const double a = 0.05, t_end = 0.1;
  auto err_at = [&](double dt) {
    const int n = int(std::round(t_end / dt));
    auto snaps = advance_fluid(mms_state(xg, a, 0.0), dt, n,
                               SpaceScheme::spectral, n, mms_forcing(a));
    return field_rel_err(snaps.back(), mms_state(xg, a, t_end));
  };
  const double e1 = err_at(2e-3), e2 = err_at(1e-3);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 2.0);
}

TEST_CASE("small acoustic disturbance travels at sqrt(5RT/3) within 2%") {
  SpatialGrid xg(64, 2.0);
  FluidState s(xg);
  const double amp = 1e-5, k = 2.0 * M_PI / xg.length;
  const double cs_want = sound_speed(1.0);
  // right-moving linear acoustic eigenmode: u' = c_s drho/rho, isentropic
  // temperature perturbation dT = (2/3) T drho / rho
  for (int c = 0; c < xg.n; ++c) {
    const double d = amp * std::sin(k * xg.x(c));
    s.rho[std::size_t(c)] = 1.0 + d;
    s.u[0][std::size_t(c)] = cs_want * d;
    s.T[std::size_t(c)] = 1.0 + (2.0 / 3.0) * d;
  }
  // the density profile translates: drho = amp sin(k x - omega t)
  const double dt = 5e-4, t_end = 0.5;
  auto snaps = advance_fluid(s, dt, int(t_end / dt), SpaceScheme::spectral,
                             int(t_end / dt));
  const FluidState& f = snaps.back();
  double S = 0.0, C = 0.0;
  for (int c = 0; c < xg.n; ++c) {
    S += (f.rho[std::size_t(c)] - 1.0) * std::sin(k * xg.x(c));
    C += (f.rho[std::size_t(c)] - 1.0) * std::cos(k * xg.x(c));
  }
  S *= 2.0 / xg.n;
  C *= 2.0 / xg.n;
  const double phase = std::atan2(-C, S);  // = omega t (mod 2 pi)
  const double cs = phase / (k * t_end);
  CHECK(cs == doctest::Approx(sound_speed(1.0)).epsilon(0.02));
  // isothermal speed sqrt(RT) would be 23% off; the test distinguishes them
  CHECK(std::fabs(cs - std::sqrt(kRGas)) > 0.1 * cs);
}

TEST_CASE("spectral Euler integration conserves mass to rounding") {
  SpatialGrid xg(32, 1.0);
  FluidState s = mms_state(xg, 0.08, 0.0);
  auto snaps = advance_fluid(s, 1e-3, 200, SpaceScheme::spectral, 200);
  double m0 = 0.0, m1 = 0.0;
  for (int c = 0; c < xg.n; ++c) {
    m0 += s.rho[std::size_t(c)];
    m1 += snaps.back().rho[std::size_t(c)];
  }
  CHECK(m1 == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("Euler-Maxwell branch preserves the Gauss and divB constraints") {
  SpatialGrid xg(32, 1.0);
  FluidState s(xg, true);
  const double k = 2.0 * M_PI / xg.length, a = 0.02;
  for (int c = 0; c < xg.n; ++c) {
    const double x = xg.x(c);
    s.rho[std::size_t(c)] = 1.0 + a * std::sin(k * x);
    s.T[std::size_t(c)] = std::pow(s.rho[std::size_t(c)], 2.0 / 3.0);
    s.u[0][std::size_t(c)] = 0.01 * std::cos(k * x);
    // div E = 4 pi (1 - rho)  =>  E_x = (4 pi a / k) cos(k x)
    s.E[0][std::size_t(c)] = 4.0 * M_PI * a / k * std::cos(k * x);
    s.B[2][std::size_t(c)] = 0.5;
  }
  CHECK(gauss_residual(s) < 1e-10);
  CHECK(divB_residual(s) < 1e-12);
  auto snaps = advance_fluid(s, 2.5e-4, 400, SpaceScheme::spectral, 400);
  CHECK(gauss_residual(snaps.back()) < 1e-8);
  CHECK(divB_residual(snaps.back()) < 1e-10);
}

TEST_CASE("primitive tendencies are consistent with the conservative ones") {
  SpatialGrid xg(32, 1.0);
  FluidState s = mms_state(xg, 0.06, 0.2);
  FluidTend tend = euler_rhs(s, SpaceScheme::spectral);
  PrimTend pt = primitive_tendency(s, SpaceScheme::spectral);
  for (int c = 0; c < xg.n; ++c) {
    const std::size_t cc = std::size_t(c);
    CHECK(pt.d_rho[cc] == doctest::Approx(tend.d_rho[cc]).epsilon(1e-11));
    // d(rho u) = rho du + u drho
    const double want =
        s.rho[cc] * pt.d_u[0][cc] + s.u[0][cc] * pt.d_rho[cc];
    CHECK(tend.d_m[0][cc] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("vacuum states are rejected") {
  SpatialGrid xg(8, 1.0);
  FluidState s(xg);
  s.rho.assign(xg.size(), 0.0);
  CHECK_THROWS_AS(euler_rhs(s, SpaceScheme::spectral), DegenerateDensity);
}
