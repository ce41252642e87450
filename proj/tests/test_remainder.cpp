#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "kinlim/remainder.hpp"

using namespace kinlim;

namespace {
FluidSeries equilibrium_series(const SpatialGrid& xg, int n_steps, double dt) {
  FluidState s(xg);
  return make_series(advance_fluid(s, dt, n_steps, SpaceScheme::spectral, 1));
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}
}  // namespace

TEST_CASE("transport forcing multiplier matches an independent cubic oracle") {
  VelocityGrid g(12, 6.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  Moments m{1.0 + U(rng), {U(rng), U(rng), U(rng)}, 1.0 + U(rng)};
  Moments dtm{U(rng), {U(rng), U(rng), U(rng)}, U(rng)};
  Moments dxm{U(rng), {U(rng), U(rng), U(rng)}, U(rng)};
  Vec got = forcing_multiplier(g, m, dtm, dxm);
  // independent transcription of (d_t + v_x d_x) log M^{1/2}:
  //   1/2 [ drho/rho - (3/2) dT/T + (v-u).du/(RT) + |v-u|^2 dT/(2RT^2) ]
  // with each primitive derivative d = d_t + v_x d_x.
  const double RT = kRGas * m.T;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    const double drho = dtm.rho + v[0] * dxm.rho;
    const double dT = dtm.T + v[0] * dxm.T;
    double udot = 0.0, w2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double du = dtm.u[std::size_t(i)] + v[0] * dxm.u[std::size_t(i)];
      const double w = v[std::size_t(i)] - m.u[std::size_t(i)];
      udot += w * du;
      w2 += w * w;
    }
    const double want = 0.5 * (drho / m.rho - 1.5 * dT / m.T + udot / RT +
                               w2 * dT / (2.0 * RT * m.T));
    CHECK(got[a] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("zero remainder at equilibrium stays zero under the IMEX step") {
  SpatialGrid xg(4, 1.0);
  VelocityGrid vg(12, 6.0);
  ConvEngine eng(vg);
  FluidSeries fluid = equilibrium_series(xg, 8, 1e-3);
  ExpansionSet set = build_coefficients(eng, fluid, 2, false);
  RemainderState s = make_remainder_state(xg, vg, 0.1, false, 0.9);
  RemainderState next = step_imex(eng, s, set, fluid, 1e-3);
  // the only drive is the expansion's quadrature-floor truncation source
  CHECK(max_abs(next.f.data) < 1e-6);
  CHECK(next.time == doctest::Approx(1e-3));
}

TEST_CASE("IMEX collision step contracts the microscopic part") {
  SpatialGrid xg(1, 1.0);
  VelocityGrid vg(12, 6.0);
  ConvEngine eng(vg);
  FluidSeries fluid = equilibrium_series(xg, 8, 1e-3);
  ExpansionSet set = build_coefficients(eng, fluid, 2, false);
  RemainderState s = make_remainder_state(xg, vg, 0.1, false, 0.9);
  // seed a microscopic (null-complement) disturbance
  MacroBasis basis(vg, Moments{});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f(vg.size());
  for (std::size_t a = 0; a < vg.size(); ++a) {
    auto v = vg.v(a);
    f[a] = 1e-3 * U(rng) *
           std::exp(-0.3 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  f = basis.complement(f);
  for (std::size_t a = 0; a < vg.size(); ++a) s.f.cell(0)[a] = f[a];
  s.h.data = f_to_h(vg, f, Moments{}, s.mu);
  const double n0 = std::sqrt(det_dot(s.f.data, s.f.data));
  RemainderState next = step_imex(eng, s, set, fluid, 1e-3);
  Vec micro(vg.size());
  basis.complement(Vec(next.f.cell(0), next.f.cell(0) + vg.size()))
      .swap(micro);
  const double n1 = std::sqrt(det_dot(micro, micro));
  CHECK(n1 < n0);  // implicit linearized collision is dissipative
}

TEST_CASE("direct evolution holds the global Maxwellian fixed") {
  SpatialGrid xg(4, 1.0);
  VelocityGrid vg(12, 6.0);
  ConvEngine eng(vg);
  FullState s;
  s.F = KineticField(xg, vg);
  Vec mu = global_maxwellian(vg, {1.0});
  for (std::size_t c = 0; c < s.F.cells(); ++c)
    for (std::size_t a = 0; a < vg.size(); ++a) s.F.cell(c)[a] = mu[a];
  FullState next = step_full(eng, s, 0.1, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 0; i < next.F.data.size(); ++i)
    worst = std::max(worst, std::fabs(next.F.data[i] - s.F.data[i]));
  CHECK(worst < 1e-10 * max_abs(mu));
}

TEST_CASE("direct evolution conserves mass exactly and stays positive") {
  SpatialGrid xg(8, 1.0);
  VelocityGrid vg(12, 6.0);
  ConvEngine eng(vg);
  FullState s;
  s.F = KineticField(xg, vg);
  for (std::size_t c = 0; c < s.F.cells(); ++c) {
    Moments m{1.0 + 0.05 * std::sin(2.0 * M_PI * xg.x(int(c))),
              {0.05 * std::cos(2.0 * M_PI * xg.x(int(c))), 0.0, 0.0},
              1.0};
    local_maxwellian(vg, m, s.F.cell(c));
  }
  const double mass0 = integrate_xv(s.F);
  FullState cur = s;
  for (int k = 0; k < 5; ++k) cur = step_full(eng, cur, 0.1, 5e-4);
  CHECK(integrate_xv(cur.F) == doctest::Approx(mass0).epsilon(1e-10));
  double fmin = 0.0, fmax = 0.0;
  for (double v : cur.F.data) {
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
  }
  CHECK(fmin >= -1e-10 * fmax);
}

TEST_CASE("space-homogeneous relaxation decays toward the local Maxwellian") {
  SpatialGrid xg(1, 1.0);
  VelocityGrid vg(12, 6.0);
  ConvEngine eng(vg);
  FullState s;
  s.F = KineticField(xg, vg);
  Moments m;
  Vec M = local_maxwellian(vg, m);
  for (std::size_t a = 0; a < vg.size(); ++a) {
    auto v = vg.v(a);
    s.F.cell(0)[a] = M[a] * (1.0 + 0.05 * std::cos(1.3 * v[0] + 0.7 * v[2]));
  }
  auto dist = [&](const FullState& st) {
    Moments mm = moments_of(vg, st.F.cell(0));
    Vec Mloc = local_maxwellian(vg, mm);
    double d = 0.0;
    for (std::size_t a = 0; a < vg.size(); ++a)
      d += (st.F.cell(0)[a] - Mloc[a]) * (st.F.cell(0)[a] - Mloc[a]);
    return std::sqrt(d);
  };
  const double d0 = dist(s);
  FullState cur = s;
  for (int k = 0; k < 10; ++k) cur = step_full(eng, cur, 0.05, 2e-3);
  CHECK(dist(cur) < 0.7 * d0);
}

TEST_CASE("remainder constraint monitors vanish on the zero state") {
  SpatialGrid xg(4, 1.0);
  VelocityGrid vg(12, 6.0);
  RemainderState s = make_remainder_state(xg, vg, 0.1, true, 0.9);
  CHECK(remainder_gauss_residual(s) < 1e-14);
  CHECK(remainder_divB_residual(s) < 1e-14);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  SpatialGrid xg(4, 1.0);
  VelocityGrid vg(12, 6.0);
  RemainderState s = make_remainder_state(xg, vg, 0.05, true, 0.9);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : s.f.data) v = U(rng);
  s.h.data = Vec(s.f.data.size());
  for (std::size_t c = 0; c < s.f.cells(); ++c) {
    Vec fc(s.f.cell(c), s.f.cell(c) + vg.size());
    Vec hc = f_to_h(vg, fc, Moments{}, s.mu);
    for (std::size_t a = 0; a < vg.size(); ++a)
      s.h.cell(c)[a] = hc[a];
  }
  for (int i = 0; i < 3; ++i)
    for (double& v : s.ER[std::size_t(i)]) v = U(rng);
  s.time = 0.123;
  const std::string path = "/tmp/kinlim_test_checkpoint.bin";
  write_checkpoint(path, s);
  RemainderState r = read_checkpoint(path);
  CHECK(r.eps == s.eps);
  CHECK(r.time == s.time);
  CHECK(r.vml == s.vml);
  REQUIRE(r.f.data.size() == s.f.data.size());
  for (std::size_t i = 0; i < s.f.data.size(); ++i)
    CHECK(r.f.data[i] == s.f.data[i]);
  for (int i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < s.ER[std::size_t(i)].size(); ++c)
      CHECK(r.ER[std::size_t(i)][c] == s.ER[std::size_t(i)][c]);
  std::remove(path.c_str());
}
