#include <cmath>
#include <random>

#include "doctest.h"
#include "kinlim/diagnostics.hpp"

using namespace kinlim;

namespace {
Vec random_smooth(const VelocityGrid& g, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    f[a] = amp * U(rng) *
           std::exp(-0.3 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  return f;
}
}  // namespace

TEST_CASE("time weight Y is positive, decaying, with the exact t=0 value") {
  // Y(0) = 1 / (8 R Tc e); with R = 2/3, Tc = 1 this is 3/(16 e)
  CHECK(weight_Y(0.0, 1.0) ==
        doctest::Approx(3.0 / (16.0 * M_E)).epsilon(1e-14));
  double prev = weight_Y(0.0, 0.9);
  for (double t : {0.5, 1.0, 5.0, 50.0}) {
    const double y = weight_Y(t, 0.9);
    CHECK(y > 0.0);
    CHECK(y < prev);
    prev = y;
  }
}

TEST_CASE("velocity weights combine bracket power and Gaussian-in-time factor") {
  const double v2 = 2.7, Tc = 0.9;
  for (int i = 0; i <= 3; ++i) {
    const double lw = log_weight_w(v2, i, 0.0, 3, Tc);
    const double want = 0.5 * (3 - i) * std::log(1.0 + v2) +
                        (1.0 + v2) / (8.0 * kRGas * Tc);
    CHECK(lw == doctest::Approx(want).epsilon(1e-14));
  }
  VelocityGrid g(10, 5.0);
  Vec w = weight_w(g, 1, 2.0, 3, Tc);
  for (double x : w) CHECK(x >= 1.0);  // every factor is >= 1
  Vec f = random_smooth(g, 2);
  CHECK(weighted_norm_sq(g, w, f.data()) > 0.0);
}

TEST_CASE("dissipation norm equals the quadratic form of its Gram operator") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  const double Tc = 0.9;
  SigmaField sig = eng.sigma(global_maxwellian(g, {Tc}));
  Vec f = random_smooth(g, 31);
  Vec Bf(g.size());
  apply_dnorm_gram(g, sig, Tc, f.data(), Bf.data());
  const double quad = det_dot(f, Bf) * g.weight();
  const double norm2 = d_norm_sq(g, sig, Tc, f.data());
  CHECK(quad == doctest::Approx(norm2).epsilon(1e-12));
  // positivity and quadratic homogeneity
  CHECK(norm2 > 0.0);
  Vec f2(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) f2[a] = 3.0 * f[a];
  CHECK(d_norm_sq(g, sig, Tc, f2.data()) ==
        doctest::Approx(9.0 * norm2).epsilon(1e-12));
}

TEST_CASE("dissipation Gram operator is symmetric positive definite") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  const double Tc = 0.9;
  SigmaField sig = eng.sigma(global_maxwellian(g, {Tc}));
  Vec u = random_smooth(g, 4), w = random_smooth(g, 5);
  Vec Bu(g.size()), Bw(g.size());
  apply_dnorm_gram(g, sig, Tc, u.data(), Bu.data());
  apply_dnorm_gram(g, sig, Tc, w.data(), Bw.data());
  const double uBw = det_dot(u, Bw), wBu = det_dot(w, Bu);
  CHECK(uBw == doctest::Approx(wBu).epsilon(1e-11));
  CHECK(det_dot(u, Bu) > 0.0);
}

TEST_CASE("anisotropic lower-bound components are nonnegative and split the gradient") {
  VelocityGrid g(10, 5.0);
  Vec f = random_smooth(g, 6);
  DLowerParts p = d_lower_parts(g, f.data());
  CHECK(p.pv_grad >= 0.0);
  CHECK(p.qv_grad >= 0.0);
  CHECK(p.zero > 0.0);
  CHECK(p.total() == doctest::Approx(p.pv_grad + p.qv_grad + p.zero));
}

TEST_CASE("convergence metric vanishes exactly on local Maxwellian data") {
  SpatialGrid xg(8, 1.0);
  VelocityGrid vg(12, 6.0);
  KineticField F(xg, vg);
  std::vector<Moments> mom;
  for (int c = 0; c < xg.n; ++c) {
    Moments m{1.0 + 0.05 * std::sin(2.0 * M_PI * xg.x(c)),
              {0.02 * std::cos(2.0 * M_PI * xg.x(c)), 0.0, 0.0},
              1.0};
    mom.push_back(m);
    local_maxwellian(vg, m, F.cell(std::size_t(c)));
  }
  CHECK(convergence_metric(F, mom) < 1e-14);
  // a perturbation registers with the right scaling
  KineticField G = F;
  Vec sm = sqrt_local_maxwellian(vg, mom[0]);
  for (std::size_t a = 0; a < vg.size(); ++a)
    G.cell(0)[a] += 1e-3 * sm[a] * std::exp(-0.1 * a);
  const double d1 = convergence_metric(G, mom);
  CHECK(d1 > 0.0);
  KineticField H = F;
  for (std::size_t a = 0; a < vg.size(); ++a)
    H.cell(0)[a] += 2e-3 * sm[a] * std::exp(-0.1 * a);
  CHECK(convergence_metric(H, mom) == doctest::Approx(2.0 * d1).epsilon(1e-6));
}

TEST_CASE("energy functionals: both transcriptions agree on both branches") {
  SpatialGrid xg(4, 1.0);
  VelocityGrid vg(10, 5.0);
  ConvEngine eng(vg);
  const double Tc = 0.9;
  SigmaField sig = eng.sigma(global_maxwellian(vg, {Tc}));
  KineticField f(xg, vg), h(xg, vg);
  std::vector<Moments> mom;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int c = 0; c < xg.n; ++c) {
    Moments m{1.0 + 0.03 * U(rng), {0.05 * U(rng), 0.0, 0.0}, 1.0 + 0.03 * U(rng)};
    mom.push_back(m);
    for (std::size_t a = 0; a < vg.size(); ++a) {
      auto v = vg.v(a);
      const double e = std::exp(-0.3 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
      f.cell(std::size_t(c))[a] = 1e-3 * U(rng) * e;
    }
    Vec fc(f.cell(std::size_t(c)), f.cell(std::size_t(c)) + vg.size());
    Vec hc = f_to_h(vg, fc, m, {Tc});
    for (std::size_t a = 0; a < vg.size(); ++a) h.cell(std::size_t(c))[a] = hc[a];
  }
  std::array<Vec, 3> ER, BR;
  for (int i = 0; i < 3; ++i) {
    ER[std::size_t(i)].resize(xg.size());
    BR[std::size_t(i)].resize(xg.size());
    for (std::size_t c = 0; c < xg.size(); ++c) {
      ER[std::size_t(i)][c] = 0.01 * U(rng);
      BR[std::size_t(i)][c] = 0.01 * U(rng);
    }
  }
  EnergyInputs in;
  in.f = &f;
  in.h = &h;
  in.mom = &mom;
  in.sig_mu = &sig;
  in.Tc = Tc;
  in.eps = 0.1;
  in.k = 2;
  in.t = 0.5;
  in.ell = 3;
  in.ER = &ER;
  in.BR = &BR;
  EnergyRow a = energy_landau(in), b = energy_landau_alt(in);
  CHECK(a.E_total == doctest::Approx(b.E_total).epsilon(1e-12));
  CHECK(a.D_total == doctest::Approx(b.D_total).epsilon(1e-12));
  EnergyRow c = energy_vml(in), d = energy_vml_alt(in);
  CHECK(c.E_total == doctest::Approx(d.E_total).epsilon(1e-12));
  CHECK(c.D_total == doctest::Approx(d.D_total).epsilon(1e-12));
  CHECK(a.E_total > 0.0);
  CHECK(c.E_total > 0.0);
}

TEST_CASE("spectral analysis finds the 5 invariants and a positive gap") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  GapResult gr = spectral_gap(eng, {0.9}, 80, 12345u);
  REQUIRE(gr.eigs.size() >= 6);
  int near_null = 0;
  for (double e : gr.eigs)
    if (std::fabs(e) <= 1e-4 * gr.delta) ++near_null;
  CHECK(near_null == 5);
  CHECK(gr.delta > 0.0);
  CHECK(gr.principal_angle < 1e-4);
}
