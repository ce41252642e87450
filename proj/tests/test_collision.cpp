#include <cmath>
#include <random>

#include "doctest.h"
#include "kinlim/collision.hpp"
#include "kinlim/projection.hpp"
#include "kinlim/reference.hpp"

using namespace kinlim;

namespace {
Vec perturbed_maxwellian(const VelocityGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Moments m{1.0 + 0.1 * U(rng), {0.2 * U(rng), 0.2 * U(rng), 0.2 * U(rng)},
            1.0 + 0.1 * U(rng)};
  Vec F = local_maxwellian(g, m);
  const double w0 = U(rng), w1 = U(rng);
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    F[a] *= 1.0 + 0.1 * U(rng) * std::cos(w0 * v[0] + w1 * v[2]);
  }
  return F;
}

std::array<double, 5> invariant_moments(const VelocityGrid& g, const Vec& C) {
  std::array<double, 5> m{};
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    m[0] += C[a];
    for (int i = 0; i < 3; ++i) m[std::size_t(1 + i)] += v[std::size_t(i)] * C[a];
    m[4] += (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * C[a];
  }
  for (double& x : m) x *= g.weight();
  return m;
}

double rel_l2(const Vec& a, const Vec& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += b[i] * b[i];
  }
  return n > 0 ? std::sqrt(d / n) : std::sqrt(d);
}

double linf_scale(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}
}  // namespace

TEST_CASE("bilinear operator conserves mass, momentum and energy") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  Vec F = perturbed_maxwellian(g, 17);
  Vec C = collide(eng, F, F);
  auto m = invariant_moments(g, C);
  double scale = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    scale += (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * std::fabs(C[a]);
  }
  scale *= g.weight();
  for (double x : m) CHECK(std::fabs(x) <= 1e-12 * scale);
}

TEST_CASE("production collision matches the direct-sum oracle") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  Vec F = perturbed_maxwellian(g, 8);
  Vec G = perturbed_maxwellian(g, 9);
  Vec c_fft = collide(eng, F, G);
  Vec c_ref = collide_direct(g, F, G);
  CHECK(rel_l2(c_fft, c_ref) < 1e-10);
}

TEST_CASE("linearized operator: three evaluation routes agree") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  Moments m{1.05, {0.1, -0.05, 0.02}, 1.1};
  FrameOps ops(eng, m);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    f[a] = U(rng) * std::exp(-0.25 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  Vec l1 = ops.apply_L(f);
  Vec l2 = ops.apply_L_direct(f);
  Vec l3 = ops.apply_L_explicit(f);
  CHECK(rel_l2(l2, l1) < 1e-10);
  CHECK(rel_l2(l3, l1) < 1e-10);
}

TEST_CASE("linearized operator is symmetric and positive semidefinite") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  Moments m{1.0, {0.0, 0.1, 0.0}, 0.95};
  FrameOps ops(eng, m);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int r = 0; r < 10; ++r) {
    Vec u(g.size()), w(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
      u[a] = U(rng);
      w[a] = U(rng);
    }
    Vec Lu = ops.apply_L(u), Lw = ops.apply_L(w);
    double uLw = 0.0, wLu = 0.0, uLu = 0.0, mag = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      uLw += u[a] * Lw[a];
      wLu += w[a] * Lu[a];
      uLu += u[a] * Lu[a];
      mag += std::fabs(u[a] * Lw[a]);
    }
    CHECK(std::fabs(uLw - wLu) <= 1e-12 * std::max(mag, 1e-300));
    CHECK(uLu >= -1e-12 * std::max(mag, 1e-300));
  }
}

TEST_CASE("collision invariants span the exact null space of L") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  Moments m{1.0, {0.05, 0.0, -0.02}, 0.95};
  FrameOps ops(eng, m);
  MacroBasis basis(g, m);
  Vec probe(g.size(), 1.0);
  const double scale = linf_scale(ops.apply_L(probe));
  for (int q = 0; q < 5; ++q) {
    Vec lc = ops.apply_L(basis.chi(q));
    CHECK(linf_scale(lc) <= 1e-12 * scale);
  }
}

TEST_CASE("bilinear Gamma routes agree and vanish on the equilibrium pair") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  Moments m{1.1, {0.0, 0.0, 0.1}, 1.0};
  FrameOps ops(eng, m);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f1(g.size()), f2(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    const double e = std::exp(-0.25 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    f1[a] = U(rng) * e;
    f2[a] = U(rng) * e;
  }
  CHECK(rel_l2(ops.gamma(f1, f2), ops.gamma_direct(f1, f2)) < 1e-8);
  // the symmetrized Gamma keeps the collision invariants: its sqrt(M)-weighted
  // moments vanish because C conserves them for symmetric pairs
  Vec gs(g.size());
  Vec g12 = ops.gamma(f1, f2), g21 = ops.gamma(f2, f1);
  for (std::size_t a = 0; a < g.size(); ++a)
    gs[a] = ops.sqrtM()[a] * (g12[a] + g21[a]);
  auto m5 = invariant_moments(g, gs);
  double scale = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    scale += (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * std::fabs(gs[a]);
  }
  scale *= g.weight();
  for (double x : m5) CHECK(std::fabs(x) <= 1e-11 * scale);
}

TEST_CASE("approximate diagonal of L is strictly positive") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  FrameOps ops(eng, Moments{});
  Vec d = ops.diag_L();
  for (double x : d) CHECK(x > 0.0);
}

TEST_CASE("frame-difference operator: all three routes agree") {
  VelocityGrid g(10, 5.0);
  ConvEngine eng(g);
  GlobalMaxwellianParams p{0.9};
  Moments mmu;
  mmu.T = p.Tc;
  FrameOps mu_ops(eng, mmu);
  Moments m{1.08, {0.05, -0.02, 0.0}, 1.02};
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec h(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    h[a] = U(rng) * std::exp(-0.25 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  Vec r0 = difference_Ld(mu_ops, m, h, 0);
  Vec r1 = difference_Ld(mu_ops, m, h, 1);
  Vec r2 = difference_Ld(mu_ops, m, h, 2);
  CHECK(rel_l2(r1, r0) < 1e-8);
  CHECK(rel_l2(r2, r0) < 1e-8);
}

TEST_CASE("negative control: corrupted kernel breaks conservation") {
  VelocityGrid g(10, 5.0);
  ConvEngine bad(g);
  bad.corrupt_kernel_sign();
  Vec F = perturbed_maxwellian(g, 70);
  Vec C = collide(bad, F, F);
  auto m = invariant_moments(g, C);
  double scale = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    scale += (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * std::fabs(C[a]);
  }
  scale *= g.weight();
  double worst = 0.0;
  for (double x : m) worst = std::max(worst, std::fabs(x));
  CHECK(worst > 1e-8 * scale);
}
