#include <cmath>
#include <random>

#include "doctest.h"
#include "kinlim/maxwellian.hpp"
#include "kinlim/vderiv.hpp"

using namespace kinlim;

namespace {
Vec random_vec(const VelocityGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f(g.size());
  for (double& x : f) x = U(rng);
  return f;
}
double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

TEST_CASE("centered stencil: exact on quadratics, exact transpose") {
  VelocityGrid g(10, 5.0);
  for (int axis = 0; axis < 3; ++axis) {
    Vec f(g.size()), want(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
      const double x = g.v(a)[std::size_t(axis)];
      f[a] = 2.0 + 3.0 * x - 0.5 * x * x;
      want[a] = 3.0 - x;
    }
    Vec out(g.size());
    apply_d(g, axis, f.data(), out.data());
    for (std::size_t a = 0; a < g.size(); ++a)
      CHECK(out[a] == doctest::Approx(want[a]).epsilon(1e-12));

    Vec u = random_vec(g, 1 + unsigned(axis)), w = random_vec(g, 50 + unsigned(axis));
    Vec Du(g.size()), Dtw(g.size());
    apply_d(g, axis, u.data(), Du.data());
    apply_dt(g, axis, w.data(), Dtw.data());
    CHECK(dot(Du, w) == doctest::Approx(dot(u, Dtw)).epsilon(1e-12));
  }
}

TEST_CASE("conjugated stencil D: exact on cubics, exact transpose pair") {
  VelocityGrid g(12, 6.0);
  Moments m{1.1, {0.2, -0.1, 0.0}, 0.95};
  ConjDeriv cd(g, m);
  for (int axis = 0; axis < 3; ++axis) {
    Vec f(g.size()), want(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
      const double x = g.v(a)[std::size_t(axis)];
      f[a] = 1.0 - 2.0 * x + 0.3 * x * x + 0.1 * x * x * x;
      want[a] = -2.0 + 0.6 * x + 0.3 * x * x;
    }
    Vec out(g.size());
    cd.D(axis, f.data(), out.data());
    for (std::size_t a = 0; a < g.size(); ++a)
      CHECK(out[a] == doctest::Approx(want[a]).epsilon(1e-11));

    Vec u = random_vec(g, 7 + unsigned(axis)), w = random_vec(g, 90 + unsigned(axis));
    Vec Du(g.size()), Dtw(g.size());
    cd.D(axis, u.data(), Du.data());
    cd.DT(axis, w.data(), Dtw.data());
    CHECK(dot(Du, w) == doctest::Approx(dot(u, Dtw)).epsilon(1e-12));
  }
}

TEST_CASE("conjugation identity G(sqrt(M) p) = sqrt(M) D p holds exactly") {
  VelocityGrid g(12, 6.0);
  Moments m{1.0, {0.1, 0.0, -0.2}, 1.05};
  ConjDeriv cd(g, m);
  Vec sM = sqrt_local_maxwellian(g, m);
  Vec p = random_vec(g, 33);
  for (int axis = 0; axis < 3; ++axis) {
    Vec sp(g.size()), lhs(g.size()), Dp(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) sp[a] = sM[a] * p[a];
    cd.G(axis, sp.data(), lhs.data());
    cd.D(axis, p.data(), Dp.data());
    double worst = 0.0, scale = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      worst = std::max(worst, std::fabs(lhs[a] - sM[a] * Dp[a]));
      scale = std::max(scale, std::fabs(sM[a] * Dp[a]));
    }
    CHECK(worst <= 1e-13 * scale);
  }
}

TEST_CASE("G transpose and dhat shift are exact") {
  VelocityGrid g(10, 5.0);
  Moments m{1.0, {0.0, 0.15, 0.0}, 0.9};
  ConjDeriv cd(g, m);
  Vec u = random_vec(g, 4), w = random_vec(g, 44);
  for (int axis = 0; axis < 3; ++axis) {
    Vec Gu(g.size()), GTw(g.size());
    cd.G(axis, u.data(), Gu.data());
    cd.GT(axis, w.data(), GTw.data());
    CHECK(dot(Gu, w) == doctest::Approx(dot(u, GTw)).epsilon(1e-12));

    Vec dh(g.size());
    cd.dhat(axis, u.data(), dh.data());
    for (std::size_t a = 0; a < g.size(); ++a) {
      const int i = axis == 0 ? int(a / (std::size_t(g.n) * g.n))
                  : axis == 1 ? int((a / std::size_t(g.n)) % std::size_t(g.n))
                              : int(a % std::size_t(g.n));
      CHECK(dh[a] == doctest::Approx(Gu[a] - cd.qhat(axis, i) * u[a]).epsilon(1e-12));
    }
  }
}

TEST_CASE("leaning stencil keeps Maxwellian-weighted checkerboard modes visible") {
  // A centered difference annihilates the +1/-1 checkerboard in the interior;
  // after conjugation by sqrt(M) that produced spurious near-null modes of the
  // linearized operator.  The one-sided four-point stencil must act on such
  // modes with O(1/dv) strength.
  VelocityGrid g(12, 6.0);
  Moments m;
  ConjDeriv cd(g, m);
  Vec sM = sqrt_local_maxwellian(g, m);
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    const int i = int(a / (std::size_t(g.n) * g.n));
    f[a] = ((i % 2) ? -1.0 : 1.0) * sM[a];
  }
  Vec out(g.size());
  cd.G(0, f.data(), out.data());
  double n_out = 0.0, n_in = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    n_out += out[a] * out[a];
    n_in += f[a] * f[a];
  }
  CHECK(std::sqrt(n_out / n_in) > 0.5 / g.dv);
}

TEST_CASE("spectral derivative is accurate on decaying smooth fields") {
  VelocityGrid g(24, 6.0);
  Vec f(g.size()), want(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    const double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    f[a] = std::exp(-0.5 * r2);
    want[a] = -v[1] * f[a];
  }
  Vec out(g.size());
  apply_d_spectral(g, 1, f.data(), out.data());
  double worst = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a)
    worst = std::max(worst, std::fabs(out[a] - want[a]));
  CHECK(worst < 1e-6);
}

TEST_CASE("Lorentz term is exact on quadratics") {
  VelocityGrid g(10, 5.0);
  const std::array<double, 3> E{0.3, -0.2, 0.1}, B{0.0, 0.5, -0.4};
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    f[a] = v[0] * v[0] - 0.5 * v[1] + 2.0 * v[2];
  }
  Vec out = lorentz_apply(g, E, B, f.data());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    const std::array<double, 3> F{E[0] + v[1] * B[2] - v[2] * B[1],
                                  E[1] + v[2] * B[0] - v[0] * B[2],
                                  E[2] + v[0] * B[1] - v[1] * B[0]};
    const double want = F[0] * 2.0 * v[0] - 0.5 * F[1] + 2.0 * F[2];
    CHECK(out[a] == doctest::Approx(want).epsilon(1e-11));
  }
}
