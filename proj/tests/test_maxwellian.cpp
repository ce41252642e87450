#include <cmath>

#include "doctest.h"
#include "kinlim/maxwellian.hpp"

using namespace kinlim;

TEST_CASE("moments of a sampled Maxwellian recover the parameters") {
  VelocityGrid g(16, 6.0);
  Moments m{1.3, {0.2, -0.1, 0.05}, 0.9};
  Vec M = local_maxwellian(g, m);
  Moments r = moments_of(g, M);
  // trapezoid/midpoint quadrature of a Gaussian converges exponentially;
  // the residual here is truncation at |v| = 6
  CHECK(r.rho == doctest::Approx(m.rho).epsilon(1e-8));
  for (int i = 0; i < 3; ++i)
    CHECK(r.u[std::size_t(i)] == doctest::Approx(m.u[std::size_t(i)]).epsilon(1e-6));
  CHECK(r.T == doctest::Approx(m.T).epsilon(1e-6));
}

TEST_CASE("sqrt_local_maxwellian squares to the density") {
  VelocityGrid g(8, 5.0);
  Moments m{0.8, {0.0, 0.3, 0.0}, 1.1};
  Vec M = local_maxwellian(g, m);
  Vec S = sqrt_local_maxwellian(g, m);
  for (std::size_t a = 0; a < g.size(); ++a)
    CHECK(S[a] * S[a] == doctest::Approx(M[a]).epsilon(1e-13));
}

TEST_CASE("global maxwellian equals the local one at rest") {
  VelocityGrid g(8, 5.0);
  GlobalMaxwellianParams p{0.9};
  Vec mu = global_maxwellian(g, p);
  Vec M = local_maxwellian(g, Moments{1.0, {0.0, 0.0, 0.0}, 0.9});
  for (std::size_t a = 0; a < g.size(); ++a)
    CHECK(mu[a] == doctest::Approx(M[a]).epsilon(1e-14));
}

TEST_CASE("frame conversion f_to_h / h_to_f round trips") {
  VelocityGrid g(10, 6.0);
  Moments m{1.1, {0.1, 0.0, -0.05}, 1.05};
  GlobalMaxwellianParams p{0.9};  // Tc < T so the factor decays
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    f[a] = std::exp(-0.3 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  Vec h = f_to_h(g, f, m, p);
  Vec back = h_to_f(g, h, m, p);
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    num += (back[a] - f[a]) * (back[a] - f[a]);
    den += f[a] * f[a];
  }
  CHECK(std::sqrt(num / den) < 1e-12);
  // and the physical field agrees: sqrt(M) f = sqrt(mu) h
  Vec sM = sqrt_local_maxwellian(g, m);
  Vec mu = global_maxwellian(g, p);
  for (std::size_t a = 0; a < g.size(); ++a)
    CHECK(sM[a] * f[a] == doctest::Approx(std::sqrt(mu[a]) * h[a]).epsilon(1e-10));
}

TEST_CASE("vanishing density is rejected") {
  VelocityGrid g(8, 4.0);
  Vec zero(g.size(), 0.0);
  CHECK_THROWS_AS(moments_of(g, zero), DegenerateDensity);
}
