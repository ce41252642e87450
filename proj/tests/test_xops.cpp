#include <cmath>

#include "doctest.h"
#include "kinlim/xops.hpp"

using namespace kinlim;

TEST_CASE("spectral x-derivative is exact on resolved Fourier modes") {
  SpatialGrid xg(16, 2.0);
  Vec f(xg.size()), want(xg.size()), out(xg.size());
  const double k = 2.0 * M_PI / xg.length;
  for (int c = 0; c < xg.n; ++c) {
    const double x = xg.x(c);
    f[std::size_t(c)] = std::sin(3.0 * k * x) + 0.5 * std::cos(5.0 * k * x);
    want[std::size_t(c)] =
        3.0 * k * std::cos(3.0 * k * x) - 2.5 * k * std::sin(5.0 * k * x);
  }
  spatial_dx_scalar(xg, f.data(), out.data());
  for (std::size_t c = 0; c < xg.size(); ++c)
    CHECK(out[c] == doctest::Approx(want[c]).epsilon(1e-11));
}

TEST_CASE("blocked x-derivative differentiates each velocity slot independently") {
  SpatialGrid xg(8, 1.0);
  const std::size_t block = 3;
  Vec F(xg.size() * block), out(xg.size() * block);
  const double k = 2.0 * M_PI;
  for (int c = 0; c < xg.n; ++c)
    for (std::size_t a = 0; a < block; ++a)
      F[std::size_t(c) * block + a] = double(a + 1) * std::sin(k * xg.x(c));
  spatial_dx(xg, block, F.data(), out.data());
  for (int c = 0; c < xg.n; ++c)
    for (std::size_t a = 0; a < block; ++a)
      CHECK(out[std::size_t(c) * block + a] ==
            doctest::Approx(double(a + 1) * k * std::cos(k * xg.x(c)))
                .epsilon(1e-11));
}

TEST_CASE("single-cell grid has zero derivative") {
  SpatialGrid xg(1, 1.0);
  Vec f{3.5}, out{1.0};
  spatial_dx_scalar(xg, f.data(), out.data());
  CHECK(out[0] == 0.0);
}

TEST_CASE("five-point time weights are exact on quartics") {
  const double dt = 0.01;
  for (int offset = 0; offset < 5; ++offset) {
    auto w = ddt5_weights(offset, dt);
    // p(t) = t^4 sampled at t_j = j dt; p'(offset*dt) = 4 (offset*dt)^3
    double acc = 0.0;
    for (int j = 0; j < 5; ++j) acc += w[std::size_t(j)] * std::pow(j * dt, 4);
    CHECK(acc == doctest::Approx(4.0 * std::pow(offset * dt, 3)).epsilon(1e-9));
  }
  CHECK(ddt5_start(0, 10) == 0);
  CHECK(ddt5_start(5, 10) == 3);
  CHECK(ddt5_start(9, 10) == 5);
  CHECK_THROWS_AS(ddt5_start(0, 4), ConfigError);
}

TEST_CASE("four-point time interpolation is exact on cubics") {
  const double t0 = 1.0, dt = 0.25;
  const int n = 9;
  auto p = [](double t) { return 2.0 - t + 0.5 * t * t - 0.1 * t * t * t; };
  for (double t : {1.0, 1.3, 1.9, 2.6, 3.0}) {
    int start = 0;
    std::array<double, 4> w{};
    lagrange4(t0, dt, n, t, start, w);
    CHECK(start >= 0);
    CHECK(start <= n - 4);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) acc += w[std::size_t(a)] * p(t0 + (start + a) * dt);
    CHECK(acc == doctest::Approx(p(t)).epsilon(1e-12));
  }
}

TEST_CASE("transport term multiplies the x-derivative by v_x") {
  SpatialGrid xg(8, 1.0);
  VelocityGrid vg(8, 4.0);
  KineticField F(xg, vg);
  const double k = 2.0 * M_PI;
  for (std::size_t c = 0; c < F.cells(); ++c)
    for (std::size_t a = 0; a < vg.size(); ++a)
      F.cell(c)[a] = std::sin(k * xg.x(int(c)));
  KineticField T = transport_term(F);
  for (std::size_t c = 0; c < F.cells(); ++c)
    for (std::size_t a = 0; a < vg.size(); ++a)
      CHECK(T.cell(c)[a] ==
            doctest::Approx(vg.v(a)[0] * k * std::cos(k * xg.x(int(c))))
                .epsilon(1e-10));
}
