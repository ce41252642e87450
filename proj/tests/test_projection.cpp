#include <cmath>
#include <random>

#include "doctest.h"
#include "kinlim/projection.hpp"

using namespace kinlim;

namespace {
Vec random_field(const VelocityGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    f[a] = U(rng) * std::exp(-0.2 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  return f;
}
double rel_l2(const Vec& a, const Vec& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += b[i] * b[i];
  }
  return n > 0 ? std::sqrt(d / n) : std::sqrt(d);
}
}  // namespace

TEST_CASE("projection is exactly idempotent and reproduces the basis") {
  VelocityGrid g(12, 6.0);
  Moments m{1.2, {0.1, -0.2, 0.0}, 0.95};
  MacroBasis basis(g, m);
  Vec f = random_field(g, 21);
  Vec pf = basis.project(f);
  Vec ppf = basis.project(pf);
  CHECK(rel_l2(ppf, pf) < 1e-13);
  for (int q = 0; q < 5; ++q) {
    Vec pc = basis.project(basis.chi(q));
    CHECK(rel_l2(pc, basis.chi(q)) < 1e-12);
  }
}

TEST_CASE("complement is quadrature-orthogonal to every invariant") {
  VelocityGrid g(12, 6.0);
  Moments m{1.0, {0.0, 0.1, -0.1}, 1.1};
  MacroBasis basis(g, m);
  Vec f = random_field(g, 5);
  Vec cf = basis.complement(f);
  for (int q = 0; q < 5; ++q) {
    const Vec& chi = basis.chi(q);
    double dot = 0.0, nc = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      dot += cf[a] * chi[a];
      nc += chi[a] * chi[a];
    }
    CHECK(std::fabs(dot) <= 1e-12 * nc);
  }
}

TEST_CASE("hydro fluctuation fields round trip through from_hydro") {
  VelocityGrid g(12, 6.0);
  Moments m{1.05, {0.0, 0.0, 0.05}, 1.0};
  MacroBasis basis(g, m);
  MacroBasis::Hydro h;
  h.rho = 0.3;
  h.u = {-0.1, 0.2, 0.05};
  h.T = -0.15;
  Vec f = basis.from_hydro(h);
  MacroBasis::Hydro r = basis.hydro(f.data());
  CHECK(r.rho == doctest::Approx(h.rho).epsilon(1e-10));
  for (int i = 0; i < 3; ++i)
    CHECK(r.u[std::size_t(i)] == doctest::Approx(h.u[std::size_t(i)]).epsilon(1e-10));
  CHECK(r.T == doctest::Approx(h.T).epsilon(1e-10));
  // macro fields are fixed points of the projection
  Vec pf = basis.project(f);
  CHECK(rel_l2(pf, f) < 1e-12);
}

TEST_CASE("pointwise radial projector is idempotent and tangential-free") {
  VelocityGrid g(10, 5.0);
  std::array<Vec, 3> h, p, pp;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    h[std::size_t(j)].resize(g.size());
    for (double& x : h[std::size_t(j)]) x = U(rng);
  }
  project_Pv(g, h, p);
  project_Pv(g, p, pp);
  for (int j = 0; j < 3; ++j)
    CHECK(rel_l2(pp[std::size_t(j)], p[std::size_t(j)]) < 1e-12);
  // P_v h is parallel to v: cross product vanishes
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    const double cx = p[1][a] * v[2] - p[2][a] * v[1];
    const double cy = p[2][a] * v[0] - p[0][a] * v[2];
    const double cz = p[0][a] * v[1] - p[1][a] * v[0];
    CHECK(std::fabs(cx) + std::fabs(cy) + std::fabs(cz) < 1e-12);
  }
}
