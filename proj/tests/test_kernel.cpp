#include <cmath>
#include <random>

#include "doctest.h"
#include "kinlim/kernel.hpp"
#include "kinlim/maxwellian.hpp"
#include "kinlim/reference.hpp"

using namespace kinlim;

TEST_CASE("kernel tensor is a scaled projector orthogonal to v") {
  std::array<double, 3> v{0.7, -1.2, 0.4};
  auto phi = phi_kernel(v);
  const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  const double s = std::pow(v2, -0.5);  // |v|^{gamma+2}, gamma=-3
  // phi v = 0
  for (int i = 0; i < 3; ++i) {
    double dot = 0.0;
    for (int j = 0; j < 3; ++j) dot += phi[std::size_t(sym_index(i, j))] * v[std::size_t(j)];
    CHECK(std::fabs(dot) < 1e-15);
  }
  // trace = 2 |v|^{gamma+2}
  CHECK(phi[0] + phi[1] + phi[2] == doctest::Approx(2.0 * s).epsilon(1e-14));
  // idempotent up to the scale: phi^2 = s * phi
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k)
        acc += phi[std::size_t(sym_index(i, k))] * phi[std::size_t(sym_index(k, j))];
      CHECK(acc == doctest::Approx(s * phi[std::size_t(sym_index(i, j))]).epsilon(1e-13));
    }
}

TEST_CASE("kernel evaluation at v = 0 is rejected") {
  CHECK_THROWS_AS(phi_kernel({0.0, 0.0, 0.0}), NumericsError);
}

namespace {
double rel_linf(const Vec& a, const Vec& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::fabs(a[i] - b[i]));
    s = std::max(s, std::fabs(b[i]));
  }
  return s > 0 ? d / s : d;
}
}  // namespace

TEST_CASE("FFT convolution matches the direct-sum oracle") {
  VelocityGrid g(12, 6.0);
  ConvEngine eng(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  Vec f = global_maxwellian(g, {1.0});
  for (std::size_t a = 0; a < g.size(); ++a) f[a] *= 1.0 + 0.2 * U(rng);

  SigmaField fft = eng.sigma(f);
  SigmaField ref = sigma_direct(g, f.data());
  for (int q = 0; q < 6; ++q)
    CHECK(rel_linf(fft.c[std::size_t(q)], ref.c[std::size_t(q)]) < 1e-11);

  std::array<Vec, 3> in, out_fft, out_ref;
  for (int j = 0; j < 3; ++j) {
    in[std::size_t(j)].resize(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) in[std::size_t(j)][a] = f[a] * U(rng);
  }
  std::array<const double*, 3> inp{in[0].data(), in[1].data(), in[2].data()};
  eng.contract(inp, out_fft);
  contract_direct(g, inp, out_ref);
  for (int j = 0; j < 3; ++j)
    CHECK(rel_linf(out_fft[std::size_t(j)], out_ref[std::size_t(j)]) < 1e-11);
}

TEST_CASE("negative control: corrupted kernel visibly changes the convolution") {
  VelocityGrid g(8, 5.0);
  ConvEngine good(g), bad(g);
  bad.corrupt_kernel_sign();
  Vec f = global_maxwellian(g, {1.0});
  SigmaField sg = good.sigma(f), sb = bad.sigma(f);
  CHECK(rel_linf(sb.c[3], sg.c[3]) > 0.1);  // the 01 component flipped
  CHECK(rel_linf(sb.c[0], sg.c[0]) < 1e-13);  // diagonal untouched
}
