#include "kinlim/reference.hpp"

#include <cmath>

#include "kinlim/vderiv.hpp"

namespace kinlim {

SigmaField sigma_direct(const VelocityGrid& g, const double* f, double gamma) {
  const std::size_t N = g.size();
  const double w = g.weight();
  SigmaField out;
  for (auto& c : out.c) c.assign(N, 0.0);
  for (std::size_t a = 0; a < N; ++a) {
    auto va = g.v(a);
    std::array<double, 6> acc{};
    for (std::size_t b = 0; b < N; ++b) {
      if (b == a) continue;  // self-difference term dropped, as in the engine
      auto vb = g.v(b);
      std::array<double, 3> d{va[0] - vb[0], va[1] - vb[1], va[2] - vb[2]};
      auto phi = phi_kernel(d, gamma);
      for (int q = 0; q < 6; ++q) acc[std::size_t(q)] += phi[std::size_t(q)] * f[b];
    }
    for (int q = 0; q < 6; ++q) out.c[std::size_t(q)][a] = w * acc[std::size_t(q)];
  }
  return out;
}

void contract_direct(const VelocityGrid& g,
                     const std::array<const double*, 3>& in,
                     std::array<Vec, 3>& out, double gamma) {
  const std::size_t N = g.size();
  const double w = g.weight();
  for (auto& c : out) c.assign(N, 0.0);
  for (std::size_t a = 0; a < N; ++a) {
    auto va = g.v(a);
    std::array<double, 3> acc{};
    for (std::size_t b = 0; b < N; ++b) {
      if (b == a) continue;
      auto vb = g.v(b);
      std::array<double, 3> d{va[0] - vb[0], va[1] - vb[1], va[2] - vb[2]};
      auto phi = phi_kernel(d, gamma);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          acc[std::size_t(i)] +=
              phi[std::size_t(sym_index(i, j))] * in[std::size_t(j)][b];
    }
    for (int i = 0; i < 3; ++i) out[std::size_t(i)][a] = w * acc[std::size_t(i)];
  }
}

Vec collide_direct(const VelocityGrid& g, const Vec& G, const Vec& H,
                   double gamma) {
  const std::size_t N = g.size();
  std::array<Vec, 3> dH, dG;
  for (int j = 0; j < 3; ++j) {
    dH[std::size_t(j)].resize(N);
    dG[std::size_t(j)].resize(N);
    apply_d_spectral(g, j, H.data(), dH[std::size_t(j)].data());
    apply_d_spectral(g, j, G.data(), dG[std::size_t(j)].data());
  }
  SigmaField sigG = sigma_direct(g, G.data(), gamma);
  std::array<Vec, 3> eta;
  contract_direct(g, {dG[0].data(), dG[1].data(), dG[2].data()}, eta, gamma);

  std::array<Vec, 3> flux;
  for (int i = 0; i < 3; ++i) {
    flux[std::size_t(i)].assign(N, 0.0);
    for (int j = 0; j < 3; ++j) {
      const Vec& s = sigG.c[std::size_t(sym_index(i, j))];
      for (std::size_t a = 0; a < N; ++a)
        flux[std::size_t(i)][a] += s[a] * dH[std::size_t(j)][a];
    }
    for (std::size_t a = 0; a < N; ++a)
      flux[std::size_t(i)][a] -= H[a] * eta[std::size_t(i)][a];
  }
  Vec out(N, 0.0), tmp(N);
  for (int i = 0; i < 3; ++i) {
    apply_dt(g, i, flux[std::size_t(i)].data(), tmp.data());
    for (std::size_t a = 0; a < N; ++a) out[a] -= tmp[a];
  }
  return out;
}

}  // namespace kinlim
