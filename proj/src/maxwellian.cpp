#include "kinlim/maxwellian.hpp"

#include <cmath>

namespace kinlim {

namespace {
void check_positive(const Moments& m) {
  if (!(m.rho > 0.0)) throw ConfigError("maxwellian: rho must be positive");
  if (!(m.T > 0.0)) throw ConfigError("maxwellian: T must be positive");
}

// exp(-|v-u|^2/(2RT)) is separable; evaluate per-axis factors once.
void gaussian_factors(const VelocityGrid& g, const std::array<double, 3>& u,
                      double RT, std::array<Vec, 3>& s, double half) {
  for (int ax = 0; ax < 3; ++ax) {
    s[std::size_t(ax)].resize(std::size_t(g.n));
    for (int i = 0; i < g.n; ++i) {
      double d = g.node(i) - u[std::size_t(ax)];
      s[std::size_t(ax)][std::size_t(i)] = std::exp(-half * d * d / (2.0 * RT));
    }
  }
}
}  // namespace

void local_maxwellian(const VelocityGrid& g, const Moments& m, double* out) {
  check_positive(m);
  const double RT = kRGas * m.T;
  const double norm = m.rho / std::pow(2.0 * M_PI * RT, 1.5);
  std::array<Vec, 3> s;
  gaussian_factors(g, m.u, RT, s, 1.0);
  std::size_t a = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double pij = norm * s[0][std::size_t(i)] * s[1][std::size_t(j)];
      for (int k = 0; k < g.n; ++k) out[a++] = pij * s[2][std::size_t(k)];
    }
}

Vec local_maxwellian(const VelocityGrid& g, const Moments& m) {
  Vec out(g.size());
  local_maxwellian(g, m, out.data());
  return out;
}

Vec sqrt_local_maxwellian(const VelocityGrid& g, const Moments& m) {
  check_positive(m);
  const double RT = kRGas * m.T;
  const double norm = std::sqrt(m.rho / std::pow(2.0 * M_PI * RT, 1.5));
  std::array<Vec, 3> s;
  gaussian_factors(g, m.u, RT, s, 0.5);
  Vec out(g.size());
  std::size_t a = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double pij = norm * s[0][std::size_t(i)] * s[1][std::size_t(j)];
      for (int k = 0; k < g.n; ++k) out[a++] = pij * s[2][std::size_t(k)];
    }
  return out;
}

Vec global_maxwellian(const VelocityGrid& g, const GlobalMaxwellianParams& p) {
  if (!(p.Tc > 0.0)) throw ConfigError("maxwellian: Tc must be positive");
  return local_maxwellian(g, Moments{1.0, {0, 0, 0}, p.Tc});
}

Moments moments_of(const VelocityGrid& g, const double* F) {
  const std::size_t nv = g.size();
  double s0 = det_sum(F, nv);
  double rho = s0 * g.weight();
  if (!(std::abs(rho) > 1e-12))
    throw DegenerateDensity("moments_of: density magnitude <= 1e-12");
  std::array<double, 3> m1{0, 0, 0};
  // sequential per-call accumulation: deterministic regardless of threads
  std::size_t a = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k, ++a) {
        m1[0] += g.node(i) * F[a];
        m1[1] += g.node(j) * F[a];
        m1[2] += g.node(k) * F[a];
      }
  Moments m;
  m.rho = rho;
  for (int d = 0; d < 3; ++d) m.u[std::size_t(d)] = m1[std::size_t(d)] / s0;
  double e = 0.0;
  a = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k, ++a) {
        double dx = g.node(i) - m.u[0], dy = g.node(j) - m.u[1],
               dz = g.node(k) - m.u[2];
        e += (dx * dx + dy * dy + dz * dz) * F[a];
      }
  m.T = e / (3.0 * s0 * kRGas);
  return m;
}

namespace {
// ratio (M/mu)^{1/2} sampled; requires Tc < T for decay
Vec frame_ratio(const VelocityGrid& g, const Moments& m,
                const GlobalMaxwellianParams& p) {
  if (!(p.Tc < m.T))
    throw ConfigError("frame conversion requires Tc < T everywhere");
  Vec M = sqrt_local_maxwellian(g, m);
  Vec mu = sqrt_local_maxwellian(g, Moments{1.0, {0, 0, 0}, p.Tc});
  for (std::size_t a = 0; a < M.size(); ++a) M[a] /= mu[a];
  return M;
}
}  // namespace

Vec f_to_h(const VelocityGrid& g, const Vec& f, const Moments& m,
           const GlobalMaxwellianParams& p) {
  Vec r = frame_ratio(g, m, p);
  for (std::size_t a = 0; a < r.size(); ++a) r[a] *= f[a];
  return r;
}

Vec h_to_f(const VelocityGrid& g, const Vec& h, const Moments& m,
           const GlobalMaxwellianParams& p) {
  Vec r = frame_ratio(g, m, p);
  for (std::size_t a = 0; a < r.size(); ++a) r[a] = h[a] / r[a];
  return r;
}

}  // namespace kinlim
