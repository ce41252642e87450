#include "kinlim/grid.hpp"

#include <omp.h>

namespace kinlim {

namespace {
constexpr std::size_t kBlock = 64;

double pairwise(const double* x, std::size_t n) {
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = (n / 2 / kBlock) * kBlock;  // block-aligned split
  if (h == 0) h = kBlock;  // kBlock < n < 2*kBlock: split off one full block
  return pairwise(x, h) + pairwise(x + h, n - h);
}

double pairwise_dot(const double* a, const double* b, std::size_t n) {
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  std::size_t h = (n / 2 / kBlock) * kBlock;
  if (h == 0) h = kBlock;
  return pairwise_dot(a, b, h) + pairwise_dot(a + h, b + h, n - h);
}
}  // namespace

double det_sum(const double* x, std::size_t n) { return pairwise(x, n); }
double det_dot(const double* a, const double* b, std::size_t n) {
  return pairwise_dot(a, b, n);
}

void parallel_for_cells(std::size_t n, const std::function<void(std::size_t)>& fn,
                        bool serial) {
  if (serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < (long long)n; ++i) fn(std::size_t(i));
}

VelocityGrid::VelocityGrid(int n_v, double v_max) : n(n_v), vmax(v_max) {
  if (n_v < 8) throw ConfigError("VelocityGrid: n_v must be >= 8");
  if (v_max <= 0) throw ConfigError("VelocityGrid: v_max must be positive");
  dv = 2.0 * vmax / n;
  nodes.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) nodes[std::size_t(i)] = -vmax + (i + 0.5) * dv;
}

SpatialGrid::SpatialGrid(int n_x, double len, int dim_x)
    : n(n_x), length(len), dim(dim_x) {
  if (n_x < 1) throw ConfigError("SpatialGrid: n_x must be >= 1");
  if (len <= 0) throw ConfigError("SpatialGrid: length must be positive");
  if (dim_x < 1 || dim_x > 3) throw ConfigError("SpatialGrid: dim_x must be 1..3");
}

double integrate_v(const VelocityGrid& g, const double* f) {
  return det_sum(f, g.size()) * g.weight();
}

double integrate_xv(const KineticField& F) {
  const double wx = [&] {
    double w = 1.0;
    for (int d = 0; d < F.xg.dim; ++d) w *= F.xg.dx();
    return w;
  }();
  return det_sum(F.data.data(), F.data.size()) * F.vg.weight() * wx;
}

}  // namespace kinlim
