#pragma once

#include <array>
#include <cstddef>

#include "kinlim/common.hpp"

namespace kinlim {

// Truncated velocity cube [-v_max, v_max]^3, cell-centered so no node sits at
// v = 0 (the kernel singularity) and nodes come in exact +/- pairs.
struct VelocityGrid {
  int n = 0;          // points per axis
  double vmax = 0.0;  // half-width
  double dv = 0.0;    // spacing = 2 vmax / n
  Vec nodes;          // per-axis coordinates, size n

  VelocityGrid() = default;
  VelocityGrid(int n_v, double v_max);

  std::size_t size() const { return std::size_t(n) * n * n; }
  double node(int i) const { return nodes[std::size_t(i)]; }
  // index layout: a = (i*n + j)*n + k, k contiguous
  std::size_t idx(int i, int j, int k) const {
    return (std::size_t(i) * n + j) * n + k;
  }
  std::array<double, 3> v(std::size_t a) const {
    int k = int(a % n), j = int((a / n) % n), i = int(a / (std::size_t(n) * n));
    return {nodes[i], nodes[std::size_t(j)], nodes[std::size_t(k)]};
  }
  double weight() const { return dv * dv * dv; }
};

// Periodic uniform torus in x; solvers in this artifact use dim_x = 1, the
// type carries up to 3 dimensions for completeness.
struct SpatialGrid {
  int n = 1;
  double length = 1.0;
  int dim = 1;

  SpatialGrid() = default;
  SpatialGrid(int n_x, double len, int dim_x = 1);

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= std::size_t(n);
    return s;
  }
  double dx() const { return length / n; }
  int wrap(int i) const { return ((i % n) + n) % n; }
  double x(int i) const { return (double(i) / n) * length; }
};

// Phase-space sample F(x, v): per-cell contiguous velocity blocks.
struct KineticField {
  SpatialGrid xg;
  VelocityGrid vg;
  Vec data;

  KineticField() = default;
  KineticField(const SpatialGrid& x, const VelocityGrid& v)
      : xg(x), vg(v), data(x.size() * v.size(), 0.0) {}

  double* cell(std::size_t c) { return data.data() + c * vg.size(); }
  const double* cell(std::size_t c) const { return data.data() + c * vg.size(); }
  std::size_t cells() const { return xg.size(); }
};

double integrate_v(const VelocityGrid& g, const double* f);
inline double integrate_v(const VelocityGrid& g, const Vec& f) {
  return integrate_v(g, f.data());
}
double integrate_xv(const KineticField& F);

}  // namespace kinlim
