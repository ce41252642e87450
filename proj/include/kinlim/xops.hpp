#pragma once

#include "kinlim/grid.hpp"

namespace kinlim {

// Spectral derivative along the (1D) spatial axis for fields stored
// cell-major with `block` contiguous values per cell.
void spatial_dx(const SpatialGrid& xg, std::size_t block, const double* F,
                double* out);
inline void spatial_dx(const SpatialGrid& xg, Vec& tmp, const Vec& F, Vec& out) {
  (void)tmp;
  out.resize(F.size());
  spatial_dx(xg, F.size() / xg.size(), F.data(), out.data());
}

// Scalar field version (block = 1)
void spatial_dx_scalar(const SpatialGrid& xg, const double* F, double* out);

// v_x d_x F for a whole kinetic field (spectral in x)
KineticField transport_term(const KineticField& F);

// Uniform-grid finite differences in time: fourth-order five-point weights
// for d/dt at sample position `pos` (0-based) of a stencil starting at
// `start`, spacing dt.  Helper for differencing stored snapshots.
std::array<double, 5> ddt5_weights(int offset, double dt);
// For a series of n samples, the stencil start index for sample i
int ddt5_start(int i, int n);

// Cubic Lagrange interpolation on a uniform grid t0 + j*dt, j = 0..n-1:
// returns the 4 weights and the start index for evaluating at time t.
void lagrange4(double t0, double dt, int n, double t, int& start,
               std::array<double, 4>& w);

}  // namespace kinlim
