#pragma once

#include "kinlim/kernel.hpp"

namespace kinlim {

// Direct O(N^2) quadrature oracles for the FFT convolution engine.  Serial by
// construction; used by the test suite and the convolution benchmark.

// sigma^{ij}_g(v_a) = sum_b w phi^{ij}(v_a - v_b) g(v_b), self term skipped
SigmaField sigma_direct(const VelocityGrid& g, const double* f,
                        double gamma = -3.0);

// out_i(v_a) = sum_b w sum_j phi^{ij}(v_a - v_b) in_j(v_b)
void contract_direct(const VelocityGrid& g,
                     const std::array<const double*, 3>& in,
                     std::array<Vec, 3>& out, double gamma = -3.0);

// Bilinear collision operator assembled from the direct-sum convolutions
// (same derivative stencils as the production path, so any disagreement with
// collide() isolates the convolution).
Vec collide_direct(const VelocityGrid& g, const Vec& G, const Vec& H,
                   double gamma = -3.0);

}  // namespace kinlim
