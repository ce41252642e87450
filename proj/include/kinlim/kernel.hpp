#pragma once

#include <array>
#include <memory>

#include "kinlim/grid.hpp"

namespace kinlim {

// Symmetric 3x3 component order used everywhere: 00, 11, 22, 01, 02, 12.
inline constexpr std::array<std::array<int, 2>, 6> kSymIdx{
    {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}}};
inline int sym_index(int i, int j) {
  static constexpr int tbl[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
  return tbl[i][j];
}

// phi^{ij}(v) = (delta_ij - v_i v_j/|v|^2) |v|^{gamma+2}, gamma = -3 (Coulomb).
// Throws on v = 0 (cell-centered grids never evaluate there).
std::array<double, 6> phi_kernel(const std::array<double, 3>& v,
                                 double gamma = -3.0);

struct SigmaField {
  std::array<Vec, 6> c;  // component order kSymIdx
};

// Zero-padded FFT convolution with the kernel tensor tabulated on the
// difference cube [-2 vmax, 2 vmax]; the self-difference term is dropped.
class ConvEngine {
 public:
  explicit ConvEngine(const VelocityGrid& g, double gamma = -3.0);
  ~ConvEngine();
  ConvEngine(const ConvEngine&) = delete;
  ConvEngine& operator=(const ConvEngine&) = delete;

  const VelocityGrid& grid() const { return g_; }

  // sigma^{ij}_g = phi^{ij} * g, all six components
  void sigma(const double* g, SigmaField& out) const;
  SigmaField sigma(const Vec& g) const;

  // out_i = sum_j phi^{ij} * in_j
  void contract(const std::array<const double*, 3>& in,
                std::array<Vec, 3>& out) const;

  // Test hook (negative control): flip the sign of the 01 kernel component.
  void corrupt_kernel_sign();

 private:
  struct Impl;
  VelocityGrid g_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kinlim
