#pragma once

#include "kinlim/maxwellian.hpp"

namespace kinlim {

// Macroscopic projection onto the five sampled collision invariants
//   chi_0 = M^{1/2}/rho^{1/2}
//   chi_i = (v_i - u_i) M^{1/2} / (R rho T)^{1/2},  i = 1..3
//   chi_4 = (6 rho)^{-1/2} (|v-u|^2/(RT) - 3) M^{1/2}.
// The basis is sampled with its continuum normalization and the projection
// solves the 5x5 Gram system, so P is exactly idempotent on the grid and its
// range coincides with the exact null space of the linearized operator.
class MacroBasis {
 public:
  MacroBasis(const VelocityGrid& g, const Moments& m);

  const VelocityGrid& grid() const { return *g_; }
  const Moments& moments() const { return m_; }
  const Vec& chi(int a) const { return chi_[std::size_t(a)]; }

  // coefficients in the sampled-chi basis (Gram-solved)
  std::array<double, 5> coeffs(const double* f) const;
  void project(const double* f, double* out) const;
  Vec project(const Vec& f) const;
  Vec complement(const Vec& f) const;  // (I - P) f

  struct Hydro {
    double rho = 0.0;
    std::array<double, 3> u{0.0, 0.0, 0.0};
    double T = 0.0;
  };
  // fluctuation fields (rho_n, u_n, T_n) of the macro part of f
  Hydro hydro(const double* f) const;
  // inverse map: macro field from fluctuation fields
  Vec from_hydro(const Hydro& h) const;

 private:
  const VelocityGrid* g_;
  Moments m_;
  std::array<Vec, 5> chi_;
  std::array<double, 25> chol_;  // Cholesky factor of the Gram matrix

  std::array<double, 5> solve(const std::array<double, 5>& b) const;
};

// Pointwise radial projection (P_v h)_j = (h . v) v_j / |v|^2.
void project_Pv(const VelocityGrid& g, const std::array<Vec, 3>& h,
                std::array<Vec, 3>& out);

}  // namespace kinlim
