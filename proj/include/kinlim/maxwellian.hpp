#pragma once

#include <array>

#include "kinlim/grid.hpp"

namespace kinlim {

struct Moments {
  double rho = 1.0;
  std::array<double, 3> u{0.0, 0.0, 0.0};
  double T = 1.0;
};

struct GlobalMaxwellianParams {
  double Tc = 1.0;
};

struct DegenerateDensity : NumericsError {
  using NumericsError::NumericsError;
};

// M_[rho,u,T](v) = rho (2 pi R T)^{-3/2} exp(-|v-u|^2 / (2RT))
void local_maxwellian(const VelocityGrid& g, const Moments& m, double* out);
Vec local_maxwellian(const VelocityGrid& g, const Moments& m);
Vec sqrt_local_maxwellian(const VelocityGrid& g, const Moments& m);

Vec global_maxwellian(const VelocityGrid& g, const GlobalMaxwellianParams& p);

// rho = int F, u = rho^{-1} int vF, T = (3 rho R)^{-1} int |v-u|^2 F.
// Throws DegenerateDensity when int F <= 1e-12.
Moments moments_of(const VelocityGrid& g, const double* F);
inline Moments moments_of(const VelocityGrid& g, const Vec& F) {
  return moments_of(g, F.data());
}

// Frame conversion sqrt(M) f = sqrt(mu) h, i.e. h = mu^{-1/2} M^{1/2} f.
// Requires Tc < T so the conversion factor decays.
Vec f_to_h(const VelocityGrid& g, const Vec& f, const Moments& m,
           const GlobalMaxwellianParams& p);
Vec h_to_f(const VelocityGrid& g, const Vec& h, const Moments& m,
           const GlobalMaxwellianParams& p);

}  // namespace kinlim
