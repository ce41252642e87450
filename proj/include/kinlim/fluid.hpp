#pragma once

#include <functional>

#include "kinlim/maxwellian.hpp"

namespace kinlim {

// Compressible Euler / Euler-Maxwell background on the 1D torus (velocity and
// field vectors keep all three components).  Primitive storage; time
// integration works on the conservative variables.
struct FluidState {
  SpatialGrid xg;
  Vec rho, T;
  std::array<Vec, 3> u;
  bool maxwell = false;  // Euler-Maxwell branch: T = rho^{2/3}, E/B active
  std::array<Vec, 3> E, B;
  double time = 0.0;

  FluidState() = default;
  explicit FluidState(const SpatialGrid& g, bool with_fields = false);

  Moments moments(std::size_t c) const {
    return Moments{rho[c], {u[0][c], u[1][c], u[2][c]}, T[c]};
  }
  std::vector<Moments> moments() const;
};

// Conservative-variable tendencies: d/dt of (rho, rho u, rho(T + |u|^2/2))
// plus the Maxwell fields.  The energy slot is unused on the Euler-Maxwell
// branch (T is slaved to rho there).
struct FluidTend {
  Vec d_rho;
  std::array<Vec, 3> d_m;
  Vec d_etot;
  std::array<Vec, 3> d_E, d_B;
};

enum class SpaceScheme { spectral, fv };

// External volumetric source (manufactured-solution forcing): adds to the
// conservative tendencies at time t.
using FluidForcing = std::function<void(const FluidState&, FluidTend&)>;

double sound_speed(double T);  // sqrt(5 R T / 3)

// Euler tendencies with p = rho R T; throws DegenerateDensity on vacuum.
FluidTend euler_rhs(const FluidState& s, SpaceScheme scheme);
// Euler-Maxwell tendencies: pressure (2/3) grad rho^{5/3}, Lorentz source
// -rho(E + u x B), Ampere dE/dt = curl B + 4 pi rho u, Faraday
// dB/dt = -curl E.  Spectral derivatives (shared with the Gauss monitor).
FluidTend euler_maxwell_rhs(const FluidState& s);

// curl of a 1D-x vector field: (0, -d_x V_z, d_x V_y), spectral.
void curl_x(const SpatialGrid& xg, const std::array<Vec, 3>& V,
            std::array<Vec, 3>& out);

// Constraint residuals (max norm over cells)
double gauss_residual(const FluidState& s);  // div E - 4 pi (1 - rho)
double divB_residual(const FluidState& s);

// Primitive-variable time derivatives (d rho, d u, d T) implied by the
// discrete tendencies; used by the kinetic forcing terms so that discrete
// time derivatives of log M^{1/2} match the fluid integrator.
struct PrimTend {
  Vec d_rho, d_T;
  std::array<Vec, 3> d_u;
};
PrimTend primitive_tendency(const FluidState& s, SpaceScheme scheme);

// SSP-RK3 trajectory; snapshots every `snap_every` steps (always includes the
// initial state).  Aborts on CFL violation or when the steepening monitor
// max|d_x u| * dt exceeds 0.1.
std::vector<FluidState> advance_fluid(const FluidState& s0, double dt,
                                      int n_steps, SpaceScheme scheme,
                                      int snap_every = 1,
                                      const FluidForcing& forcing = nullptr);

// Uniformly sampled trajectory with cubic time interpolation.
struct FluidSeries {
  std::vector<FluidState> snaps;
  double t0 = 0.0;
  double dt = 0.0;  // snapshot spacing

  FluidState eval(double t) const;
  std::vector<Moments> moments_at(double t) const;
};
FluidSeries make_series(std::vector<FluidState> snaps);

// Manufactured solution rho = 1 + a sin(theta), u_x = a sin(theta),
// T = 1 + a sin(theta) with theta = 2 pi (x - t) / L; exact conservative
// forcing assembled by forward-mode differentiation.
FluidState mms_state(const SpatialGrid& xg, double a, double t);
FluidForcing mms_forcing(double a);

}  // namespace kinlim
