#pragma once

#include <string>

#include "kinlim/hilbert.hpp"

namespace kinlim {

// Remainder of the truncated expansion: F = sum_n eps^n F_n + eps^k F_R with
// F_R = M^{1/2} f = mu^{1/2} h.  f (local-Maxwellian frame) is the frame of
// record; h is kept consistent via f_to_h after every accepted step.
struct RemainderState {
  KineticField f, h;
  std::array<Vec, 3> ER, BR;  // remainder fields (VML branch)
  double eps = 0.1;
  double time = 0.0;
  bool vml = false;
  GlobalMaxwellianParams mu;  // reference temperature of the h-frame
};

RemainderState make_remainder_state(const SpatialGrid& xg,
                                    const VelocityGrid& vg, double eps,
                                    bool vml, double Tc);

// Tendency split for IMEX integration: `expl` collects every term except the
// stiff linearized collision, which is returned evaluated in `stiff`
// (-eps^{-1} L_M f, resp. -eps^{-1}(L + L_d) h).
struct RemTend {
  KineticField expl, stiff;
  std::array<Vec, 3> d_ER, d_BR;
};

// (d_t + v_x d_x) log M^{1/2} sampled on the velocity grid, given the
// primitive background values and their partial time / x derivatives; this is
// the transport forcing multiplier of the f-equation (cubic in v).
Vec forcing_multiplier(const VelocityGrid& g, const Moments& m,
                       const Moments& dt_m, const Moments& dx_m);

RemTend rhs_f(const ConvEngine& eng, const RemainderState& s,
              const ExpansionSet& set, const FluidSeries& fluid);
RemTend rhs_h(const ConvEngine& eng, const RemainderState& s,
              const ExpansionSet& set, const FluidSeries& fluid);

// First-order IMEX step: explicit transport / forcing / couplings / nonlinear
// term, implicit (I + (dt/eps) L_M) solve per cell, staggered Maxwell update
// (VML), then h re-synchronized from f.  `resync_events` counts steps where
// the incoming h disagreed with f_to_h(f) beyond 1e-8 relative.
RemainderState step_imex(const ConvEngine& eng, const RemainderState& s,
                         const ExpansionSet& set, const FluidSeries& fluid,
                         double dt, int* resync_events = nullptr);

// Direct evolution of the unexpanded kinetic equation for cross-validation.
struct FullState {
  KineticField F;
  std::array<Vec, 3> E, B;
  double time = 0.0;
  bool vml = false;
};

// SSP-RK3 transport (+ Lorentz force and Maxwell update on the VML branch)
// followed by a backward-Euler collision substep per cell, performed in the
// frame of the instantaneous local Maxwellian so that mass, momentum and
// energy are conserved exactly by the collision update.
FullState step_full(const ConvEngine& eng, const FullState& s, double eps,
                    double dt);

// F = sum eps^n F_n + eps^k mu^{1/2} h (and the field analogues).
FullState reconstruct_full(const ExpansionSet& set, const RemainderState& s);

// Constraint monitors (max norm over cells)
double remainder_gauss_residual(const RemainderState& s);  // d_x E_Rx + 4pi m0
double remainder_divB_residual(const RemainderState& s);

// Columnar checkpoint of f, E_R, B_R with grid metadata (version header).
void write_checkpoint(const std::string& path, const RemainderState& s);
RemainderState read_checkpoint(const std::string& path);

}  // namespace kinlim
