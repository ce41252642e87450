#pragma once

#include "kinlim/collision.hpp"
#include "kinlim/fluid.hpp"
#include "kinlim/projection.hpp"

namespace kinlim {

// Expansion coefficients F_1 .. F_{2k-1} built order by order: the
// microscopic part inverts the linearized operator on the null-space
// complement (CG), the macroscopic part integrates the conserved-moment
// equations with sources quadratured from the same discrete operators, so
// the next order's solvability holds by construction up to time-integration
// error.  Everything is stored on a uniform snapshot grid in time.
struct ExpansionSet {
  int k = 2;
  bool vml = false;
  SpatialGrid xg;
  VelocityGrid vg;
  double t0 = 0.0, dt = 0.0;  // snapshot grid
  int n_snap = 0;

  // [order][snapshot]; order 0 is the local Maxwellian background
  std::vector<std::vector<KineticField>> F;
  // field coefficients (VML); order 0 holds the background E, B
  std::vector<std::vector<std::array<Vec, 3>>> En, Bn;

  // max over snapshots of the global ||P r|| / ||r|| of the order-n source
  std::vector<double> solvability;
  std::vector<double> gauss_viol;   // max per-order Gauss residual (VML)
  int warnings = 0;

  double time_of(int s) const { return t0 + s * dt; }
  // cubic time interpolation of a coefficient / field
  KineticField coeff(int n, double t) const;
  std::array<Vec, 3> field_E(int n, double t) const;
  std::array<Vec, 3> field_B(int n, double t) const;
  // truncated sum  sum_n eps^n F_n  at time t
  KineticField truncated(double eps, double t) const;
  std::array<Vec, 3> truncated_E(double eps, double t) const;
  std::array<Vec, 3> truncated_B(double eps, double t) const;
};

struct ExpansionOptions {
  int macro_substeps = 4;  // RK4 substeps per snapshot interval
  double cg_tol = 1e-9;
  int cg_max_iter = 5000;
  double solv_warn = 1e-8;  // projection-warning threshold for invert_LM
};

// Pseudo-inverse of the linearized operator on the null-space complement:
// returns g with L_M g = r, P_M g = 0, relative residual <= tol.  Inputs and
// outputs in the M-frame (r = source / sqrt(M)).  If the solvability
// violation of r exceeds warn_tol, r is projected and *warnings bumped.
Vec invert_LM(const FrameOps& ops, const MacroBasis& basis, const Vec& r,
              double tol, int max_iter, double warn_tol, int* warnings);

ExpansionSet build_coefficients(const ConvEngine& eng, const FluidSeries& fluid,
                                int k, bool vml,
                                const ExpansionOptions& opt = {});

// Residual of the truncated expansion, reported with the remainder-equation
// normalization eps^{-k} * || dt F~ + v.grad F~ - eps^{-1} C(F~,F~) (+field
// terms) ||, which scales like eps^k.  Two assembly routes are compared:
//   (a) the truncation-error term assembled pairwise from high orders;
//   (b) the full equation evaluated on the summed field with hierarchy
//       tendencies substituted for dt F_n.
struct ResidualResult {
  double value = 0.0;      // L2 norm of the normalized residual (route a)
  double route_diff = 0.0; // relative difference between the routes
};

// The normalized truncation-error source (route (a) above) as a plain field;
// this is the inhomogeneous forcing of the remainder equations.
KineticField truncation_source(const ConvEngine& eng, const ExpansionSet& set,
                               double eps, double t);
ResidualResult expansion_residual(const ConvEngine& eng, const ExpansionSet& set,
                                  double eps, double t);

}  // namespace kinlim
