#pragma once

#include "kinlim/collision.hpp"
#include "kinlim/projection.hpp"

namespace kinlim {

// Dissipation norm
//   |g|_D^2 = int sigma^{ij} d_i g d_j g dv
//           + (4 R^2 Tc^2)^{-1} int sigma^{ij} v_i v_j g^2 dv,
// with sigma the mu-weighted convolution field.  The gradient is sampled
// with the same one-sided stencil the linearized operator uses (ConjDeriv::D
// in the rest frame), so norm and operator agree on every grid mode; a
// centered gradient here would be blind to checkerboard modes and make
// their Rayleigh quotients drift with resolution.
double d_norm_sq(const ConjDeriv& cd, const SigmaField& sig, const double* f);
double d_norm_sq(const VelocityGrid& g, const SigmaField& sig, double Tc,
                 const double* f);

// Component norms of the anisotropic lower bound (radial/tangential split of
// the gradient with Japanese-bracket weights, plus the zeroth-order term);
// used to fit the coercivity constant empirically.
struct DLowerParts {
  double pv_grad = 0.0;  // ||<v>^{-3/2} P_v grad g||^2
  double qv_grad = 0.0;  // ||<v>^{-1/2} (I-P_v) grad g||^2
  double zero = 0.0;     // ||<v>^{-1/2} g||^2
  double total() const { return pv_grad + qv_grad + zero; }
};
DLowerParts d_lower_parts(const VelocityGrid& g, const double* f);

// Time weights: X(t) = exp((8 R Tc)^{-1} / ln(e+t))-family bookkeeping;
// Y(t) = (8 R Tc (e+t) ln^2(e+t))^{-1} > 0.
double weight_Y(double t, double Tc);
// log of w_i(t,v) = <v>^{l-i} exp((1+|v|^2)/(8 R Tc ln(e+t))) at one node
double log_weight_w(double v2, int i, double t, int ell, double Tc);
// full weight table on the grid; throws NumericsError if not finite
Vec weight_w(const VelocityGrid& g, int i, double t, int ell, double Tc);

// ||w g||^2 dv with a finite-value guard
double weighted_norm_sq(const VelocityGrid& g, const Vec& w, const double* f);

// H^2-in-x distance to the local Maxwellian:
//   sum_{j=0..2} || d_x^j ( M^{-1/2} (F - M) ) ||^2_{L^2(x,v)}  (square root)
// Spectral x-derivatives (1D torus).
double convergence_metric(const KineticField& F, const std::vector<Moments>& m);

// Spectral analysis of the global linearized operator in the D-norm
// Rayleigh-quotient sense: smallest eigenvalues of L x = lambda B x with B
// the D-norm Gram operator.  delta = lambda_6; the five lowest modes are
// compared against span{chi} by principal angle.
struct GapResult {
  std::vector<double> eigs;      // ascending Ritz values
  double delta = 0.0;            // 6th smallest
  double principal_angle = 0.0;  // largest principal angle vs span{chi}
};
GapResult spectral_gap(const ConvEngine& eng, const GlobalMaxwellianParams& p,
                       int lanczos_steps = 120, unsigned seed = 12345);

// B-operator of the D-norm (exposed for tests): out = D^T sigma D f + q f,
// with D the same stencil as the d_norm_sq gradient.
void apply_dnorm_gram(const ConjDeriv& cd, const SigmaField& sig,
                      const double* f, double* out);
void apply_dnorm_gram(const VelocityGrid& g, const SigmaField& sig, double Tc,
                      const double* f, double* out);

// Energy and dissipation functionals.  Everything needed to assemble them is
// passed in so the diagnostics stay a pure reduction.  Two independently
// written assembly routes are kept for each branch as a transcription guard.
struct EnergyInputs {
  const KineticField* f = nullptr;  // M-frame remainder
  const KineticField* h = nullptr;  // mu-frame remainder
  const std::vector<Moments>* mom = nullptr;  // per spatial cell
  const SigmaField* sig_mu = nullptr;         // global sigma for D-norms
  double Tc = 1.0;
  double eps = 0.1;
  int k = 2;
  double t = 0.0;
  int ell = 3;
  const std::array<Vec, 3>* ER = nullptr;  // VML remainder fields over x
  const std::array<Vec, 3>* BR = nullptr;
};
struct EnergyRow {
  double E_total = 0.0;
  double D_total = 0.0;
};
EnergyRow energy_landau(const EnergyInputs& in);
EnergyRow energy_landau_alt(const EnergyInputs& in);
EnergyRow energy_vml(const EnergyInputs& in);
EnergyRow energy_vml_alt(const EnergyInputs& in);

}  // namespace kinlim
