#pragma once

#include "kinlim/kernel.hpp"
#include "kinlim/maxwellian.hpp"
#include "kinlim/vderiv.hpp"

namespace kinlim {

// Bilinear Landau operator C(G,H) in divergence form.  Inner derivatives are
// spectral (accurate for fields vanishing at the cube boundary); the outer
// divergence is the negative transpose of the quadratic-exact stencil D, so
// that discrete conservation holds exactly:
//   - mass for any G, H;
//   - momentum and energy whenever the flux is argument-symmetric (G = H, or
//     a symmetrized pair), via the a<->b pairing and phi(d) d = 0.
Vec collide(const ConvEngine& eng, const Vec& G, const Vec& H);

// Linearized/nonlinear operators around a Maxwellian frame W (local M or the
// global mu).  Everything is expressed through the conjugated derivative
// G ~ d/dv + qhat and its exact transpose, which gives
//   L = G^T (Sigma - W) G :   symmetric, positive semidefinite (exactly),
// with an exact 5-dimensional null space spanned by the sampled collision
// invariants; the direct and explicit routes below are algebraic
// rearrangements of the same primitives and agree to rounding.
class FrameOps {
 public:
  FrameOps(const ConvEngine& eng, const Moments& m);

  const ConvEngine& engine() const { return *eng_; }
  const Moments& moments() const { return cd_.moments(); }
  const ConjDeriv& conj() const { return cd_; }
  const Vec& sqrtM() const { return sqrtM_; }
  const SigmaField& sigmaM() const { return sig_; }

  // production route: G^T (Sigma - W) G f
  void apply_L(const double* f, double* out) const;
  Vec apply_L(const Vec& f) const;
  // defining expressions -M^{-1/2}[C(M, M^{1/2}f) + C(M^{1/2}f, M)]
  Vec apply_L_direct(const Vec& f) const;
  // term-by-term A + K split
  Vec apply_L_explicit(const Vec& f) const;

  // Gamma(f1,f2) = M^{-1/2} C(M^{1/2}f1, M^{1/2}f2); explicit assembly is the
  // returned route, the direct route is exposed for cross-checks.
  Vec gamma(const Vec& f1, const Vec& f2) const;
  Vec gamma_direct(const Vec& f1, const Vec& f2) const;

  // C(M^{1/2}a, M^{1/2}b) as a plain field (not divided by M^{1/2})
  Vec frame_collide(const Vec& a, const Vec& b) const;

  // approximate diagonal of L (Jacobi preconditioner for the CG solvers)
  Vec diag_L() const;

 private:
  const ConvEngine* eng_;
  ConjDeriv cd_;
  Vec sqrtM_;
  SigmaField sig_;

  void Gvec(const double* f, std::array<Vec, 3>& g) const;
  // Y_j = (G_j - qtilde_j) f  ~  (d/dv_j - qhat_j) f
  void Yvec(const double* f, std::array<Vec, 3>& y) const;
};

// Difference operator L_d = L_M-in-mu-frame minus L; three evaluation routes:
//   0: A_d + K_d term split, 1: direct difference of defining C-expressions,
//   2: Gamma-form with w = (M - mu)/sqrt(mu).
Vec difference_Ld(const FrameOps& mu_ops, const Moments& m, const Vec& h,
                  int route = 0);

// Convenience wrappers (construct the frame per call; heavy users should hold
// a FrameOps).
Vec linearized_LM(const ConvEngine& eng, const Vec& f, const Moments& m);
Vec linearized_L(const ConvEngine& eng, const Vec& h,
                 const GlobalMaxwellianParams& p);
Vec gamma_M(const ConvEngine& eng, const Vec& f1, const Vec& f2,
            const Moments& m);
Vec gamma_mu(const ConvEngine& eng, const Vec& h1, const Vec& h2,
             const GlobalMaxwellianParams& p);

}  // namespace kinlim
