#pragma once

#include <array>

#include "kinlim/grid.hpp"
#include "kinlim/maxwellian.hpp"

namespace kinlim {

// Velocity derivatives on the truncated cube.
//
// The finite-difference stencil D is second-order centered in the interior
// with second-order one-sided closures at the cube faces.  D is exact on
// quadratics, which makes the discrete collision machinery conserve mass,
// momentum and energy exactly and gives the linearized operators an exact
// five-dimensional null space (see collision.cpp).

// Plain D and its exact transpose along one axis of a velocity cube.
void apply_d(const VelocityGrid& g, int axis, const double* f, double* out);
void apply_dt(const VelocityGrid& g, int axis, const double* f, double* out);

// Fourier differentiation along one axis (fields must vanish at the cube
// boundary for this to be accurate; used as the high-accuracy inner
// derivative of the bilinear collision evaluation).
void apply_d_spectral(const VelocityGrid& g, int axis, const double* f,
                      double* out);

// (E + v x B) . D_v f with the quadratic-exact stencil D.
Vec lorentz_apply(const VelocityGrid& g, const std::array<double, 3>& E,
                  const std::array<double, 3>& B, const double* f);

// Gaussian-conjugated derivative machinery for a Maxwellian frame:
//   G_j f    = M^{1/2} D_j (M^{-1/2} f)   ~  (d/dv_j + qhat_j) f
//   G^T      = exact matrix transpose of G
//   dhat_j   = G_j - qhat_j               ~  d/dv_j
// with qhat = (v - u)/(2RT).
//
// D is a per-row four-point Lagrange stencil that leans toward the frame
// velocity u.  Exactness on cubics keeps the conserved-moment algebra and
// the five-dimensional null space of the linearized operator exact, while
// the asymmetry keeps the stencil symbol nonzero at the grid Nyquist
// frequency: a centered stencil is blind to M^{1/2}-weighted odd-even
// modes (its boundary closures are exponentially Maxwellian-suppressed),
// which would hand the linearized operator a spurious near-null cluster.
// Leaning toward u also keeps the conjugation ratios M^{1/2}(v_j)/M^{1/2}(v_i)
// bounded, so no large matrix entries appear at the tails.
class ConjDeriv {
 public:
  ConjDeriv(const VelocityGrid& g, const Moments& m);

  const VelocityGrid& grid() const { return *g_; }
  const Moments& moments() const { return m_; }
  double RT() const { return RT_; }
  double qhat(int axis, int i) const { return qh_[std::size_t(axis)][std::size_t(i)]; }

  void G(int axis, const double* f, double* out) const;
  void GT(int axis, const double* f, double* out) const;
  void dhat(int axis, const double* f, double* out) const;   // G - qhat
  void dhatT(int axis, const double* f, double* out) const;  // GT - qhat

  // Plain (unconjugated) stencil and its exact transpose; the companion of
  // G through the identity G^T s = M^{-1/2} D^T (M^{1/2} s).
  void D(int axis, const double* f, double* out) const;
  void DT(int axis, const double* f, double* out) const;

  // out += coeff * G/GT (used by operator assembly)
  void G_acc(int axis, const double* f, double* out, double coeff) const;
  void GT_acc(int axis, const double* f, double* out, double coeff) const;

  // row structure (used to assemble Jacobi diagonals of G^T Sigma G)
  int stencil_start(int axis, int i) const {
    return start_[std::size_t(axis)][std::size_t(i)];
  }
  double stencil_wr(int axis, int i, int k) const {
    return wr_[std::size_t(axis)][std::size_t(i)][std::size_t(k)];
  }
  double stencil_w(int axis, int i, int k) const {
    return w_[std::size_t(axis)][std::size_t(i)][std::size_t(k)];
  }

 private:
  const VelocityGrid* g_;
  Moments m_;
  double RT_;
  std::array<Vec, 3> qh_;
  // per-axis, per-row: first stencil node, plain weights, ratio-folded weights
  std::array<std::vector<int>, 3> start_;
  std::array<std::vector<std::array<double, 4>>, 3> w_, wr_;
};

}  // namespace kinlim
