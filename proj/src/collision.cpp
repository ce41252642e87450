#include "kinlim/collision.hpp"

#include <cmath>

namespace kinlim {

namespace {

// out[a] (+)= coeff * q[axis-coordinate of a] * f[a]
void axis_mult(const VelocityGrid& g, int axis, const Vec& q, const double* f,
               double* out, double coeff, bool acc) {
  const int n = g.n;
  std::size_t a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++a) {
        const int c = axis == 0 ? i : (axis == 1 ? j : k);
        const double v = coeff * q[std::size_t(c)] * f[a];
        if (acc)
          out[a] += v;
        else
          out[a] = v;
      }
}

// flux_i = sum_j sig^{ij} y_j, for i = 0,1,2 (sig in kSymIdx order)
void sigma_contract(const SigmaField& sig, const std::array<Vec, 3>& y,
                    std::array<Vec, 3>& flux) {
  const std::size_t N = y[0].size();
  for (int i = 0; i < 3; ++i) {
    flux[std::size_t(i)].assign(N, 0.0);
    for (int j = 0; j < 3; ++j) {
      const Vec& s = sig.c[std::size_t(sym_index(i, j))];
      const Vec& yj = y[std::size_t(j)];
      Vec& out = flux[std::size_t(i)];
      for (std::size_t a = 0; a < N; ++a) out[a] += s[a] * yj[a];
    }
  }
}

std::array<const double*, 3> ptrs(const std::array<Vec, 3>& v) {
  return {v[0].data(), v[1].data(), v[2].data()};
}

}  // namespace

Vec collide(const ConvEngine& eng, const Vec& G, const Vec& H) {
  const VelocityGrid& g = eng.grid();
  const std::size_t N = g.size();

  std::array<Vec, 3> dH, dG;
  for (int j = 0; j < 3; ++j) {
    dH[std::size_t(j)].resize(N);
    dG[std::size_t(j)].resize(N);
    apply_d_spectral(g, j, H.data(), dH[std::size_t(j)].data());
    apply_d_spectral(g, j, G.data(), dG[std::size_t(j)].data());
  }

  SigmaField sigG = eng.sigma(G);
  std::array<Vec, 3> eta;
  eng.contract(ptrs(dG), eta);

  std::array<Vec, 3> flux;
  sigma_contract(sigG, dH, flux);
  for (int i = 0; i < 3; ++i) {
    Vec& fl = flux[std::size_t(i)];
    const Vec& et = eta[std::size_t(i)];
    for (std::size_t a = 0; a < N; ++a) fl[a] -= H[a] * et[a];
  }

  Vec out(N, 0.0), tmp(N);
  for (int i = 0; i < 3; ++i) {
    apply_dt(g, i, flux[std::size_t(i)].data(), tmp.data());
    for (std::size_t a = 0; a < N; ++a) out[a] -= tmp[a];
  }
  return out;
}

FrameOps::FrameOps(const ConvEngine& eng, const Moments& m)
    : eng_(&eng), cd_(eng.grid(), m), sqrtM_(sqrt_local_maxwellian(eng.grid(), m)) {
  Vec M(eng.grid().size());
  local_maxwellian(eng.grid(), m, M.data());
  eng.sigma(M.data(), sig_);
}

void FrameOps::Gvec(const double* f, std::array<Vec, 3>& g) const {
  const std::size_t N = eng_->grid().size();
  for (int j = 0; j < 3; ++j) {
    g[std::size_t(j)].resize(N);
    cd_.G(j, f, g[std::size_t(j)].data());
  }
}

void FrameOps::Yvec(const double* f, std::array<Vec, 3>& y) const {
  const VelocityGrid& g = eng_->grid();
  const std::size_t N = g.size();
  for (int j = 0; j < 3; ++j) {
    y[std::size_t(j)].resize(N);
    cd_.G(j, f, y[std::size_t(j)].data());
    // subtract qtilde = 2 qhat, leaving ~ d/dv_j - qhat_j
    Vec q(std::size_t(g.n));
    for (int i = 0; i < g.n; ++i) q[std::size_t(i)] = 2.0 * cd_.qhat(j, i);
    axis_mult(g, j, q, f, y[std::size_t(j)].data(), -1.0, true);
  }
}

void FrameOps::apply_L(const double* f, double* out) const {
  const VelocityGrid& g = eng_->grid();
  const std::size_t N = g.size();

  std::array<Vec, 3> gv;
  Gvec(f, gv);

  std::array<Vec, 3> s;
  sigma_contract(sig_, gv, s);

  std::array<Vec, 3> tmp;
  for (int j = 0; j < 3; ++j) {
    tmp[std::size_t(j)].resize(N);
    for (std::size_t a = 0; a < N; ++a)
      tmp[std::size_t(j)][a] = sqrtM_[a] * gv[std::size_t(j)][a];
  }
  std::array<Vec, 3> w;
  eng_->contract(ptrs(tmp), w);
  for (int i = 0; i < 3; ++i) {
    Vec& si = s[std::size_t(i)];
    const Vec& wi = w[std::size_t(i)];
    for (std::size_t a = 0; a < N; ++a) si[a] -= sqrtM_[a] * wi[a];
  }

  for (std::size_t a = 0; a < N; ++a) out[a] = 0.0;
  for (int i = 0; i < 3; ++i) cd_.GT_acc(i, s[std::size_t(i)].data(), out, 1.0);
}

Vec FrameOps::apply_L(const Vec& f) const {
  Vec out(f.size());
  apply_L(f.data(), out.data());
  return out;
}

Vec FrameOps::frame_collide(const Vec& a, const Vec& b) const {
  const VelocityGrid& g = eng_->grid();
  const std::size_t N = g.size();

  std::array<Vec, 3> Xa, Xb;
  Yvec(a.data(), Xa);
  Yvec(b.data(), Xb);
  for (int j = 0; j < 3; ++j)
    for (std::size_t p = 0; p < N; ++p) {
      Xa[std::size_t(j)][p] *= sqrtM_[p];
      Xb[std::size_t(j)][p] *= sqrtM_[p];
    }

  Vec sa(N);
  for (std::size_t p = 0; p < N; ++p) sa[p] = sqrtM_[p] * a[p];
  SigmaField sig_a = eng_->sigma(sa);

  std::array<Vec, 3> eta;
  eng_->contract(ptrs(Xa), eta);

  std::array<Vec, 3> flux;
  sigma_contract(sig_a, Xb, flux);
  for (int i = 0; i < 3; ++i) {
    Vec& fl = flux[std::size_t(i)];
    const Vec& et = eta[std::size_t(i)];
    for (std::size_t p = 0; p < N; ++p) fl[p] -= sqrtM_[p] * b[p] * et[p];
  }

  Vec out(N, 0.0), tmp(N);
  for (int i = 0; i < 3; ++i) {
    cd_.DT(i, flux[std::size_t(i)].data(), tmp.data());
    for (std::size_t p = 0; p < N; ++p) out[p] -= tmp[p];
  }
  return out;
}

Vec FrameOps::apply_L_direct(const Vec& f) const {
  const std::size_t N = f.size();
  Vec t1 = frame_collide(sqrtM_, f);
  Vec t2 = frame_collide(f, sqrtM_);
  Vec out(N);
  for (std::size_t a = 0; a < N; ++a) out[a] = -(t1[a] + t2[a]) / sqrtM_[a];
  return out;
}

Vec FrameOps::apply_L_explicit(const Vec& f) const {
  const VelocityGrid& g = eng_->grid();
  const std::size_t N = g.size();

  // qhat per axis as coordinate tables
  std::array<Vec, 3> qh;
  for (int j = 0; j < 3; ++j) {
    qh[std::size_t(j)].resize(std::size_t(g.n));
    for (int i = 0; i < g.n; ++i) qh[std::size_t(j)][std::size_t(i)] = cd_.qhat(j, i);
  }

  // diffusion part, four groups of terms
  std::array<Vec, 3> dh;
  for (int j = 0; j < 3; ++j) {
    dh[std::size_t(j)].resize(N);
    cd_.dhat(j, f.data(), dh[std::size_t(j)].data());
  }
  std::array<Vec, 3> sA;
  sigma_contract(sig_, dh, sA);

  Vec A(N, 0.0), tmp(N);
  for (int i = 0; i < 3; ++i) {
    cd_.dhatT(i, sA[std::size_t(i)].data(), tmp.data());
    for (std::size_t a = 0; a < N; ++a) A[a] -= tmp[a];
  }
  std::array<Vec, 3> qf;
  for (int j = 0; j < 3; ++j) {
    qf[std::size_t(j)].resize(N);
    axis_mult(g, j, qh[std::size_t(j)], f.data(), qf[std::size_t(j)].data(), 1.0,
              false);
  }
  std::array<Vec, 3> sq;
  sigma_contract(sig_, qf, sq);
  for (int i = 0; i < 3; ++i) {
    cd_.dhatT(i, sq[std::size_t(i)].data(), tmp.data());
    for (std::size_t a = 0; a < N; ++a) A[a] -= tmp[a];
    axis_mult(g, i, qh[std::size_t(i)], sA[std::size_t(i)].data(), A.data(), -1.0,
              true);
    axis_mult(g, i, qh[std::size_t(i)], sq[std::size_t(i)].data(), A.data(), -1.0,
              true);
  }

  // compact part: + G^T [ M^{1/2} (phi * M^{1/2}(dhat + qhat) f) ]
  std::array<Vec, 3> gm;
  for (int j = 0; j < 3; ++j) {
    gm[std::size_t(j)].resize(N);
    const Vec& d = dh[std::size_t(j)];
    const Vec& q = qf[std::size_t(j)];
    for (std::size_t a = 0; a < N; ++a)
      gm[std::size_t(j)][a] = sqrtM_[a] * (d[a] + q[a]);
  }
  std::array<Vec, 3> w;
  eng_->contract(ptrs(gm), w);
  Vec K(N, 0.0);
  for (int i = 0; i < 3; ++i) {
    const Vec& wi = w[std::size_t(i)];
    for (std::size_t a = 0; a < N; ++a) tmp[a] = sqrtM_[a] * wi[a];
    cd_.GT_acc(i, tmp.data(), K.data(), 1.0);
  }

  Vec out(N);
  for (std::size_t a = 0; a < N; ++a) out[a] = -(A[a] + K[a]);
  return out;
}

Vec FrameOps::gamma(const Vec& f1, const Vec& f2) const {
  const VelocityGrid& g = eng_->grid();
  const std::size_t N = g.size();

  std::array<Vec, 3> y1, y2;
  Yvec(f1.data(), y1);
  Yvec(f2.data(), y2);

  Vec s1(N);
  for (std::size_t a = 0; a < N; ++a) s1[a] = sqrtM_[a] * f1[a];
  SigmaField sig1 = eng_->sigma(s1);

  std::array<Vec, 3> x1;
  for (int j = 0; j < 3; ++j) {
    x1[std::size_t(j)].resize(N);
    for (std::size_t a = 0; a < N; ++a)
      x1[std::size_t(j)][a] = sqrtM_[a] * y1[std::size_t(j)][a];
  }
  std::array<Vec, 3> eta;
  eng_->contract(ptrs(x1), eta);

  std::array<Vec, 3> inner;
  sigma_contract(sig1, y2, inner);
  for (int i = 0; i < 3; ++i) {
    Vec& in = inner[std::size_t(i)];
    const Vec& et = eta[std::size_t(i)];
    for (std::size_t a = 0; a < N; ++a) in[a] -= f2[a] * et[a];
  }

  Vec out(N, 0.0);
  for (int i = 0; i < 3; ++i)
    cd_.GT_acc(i, inner[std::size_t(i)].data(), out.data(), -1.0);
  return out;
}

Vec FrameOps::gamma_direct(const Vec& f1, const Vec& f2) const {
  Vec c = frame_collide(f1, f2);
  for (std::size_t a = 0; a < c.size(); ++a) c[a] /= sqrtM_[a];
  return c;
}

Vec FrameOps::diag_L() const {
  // diagonal of the dominant G^T Sigma G part: node a along axis `ax` is
  // touched by every row r whose stencil window contains its coordinate;
  // each contributes (row entry)^2 * sigma_{ax,ax}(row point).  Cross-axis
  // sigma terms are dropped (approximate Jacobi diagonal).
  const VelocityGrid& g = eng_->grid();
  const int n = g.n;
  const std::size_t N = g.size();
  Vec diag(N, 0.0);

  std::size_t a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++a) {
        const int c[3] = {i, j, k};
        const std::size_t stride[3] = {std::size_t(n) * n, std::size_t(n), 1};
        for (int ax = 0; ax < 3; ++ax) {
          const Vec& s = sig_.c[std::size_t(sym_index(ax, ax))];
          const int ci = c[ax];
          double acc = 0.0;
          for (int r = std::max(0, ci - 3); r <= std::min(n - 1, ci + 3); ++r) {
            const int s0 = cd_.stencil_start(ax, r);
            if (ci < s0 || ci > s0 + 3) continue;
            const double entry = cd_.stencil_wr(ax, r, ci - s0);
            const std::size_t row = std::size_t(
                std::ptrdiff_t(a) +
                std::ptrdiff_t(r - ci) * std::ptrdiff_t(stride[ax]));
            acc += entry * entry * s[row];
          }
          diag[a] += acc;
        }
        if (diag[a] < 1e-300) diag[a] = 1e-300;
      }
  return diag;
}

Vec difference_Ld(const FrameOps& mu_ops, const Moments& m, const Vec& h,
                  int route) {
  const ConvEngine& eng = mu_ops.engine();
  const VelocityGrid& g = eng.grid();
  const std::size_t N = g.size();

  // w = (M - mu)/sqrt(mu), computed through the density ratio so the tails
  // stay finite
  Vec M = local_maxwellian(g, m);
  const Vec& smu = mu_ops.sqrtM();
  Vec w(N);
  for (std::size_t a = 0; a < N; ++a) w[a] = M[a] / smu[a] - smu[a];

  switch (route) {
    case 2: {
      Vec t1 = mu_ops.gamma(w, h);
      Vec t2 = mu_ops.gamma(h, w);
      Vec out(N);
      for (std::size_t a = 0; a < N; ++a) out[a] = -(t1[a] + t2[a]);
      return out;
    }
    case 1: {
      Vec t1 = mu_ops.frame_collide(w, h);
      Vec t2 = mu_ops.frame_collide(h, w);
      Vec out(N);
      for (std::size_t a = 0; a < N; ++a) out[a] = -(t1[a] + t2[a]) / smu[a];
      return out;
    }
    default: {
      // A_d + K_d split: the first-slot (diffusion-like) and second-slot
      // (compact-like) halves assembled term by term
      SigmaField sig_w = eng.sigma([&] {
        Vec sw(N);
        for (std::size_t a = 0; a < N; ++a) sw[a] = smu[a] * w[a];
        return sw;
      }());

      std::array<Vec, 3> yh, yw;
      // frame derivative (G - qtilde) in the mu frame
      {
        const ConjDeriv& cd = mu_ops.conj();
        for (int j = 0; j < 3; ++j) {
          yh[std::size_t(j)].resize(N);
          yw[std::size_t(j)].resize(N);
          cd.G(j, h.data(), yh[std::size_t(j)].data());
          cd.G(j, w.data(), yw[std::size_t(j)].data());
          Vec q(std::size_t(g.n));
          for (int i = 0; i < g.n; ++i) q[std::size_t(i)] = 2.0 * cd.qhat(j, i);
          axis_mult(g, j, q, h.data(), yh[std::size_t(j)].data(), -1.0, true);
          axis_mult(g, j, q, w.data(), yw[std::size_t(j)].data(), -1.0, true);
        }
      }

      std::array<Vec, 3> xw;
      for (int j = 0; j < 3; ++j) {
        xw[std::size_t(j)].resize(N);
        for (std::size_t a = 0; a < N; ++a)
          xw[std::size_t(j)][a] = smu[a] * yw[std::size_t(j)][a];
      }
      std::array<Vec, 3> eta_w;
      eng.contract(ptrs(xw), eta_w);

      const ConjDeriv& cd = mu_ops.conj();
      Vec Ad(N, 0.0);
      // A_d: -G^T[sigma_{M-mu} Y(h)] + G^T[h * (phi * d(M-mu))]
      {
        std::array<Vec, 3> fl;
        sigma_contract(sig_w, yh, fl);
        for (int i = 0; i < 3; ++i)
          cd.GT_acc(i, fl[std::size_t(i)].data(), Ad.data(), -1.0);
        Vec t(N);
        for (int i = 0; i < 3; ++i) {
          const Vec& et = eta_w[std::size_t(i)];
          for (std::size_t a = 0; a < N; ++a) t[a] = h[a] * et[a];
          cd.GT_acc(i, t.data(), Ad.data(), 1.0);
        }
      }
      Vec Kd(N, 0.0);
      // K_d: -G^T[sigma_{mu^{1/2}h} Y(w)] + G^T[w * (phi * d(mu^{1/2}h))]
      {
        Vec sh(N);
        for (std::size_t a = 0; a < N; ++a) sh[a] = smu[a] * h[a];
        SigmaField sig_h = eng.sigma(sh);
        std::array<Vec, 3> fl;
        sigma_contract(sig_h, yw, fl);
        for (int i = 0; i < 3; ++i)
          cd.GT_acc(i, fl[std::size_t(i)].data(), Kd.data(), -1.0);

        std::array<Vec, 3> xh;
        for (int j = 0; j < 3; ++j) {
          xh[std::size_t(j)].resize(N);
          for (std::size_t a = 0; a < N; ++a)
            xh[std::size_t(j)][a] = smu[a] * yh[std::size_t(j)][a];
        }
        std::array<Vec, 3> eta_h;
        eng.contract(ptrs(xh), eta_h);
        Vec t(N);
        for (int i = 0; i < 3; ++i) {
          const Vec& et = eta_h[std::size_t(i)];
          for (std::size_t a = 0; a < N; ++a) t[a] = w[a] * et[a];
          cd.GT_acc(i, t.data(), Kd.data(), 1.0);
        }
      }
      Vec out(N);
      for (std::size_t a = 0; a < N; ++a) out[a] = -(Ad[a] + Kd[a]);
      return out;
    }
  }
}

Vec linearized_LM(const ConvEngine& eng, const Vec& f, const Moments& m) {
  return FrameOps(eng, m).apply_L_explicit(f);
}

Vec linearized_L(const ConvEngine& eng, const Vec& h,
                 const GlobalMaxwellianParams& p) {
  Moments m;
  m.T = p.Tc;
  return FrameOps(eng, m).apply_L_explicit(h);
}

Vec gamma_M(const ConvEngine& eng, const Vec& f1, const Vec& f2,
            const Moments& m) {
  return FrameOps(eng, m).gamma(f1, f2);
}

Vec gamma_mu(const ConvEngine& eng, const Vec& h1, const Vec& h2,
             const GlobalMaxwellianParams& p) {
  Moments m;
  m.T = p.Tc;
  return FrameOps(eng, m).gamma(h1, h2);
}

}  // namespace kinlim
