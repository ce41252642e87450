#include "kinlim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "kinlim/solver.hpp"
#include "kinlim/xops.hpp"

namespace kinlim {

namespace {

// symmetric Jacobi eigensolver for small dense matrices (row-major n x n);
// eigenvalues ascending, eigenvectors in columns of V
void jacobi_eig(std::vector<double>& A, int n, std::vector<double>& evals,
                std::vector<double>& V) {
  V.assign(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) V[std::size_t(i) * n + i] = 1.0;
  auto at = [&](int i, int j) -> double& { return A[std::size_t(i) * n + j]; };
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double sgn = theta >= 0 ? 1.0 : -1.0;
        const double t = sgn / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          const double apj = at(p, j), aqj = at(q, j);
          at(p, j) = c * apj - s * aqj;
          at(q, j) = s * apj + c * aqj;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = V[std::size_t(i) * n + p], viq = V[std::size_t(i) * n + q];
          V[std::size_t(i) * n + p] = c * vip - s * viq;
          V[std::size_t(i) * n + q] = s * vip + c * viq;
        }
      }
  }
  evals.resize(std::size_t(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    evals[std::size_t(i)] = at(i, i);
    order[std::size_t(i)] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return evals[std::size_t(a)] < evals[std::size_t(b)]; });
  std::vector<double> ev2(static_cast<std::size_t>(n)), V2(V.size());
  for (int c = 0; c < n; ++c) {
    ev2[std::size_t(c)] = evals[std::size_t(order[std::size_t(c)])];
    for (int i = 0; i < n; ++i)
      V2[std::size_t(i) * n + c] = V[std::size_t(i) * n + order[std::size_t(c)]];
  }
  evals = ev2;
  V = V2;
}

void gradient(const VelocityGrid& g, const double* f, std::array<Vec, 3>& df) {
  for (int j = 0; j < 3; ++j) {
    df[std::size_t(j)].resize(g.size());
    apply_d(g, j, f, df[std::size_t(j)].data());
  }
}

}  // namespace

double d_norm_sq(const ConjDeriv& cd, const SigmaField& sig, const double* f) {
  const VelocityGrid& g = cd.grid();
  const std::size_t N = g.size();
  std::array<Vec, 3> df;
  for (int j = 0; j < 3; ++j) {
    df[std::size_t(j)].resize(N);
    cd.D(j, f, df[std::size_t(j)].data());
  }
  Vec integrand(N);
  const double Tc = cd.moments().T;
  const double c0 = 1.0 / (4.0 * kRGas * kRGas * Tc * Tc);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double sg = sig.c[std::size_t(sym_index(i, j))][a];
        s += sg * df[std::size_t(i)][a] * df[std::size_t(j)][a];
        s += c0 * sg * v[std::size_t(i)] * v[std::size_t(j)] * f[a] * f[a];
      }
    integrand[a] = s;
  }
  return det_sum(integrand.data(), N) * g.weight();
}

double d_norm_sq(const VelocityGrid& g, const SigmaField& sig, double Tc,
                 const double* f) {
  Moments rest;
  rest.T = Tc;
  return d_norm_sq(ConjDeriv(g, rest), sig, f);
}

DLowerParts d_lower_parts(const VelocityGrid& g, const double* f) {
  const std::size_t N = g.size();
  std::array<Vec, 3> df;
  gradient(g, f, df);
  DLowerParts out;
  Vec ipv(N), iqv(N), iz(N);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double dot =
        df[0][a] * v[0] + df[1][a] * v[1] + df[2][a] * v[2];
    double pv2 = 0.0, qv2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double pj = dot * v[std::size_t(j)] / (r * r);
      const double qj = df[std::size_t(j)][a] - pj;
      pv2 += pj * pj;
      qv2 += qj * qj;
    }
    const double b = 1.0 + r;
    ipv[a] = pv2 / (b * b * b);
    iqv[a] = qv2 / b;
    iz[a] = f[a] * f[a] / b;
  }
  out.pv_grad = det_sum(ipv.data(), N) * g.weight();
  out.qv_grad = det_sum(iqv.data(), N) * g.weight();
  out.zero = det_sum(iz.data(), N) * g.weight();
  return out;
}

double weight_Y(double t, double Tc) {
  const double l = std::log(M_E + t);
  return 1.0 / (8.0 * kRGas * Tc * (M_E + t) * l * l);
}

double log_weight_w(double v2, int i, double t, int ell, double Tc) {
  const double bracket2 = 1.0 + v2;
  return 0.5 * (ell - i) * std::log(bracket2) +
         (1.0 + v2) / (8.0 * kRGas * Tc * std::log(M_E + t));
}

Vec weight_w(const VelocityGrid& g, int i, double t, int ell, double Tc) {
  const std::size_t N = g.size();
  Vec w(N);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    const double lw = log_weight_w(v2, i, t, ell, Tc);
    w[a] = std::exp(lw);
    if (!std::isfinite(w[a]))
      throw NumericsError("velocity weight overflow: reduce v_max or ell");
  }
  return w;
}

double weighted_norm_sq(const VelocityGrid& g, const Vec& w, const double* f) {
  const std::size_t N = g.size();
  Vec integrand(N);
  for (std::size_t a = 0; a < N; ++a) {
    const double x = w[a] * f[a];
    integrand[a] = x * x;
  }
  const double s = det_sum(integrand.data(), N) * g.weight();
  if (!std::isfinite(s)) throw NumericsError("weighted norm not finite");
  return s;
}

double convergence_metric(const KineticField& F,
                          const std::vector<Moments>& m) {
  const std::size_t C = F.cells();
  const std::size_t N = F.vg.size();
  KineticField gfield(F.xg, F.vg);
  Vec M(N);
  for (std::size_t c = 0; c < C; ++c) {
    local_maxwellian(F.vg, m[c], M.data());
    Vec sm = sqrt_local_maxwellian(F.vg, m[c]);
    const double* Fc = F.cell(c);
    double* gc = gfield.cell(c);
    for (std::size_t a = 0; a < N; ++a) gc[a] = (Fc[a] - M[a]) / sm[a];
  }
  const double wxv = F.vg.weight() * F.xg.dx();
  double total = 0.0;
  KineticField cur = gfield, nxt(F.xg, F.vg);
  for (int j = 0; j <= 2; ++j) {
    Vec sq(cur.data.size());
    for (std::size_t a = 0; a < sq.size(); ++a) sq[a] = cur.data[a] * cur.data[a];
    total += det_sum(sq.data(), sq.size()) * wxv;
    if (j < 2) {
      spatial_dx(F.xg, N, cur.data.data(), nxt.data.data());
      std::swap(cur, nxt);
    }
  }
  return std::sqrt(total);
}

void apply_dnorm_gram(const ConjDeriv& cd, const SigmaField& sig,
                      const double* f, double* out) {
  const VelocityGrid& g = cd.grid();
  const double Tc = cd.moments().T;
  const std::size_t N = g.size();
  std::array<Vec, 3> df;
  for (int j = 0; j < 3; ++j) {
    df[std::size_t(j)].resize(N);
    cd.D(j, f, df[std::size_t(j)].data());
  }
  std::array<Vec, 3> s;
  for (int i = 0; i < 3; ++i) {
    s[std::size_t(i)].assign(N, 0.0);
    for (int j = 0; j < 3; ++j) {
      const Vec& sg = sig.c[std::size_t(sym_index(i, j))];
      for (std::size_t a = 0; a < N; ++a)
        s[std::size_t(i)][a] += sg[a] * df[std::size_t(j)][a];
    }
  }
  Vec tmp(N);
  const double c0 = 1.0 / (4.0 * kRGas * kRGas * Tc * Tc);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    double q = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        q += sig.c[std::size_t(sym_index(i, j))][a] * v[std::size_t(i)] *
             v[std::size_t(j)];
    out[a] = c0 * q * f[a];
  }
  for (int i = 0; i < 3; ++i) {
    cd.DT(i, s[std::size_t(i)].data(), tmp.data());
    for (std::size_t a = 0; a < N; ++a) out[a] += tmp[a];
  }
}

void apply_dnorm_gram(const VelocityGrid& g, const SigmaField& sig, double Tc,
                      const double* f, double* out) {
  Moments rest;
  rest.T = Tc;
  apply_dnorm_gram(ConjDeriv(g, rest), sig, f, out);
}

GapResult spectral_gap(const ConvEngine& eng, const GlobalMaxwellianParams& p,
                       int lanczos_steps, unsigned seed) {
  const VelocityGrid& g = eng.grid();
  const std::size_t N = g.size();
  Moments mmu;
  mmu.T = p.Tc;
  FrameOps ops(eng, mmu);
  const SigmaField& sig = ops.sigmaM();

  // Jacobi diagonal for the Gram operator B (same stencil rows as the norm)
  const ConjDeriv& cdn = ops.conj();
  Vec diagB(N, 0.0);
  {
    const int n = g.n;
    const std::size_t stride[3] = {std::size_t(n) * n, std::size_t(n), 1};
    const double c0 = 1.0 / (4.0 * kRGas * kRGas * p.Tc * p.Tc);
    std::size_t a = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k, ++a) {
          const int c[3] = {i, j, k};
          for (int ax = 0; ax < 3; ++ax) {
            const Vec& sg = sig.c[std::size_t(sym_index(ax, ax))];
            const int ci = c[ax];
            for (int r = std::max(0, ci - 3); r <= std::min(n - 1, ci + 3);
                 ++r) {
              const int s0 = cdn.stencil_start(ax, r);
              if (ci < s0 || ci > s0 + 3) continue;
              const double w = cdn.stencil_w(ax, r, ci - s0);
              const std::size_t row = std::size_t(
                  std::ptrdiff_t(a) +
                  std::ptrdiff_t(r - ci) * std::ptrdiff_t(stride[ax]));
              diagB[a] += w * w * sg[row];
            }
          }
          auto v = g.v(a);
          for (int bi = 0; bi < 3; ++bi)
            for (int bj = 0; bj < 3; ++bj)
              diagB[a] += c0 * sig.c[std::size_t(sym_index(bi, bj))][a] *
                          v[std::size_t(bi)] * v[std::size_t(bj)];
          if (diagB[a] < 1e-30) diagB[a] = 1e-30;
        }
  }

  auto applyB = [&](const double* x, double* y) {
    apply_dnorm_gram(cdn, sig, x, y);
  };
  // Shift-inverted block subspace iteration for the pencil L x = lambda B x.
  // A single-vector Krylov method cannot resolve the five-fold degenerate
  // null eigenvalue (one Krylov vector per eigenspace), so we iterate a
  // block of size p on (L + shift*B)^{-1} B with Rayleigh-Ritz extraction.
  const int blk = 8;
  const int max_outer = std::max(8, lanczos_steps / 4);

  // pick the shift relative to the spectral scale of the pencil
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double shift;
  {
    Vec r(N), Lr(N), Br(N);
    for (auto& x : r) x = dist(rng);
    ops.apply_L(r.data(), Lr.data());
    applyB(r.data(), Br.data());
    const double rq = det_dot(r.data(), Lr.data(), N) /
                      std::max(det_dot(r.data(), Br.data(), N), 1e-300);
    shift = std::max(0.05 * std::fabs(rq), 1e-6);
  }
  Vec diagL = ops.diag_L();
  Vec diagShift(N);
  for (std::size_t a = 0; a < N; ++a) {
    diagShift[a] = std::fabs(diagL[a]) + shift * diagB[a];
    if (diagShift[a] < 1e-30) diagShift[a] = 1e-30;
  }
  auto applyShifted = [&](const double* x, double* y) {
    ops.apply_L(x, y);
    static thread_local Vec tmpB;
    tmpB.resize(N);
    applyB(x, tmpB.data());
    for (std::size_t a = 0; a < N; ++a) y[a] += shift * tmpB[a];
  };

  std::vector<Vec> X(static_cast<std::size_t>(blk), Vec(N));
  std::vector<Vec> BX(static_cast<std::size_t>(blk), Vec(N));
  std::vector<Vec> LX(static_cast<std::size_t>(blk), Vec(N));
  for (auto& col : X)
    for (auto& x : col) x = dist(rng);

  std::vector<double> theta(std::size_t(blk), 0.0), theta_prev;
  std::vector<double> Lp, evals, W;
  for (int outer = 0; outer < max_outer; ++outer) {
    // B-orthonormalize the block (modified Gram-Schmidt, two passes)
    for (int i = 0; i < blk; ++i) {
      Vec& xi = X[std::size_t(i)];
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < i; ++j) {
          const double c = det_dot(xi.data(), BX[std::size_t(j)].data(), N);
          const Vec& xj = X[std::size_t(j)];
          for (std::size_t a = 0; a < N; ++a) xi[a] -= c * xj[a];
        }
      applyB(xi.data(), BX[std::size_t(i)].data());
      double nb = det_dot(xi.data(), BX[std::size_t(i)].data(), N);
      if (!(nb > 0)) {
        for (auto& x : xi) x = dist(rng);  // restart a collapsed column
        applyB(xi.data(), BX[std::size_t(i)].data());
        nb = det_dot(xi.data(), BX[std::size_t(i)].data(), N);
      }
      nb = std::sqrt(nb);
      for (std::size_t a = 0; a < N; ++a) {
        xi[a] /= nb;
        BX[std::size_t(i)][a] /= nb;
      }
    }
    // Rayleigh-Ritz on the block: Lp = X^T L X, rotate by its eigenvectors
    for (int j = 0; j < blk; ++j)
      ops.apply_L(X[std::size_t(j)].data(), LX[std::size_t(j)].data());
    Lp.assign(std::size_t(blk) * blk, 0.0);
    for (int i = 0; i < blk; ++i)
      for (int j = i; j < blk; ++j) {
        const double v =
            det_dot(X[std::size_t(i)].data(), LX[std::size_t(j)].data(), N);
        Lp[std::size_t(i) * blk + j] = v;
        Lp[std::size_t(j) * blk + i] = v;
      }
    jacobi_eig(Lp, blk, evals, W);
    std::vector<Vec> Xr(static_cast<std::size_t>(blk), Vec(N, 0.0));
    std::vector<Vec> BXr(static_cast<std::size_t>(blk), Vec(N, 0.0));
    std::vector<Vec> LXr(static_cast<std::size_t>(blk), Vec(N, 0.0));
    for (int r = 0; r < blk; ++r)
      for (int j = 0; j < blk; ++j) {
        const double c = W[std::size_t(j) * blk + r];
        if (c == 0.0) continue;
        const Vec& xj = X[std::size_t(j)];
        const Vec& bxj = BX[std::size_t(j)];
        const Vec& lxj = LX[std::size_t(j)];
        for (std::size_t a = 0; a < N; ++a) {
          Xr[std::size_t(r)][a] += c * xj[a];
          BXr[std::size_t(r)][a] += c * bxj[a];
          LXr[std::size_t(r)][a] += c * lxj[a];
        }
      }
    X.swap(Xr);
    BX.swap(BXr);
    LX.swap(LXr);
    theta_prev = theta;
    theta = evals;

    bool done = outer >= 3;
    if (done)
      for (int j = 0; j < 6 && j < blk; ++j) {
        const double scale = std::max(std::fabs(theta[std::size_t(j)]),
                                      std::fabs(theta[5]) + 1e-12);
        if (std::fabs(theta[std::size_t(j)] - theta_prev[std::size_t(j)]) >
            1e-4 * scale)
          done = false;
      }
    if (std::getenv("KINLIM_GAP_VERBOSE"))
      std::fprintf(stderr, "gap outer=%d shift=%.3e th5=%.9e th0=%.2e\n", outer,
                   shift, theta[5], theta[0]);
    if (done || outer == max_outer - 1) break;

    // adapt the shift toward the current gap estimate so the null block and
    // the first nonzero cluster separate under (L + shift*B)^{-1} B
    if (outer >= 1 && theta[5] > 0.0) {
      const double target = std::max(theta[5] / 3.0, 1e-10);
      if (target < 0.9 * shift || target > 1.1 * shift) {
        shift = target;
        for (std::size_t a = 0; a < N; ++a) {
          diagShift[a] = std::fabs(diagL[a]) + shift * diagB[a];
          if (diagShift[a] < 1e-30) diagShift[a] = 1e-30;
        }
      }
    }

    // advance: X_j <- (L + shift*B)^{-1} B X_j, warm-started at X_j/(theta+shift).
    // Columns whose eigenpair residual is already tiny are locked (left as
    // is); the exact null vectors settle within a few iterations and need
    // no further inner solves.
    Vec resid(N);
    for (int j = 0; j < blk; ++j) {
      const Vec& lx = LX[std::size_t(j)];
      const Vec& bx = BX[std::size_t(j)];
      for (std::size_t a = 0; a < N; ++a)
        resid[a] = lx[a] - theta[std::size_t(j)] * bx[a];
      const double rn = std::sqrt(det_dot(resid.data(), resid.data(), N));
      const double rscale = std::fabs(theta[5]) + shift;
      if (outer >= 1 && rn <= 1e-7 * rscale) continue;

      Vec y = X[std::size_t(j)];
      const double scale = 1.0 / (std::max(theta[std::size_t(j)], 0.0) + shift);
      for (auto& v : y) v *= scale;
      CgResult cg = cg_solve(applyShifted, BX[std::size_t(j)], y, 1e-7, 250,
                             &diagShift);
      if (!cg.converged && cg.residual > 1e-2)
        throw NumericsError("spectral gap: shifted solve stalled");
      if (std::getenv("KINLIM_GAP_VERBOSE"))
        std::fprintf(stderr, "  col=%d cg_iters=%d res=%.2e\n", j,
                     cg.iterations, cg.residual);
      X[std::size_t(j)] = std::move(y);
    }
  }

  GapResult out;
  const int keep = std::min(8, blk);
  out.eigs.assign(theta.begin(), theta.begin() + keep);
  out.delta = theta[5];

  // lowest-5 Ritz vectors -> principal angles against span{chi}
  X.resize(5);
  auto orthonormalize = [&](std::vector<Vec>& S) {
    for (std::size_t i = 0; i < S.size(); ++i) {
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < i; ++j) {
          const double c = det_dot(S[i].data(), S[j].data(), N);
          for (std::size_t a = 0; a < N; ++a) S[i][a] -= c * S[j][a];
        }
      const double nrm = std::sqrt(det_dot(S[i].data(), S[i].data(), N));
      for (std::size_t a = 0; a < N; ++a) S[i][a] /= nrm;
    }
  };
  orthonormalize(X);
  MacroBasis basis(g, mmu);
  std::vector<Vec> Cb;
  for (int a = 0; a < 5; ++a) Cb.push_back(basis.chi(a));
  orthonormalize(Cb);
  std::vector<double> S(25, 0.0);
  for (int i = 0; i < 5 && i < int(X.size()); ++i)
    for (int j = 0; j < 5; ++j)
      S[std::size_t(i) * 5 + j] = det_dot(X[std::size_t(i)].data(),
                                          Cb[std::size_t(j)].data(), N);
  // singular values of S from eigenvalues of S^T S
  std::vector<double> StS(25, 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int r = 0; r < 5; ++r)
        s += S[std::size_t(r) * 5 + i] * S[std::size_t(r) * 5 + j];
      StS[std::size_t(i) * 5 + j] = s;
    }
  std::vector<double> sev, sV;
  jacobi_eig(StS, 5, sev, sV);
  double smin = std::sqrt(std::max(0.0, sev[0]));
  smin = std::min(1.0, smin);
  out.principal_angle = std::acos(smin);
  return out;
}

namespace {

double l2_sq_field(const KineticField& F) {
  Vec sq(F.data.size());
  for (std::size_t a = 0; a < sq.size(); ++a) sq[a] = F.data[a] * F.data[a];
  return det_sum(sq.data(), sq.size()) * F.vg.weight() * F.xg.dx();
}

double l2_sq_xfield(const SpatialGrid& xg, const Vec& f) {
  Vec sq(f.size());
  for (std::size_t a = 0; a < sq.size(); ++a) sq[a] = f[a] * f[a];
  return det_sum(sq.data(), sq.size()) * xg.dx();
}

double dnorm_sq_field(const KineticField& F, const SigmaField& sig, double Tc) {
  double s = 0.0;
  for (std::size_t c = 0; c < F.cells(); ++c)
    s += d_norm_sq(F.vg, sig, Tc, F.cell(c));
  return s * F.xg.dx();
}

KineticField complement_M(const KineticField& f, const std::vector<Moments>& mom) {
  KineticField out(f.xg, f.vg);
  const std::size_t N = f.vg.size();
  for (std::size_t c = 0; c < f.cells(); ++c) {
    MacroBasis b(f.vg, mom[c]);
    Vec pc(N);
    b.project(f.cell(c), pc.data());
    const double* fc = f.cell(c);
    double* oc = out.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] = fc[a] - pc[a];
  }
  return out;
}

KineticField complement_mu(const KineticField& h, double Tc) {
  Moments mmu;
  mmu.T = Tc;
  MacroBasis b(h.vg, mmu);
  KineticField out(h.xg, h.vg);
  const std::size_t N = h.vg.size();
  for (std::size_t c = 0; c < h.cells(); ++c) {
    Vec pc(N);
    b.project(h.cell(c), pc.data());
    const double* hc = h.cell(c);
    double* oc = out.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] = hc[a] - pc[a];
  }
  return out;
}

KineticField dx_field(const KineticField& F) {
  KineticField out(F.xg, F.vg);
  spatial_dx(F.xg, F.vg.size(), F.data.data(), out.data.data());
  return out;
}

}  // namespace

EnergyRow energy_landau(const EnergyInputs& in) {
  EnergyRow row;
  const double eps = in.eps;
  KineticField pf = complement_M(*in.f, *in.mom);
  KineticField ph = complement_mu(*in.h, in.Tc);
  KineticField fi = *in.f, hi = *in.h;
  double ei = 1.0;
  for (int i = 0; i <= 2; ++i) {
    row.E_total += ei * (l2_sq_field(fi) + eps * l2_sq_field(hi));
    row.D_total += (ei / eps) * (dnorm_sq_field(pf, *in.sig_mu, in.Tc) +
                                 eps * dnorm_sq_field(ph, *in.sig_mu, in.Tc));
    if (i < 2) {
      fi = dx_field(fi);
      hi = dx_field(hi);
      pf = dx_field(pf);
      ph = dx_field(ph);
      ei *= eps;
    }
  }
  return row;
}

EnergyRow energy_landau_alt(const EnergyInputs& in) {
  // independent transcription: build all derivative fields first, then sum
  // order-by-order with naive accumulation
  std::vector<KineticField> fs{*in.f}, hs{*in.h},
      pfs{complement_M(*in.f, *in.mom)}, phs{complement_mu(*in.h, in.Tc)};
  for (int i = 1; i <= 2; ++i) {
    fs.push_back(dx_field(fs.back()));
    hs.push_back(dx_field(hs.back()));
    pfs.push_back(dx_field(pfs.back()));
    phs.push_back(dx_field(phs.back()));
  }
  long double E = 0.0L, D = 0.0L;
  for (int i = 0; i <= 2; ++i) {
    const double ei = std::pow(in.eps, i);
    E += ei * l2_sq_field(fs[std::size_t(i)]);
    E += ei * in.eps * l2_sq_field(hs[std::size_t(i)]);
    D += ei / in.eps * dnorm_sq_field(pfs[std::size_t(i)], *in.sig_mu, in.Tc);
    D += ei * dnorm_sq_field(phs[std::size_t(i)], *in.sig_mu, in.Tc);
  }
  EnergyRow row;
  row.E_total = double(E);
  row.D_total = double(D);
  return row;
}

namespace {

KineticField mul_weight(const KineticField& F, const Vec& w) {
  KineticField out(F.xg, F.vg);
  const std::size_t N = F.vg.size();
  for (std::size_t c = 0; c < F.cells(); ++c) {
    const double* fc = F.cell(c);
    double* oc = out.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] = w[a] * fc[a];
  }
  return out;
}

double field_vec_norm_sq(const SpatialGrid& xg, const std::array<Vec, 3>& f,
                         int order) {
  double s = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    Vec cur = f[std::size_t(ax)], nxt(cur.size());
    for (int j = 0; j < order; ++j) {
      spatial_dx_scalar(xg, cur.data(), nxt.data());
      std::swap(cur, nxt);
    }
    s += l2_sq_xfield(xg, cur);
  }
  return s;
}

}  // namespace

EnergyRow energy_vml(const EnergyInputs& in) {
  EnergyRow row;
  const double eps = in.eps;
  const VelocityGrid& vg = in.f->vg;
  const std::size_t N = vg.size();

  KineticField pf = complement_M(*in.f, *in.mom);
  KineticField fi = *in.f, hi = *in.h;
  // cell factor sqrt(4 pi R T(x)) applied to f-norms
  std::vector<double> cellw(in.mom->size());
  for (std::size_t c = 0; c < cellw.size(); ++c)
    cellw[c] = std::sqrt(4.0 * M_PI * kRGas * (*in.mom)[c].T);

  double ei = 1.0;
  for (int i = 0; i <= 2; ++i) {
    Vec w = weight_w(vg, i, in.t, in.ell, in.Tc);
    // weighted f-norm
    double fn = 0.0;
    for (std::size_t c = 0; c < fi.cells(); ++c) {
      Vec sq(N);
      const double* fc = fi.cell(c);
      for (std::size_t a = 0; a < N; ++a) {
        const double x = cellw[c] * fc[a];
        sq[a] = x * x;
      }
      fn += det_sum(sq.data(), N) * vg.weight();
    }
    fn *= fi.xg.dx();
    double field_n = 0.0;
    if (in.ER) field_n += field_vec_norm_sq(fi.xg, *in.ER, i);
    if (in.BR) field_n += field_vec_norm_sq(fi.xg, *in.BR, i);
    KineticField wh = mul_weight(hi, w);
    row.E_total += ei * ((fn + field_n) + std::pow(eps, 4.0 / 3.0) * l2_sq_field(wh));

    KineticField wph = mul_weight(hi, w);  // weighted h for D-terms
    double d_h = dnorm_sq_field(wph, *in.sig_mu, in.Tc);
    // Y-weighted zero-order term with the extra (1+|v|) factor
    Vec wv(N);
    for (std::size_t a = 0; a < N; ++a) {
      auto v = vg.v(a);
      const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      wv[a] = (1.0 + r) * w[a];
    }
    KineticField wvh = mul_weight(hi, wv);
    row.D_total += ei * (dnorm_sq_field(pf, *in.sig_mu, in.Tc) / eps +
                         std::pow(eps, 1.0 / 3.0) * d_h +
                         std::pow(eps, 4.0 / 3.0) * weight_Y(in.t, in.Tc) *
                             l2_sq_field(wvh));
    if (i < 2) {
      fi = dx_field(fi);
      hi = dx_field(hi);
      pf = dx_field(pf);
      ei *= eps;
    }
  }
  return row;
}

EnergyRow energy_vml_alt(const EnergyInputs& in) {
  // independent transcription of the VML functionals
  const double eps = in.eps;
  const VelocityGrid& vg = in.f->vg;
  const std::size_t N = vg.size();
  std::vector<KineticField> fs{*in.f}, hs{*in.h}, pfs{complement_M(*in.f, *in.mom)};
  for (int i = 1; i <= 2; ++i) {
    fs.push_back(dx_field(fs.back()));
    hs.push_back(dx_field(hs.back()));
    pfs.push_back(dx_field(pfs.back()));
  }
  long double E = 0.0L, D = 0.0L;
  const double Y = weight_Y(in.t, in.Tc);
  for (int i = 0; i <= 2; ++i) {
    const double ei = std::pow(eps, i);
    Vec w = weight_w(vg, i, in.t, in.ell, in.Tc);
    const KineticField& fi = fs[std::size_t(i)];
    const KineticField& hi = hs[std::size_t(i)];
    // f with sqrt(4 pi R T) cell weight
    double fn = 0.0;
    for (std::size_t c = 0; c < fi.cells(); ++c) {
      const double cw2 = 4.0 * M_PI * kRGas * (*in.mom)[c].T;
      Vec sq(N);
      const double* fc = fi.cell(c);
      for (std::size_t a = 0; a < N; ++a) sq[a] = cw2 * fc[a] * fc[a];
      fn += det_sum(sq.data(), N) * vg.weight();
    }
    fn *= fi.xg.dx();
    double field_n = 0.0;
    if (in.ER) field_n += field_vec_norm_sq(fi.xg, *in.ER, i);
    if (in.BR) field_n += field_vec_norm_sq(fi.xg, *in.BR, i);
    KineticField wh = mul_weight(hi, w);
    E += ei * (fn + field_n) + ei * std::pow(eps, 4.0 / 3.0) * l2_sq_field(wh);

    D += ei / eps * dnorm_sq_field(pfs[std::size_t(i)], *in.sig_mu, in.Tc);
    D += ei * std::pow(eps, 1.0 / 3.0) * dnorm_sq_field(wh, *in.sig_mu, in.Tc);
    Vec wv(N);
    for (std::size_t a = 0; a < N; ++a) {
      auto v = vg.v(a);
      const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      wv[a] = (1.0 + r) * w[a];
    }
    KineticField wvh = mul_weight(hi, wv);
    D += ei * std::pow(eps, 4.0 / 3.0) * Y * l2_sq_field(wvh);
  }
  EnergyRow row;
  row.E_total = double(E);
  row.D_total = double(D);
  return row;
}

}  // namespace kinlim
