#include "kinlim/remainder.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "kinlim/solver.hpp"
#include "kinlim/xops.hpp"

namespace kinlim {

namespace {

std::mutex err_mutex;  // guards error capture from parallel cell loops

std::array<double, 3> at_cell(const std::array<Vec, 3>& f, std::size_t c) {
  return {f[0][c], f[1][c], f[2][c]};
}

// 4 pi int v F over one cell
std::array<double, 3> current_of(const VelocityGrid& g, const double* F) {
  std::array<double, 3> j{};
  const std::size_t N = g.size();
  Vec integ(N);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t a = 0; a < N; ++a)
      integ[a] = g.v(a)[std::size_t(i)] * F[a];
    j[std::size_t(i)] = 4.0 * M_PI * det_sum(integ.data(), N) * g.weight();
  }
  return j;
}

// shared F_R-frame assembly of the remainder tendency.  Returns the plain
// field d/dt F_R split into the stiff local-Maxwellian bracket
//   bracket0 = eps^{-1}[C(M, F_R) + C(F_R, M)]
// and everything else (`rest`); both frames divide by their own square root.
struct SharedTend {
  KineticField rest, bracket0;
  std::array<Vec, 3> d_ER, d_BR;
};

SharedTend assemble_shared(const ConvEngine& eng, const RemainderState& s,
                           const ExpansionSet& set, const FluidSeries& fluid,
                           const KineticField& FR, bool want_stiff) {
  const SpatialGrid& xg = FR.xg;
  const VelocityGrid& vg = FR.vg;
  const std::size_t C = xg.size();
  const std::size_t N = vg.size();
  const double eps = s.eps;
  const double t = s.time;
  FluidState bg = fluid.eval(t);

  SharedTend out{KineticField(xg, vg), KineticField(xg, vg), {}, {}};

  // -v d_x F_R (spectral, field level)
  KineticField trans = transport_term(FR);
  for (std::size_t a = 0; a < out.rest.data.size(); ++a)
    out.rest.data[a] = -trans.data[a];

  // truncation-error forcing
  KineticField P = truncation_source(eng, set, eps, t);
  for (std::size_t a = 0; a < out.rest.data.size(); ++a)
    out.rest.data[a] += P.data[a];

  KineticField Ftil = set.truncated(eps, t);
  std::array<Vec, 3> Et, Bt;
  if (s.vml) {
    Et = set.truncated_E(eps, t);
    Bt = set.truncated_B(eps, t);
  }
  const double ekm1 = std::pow(eps, set.k - 1);
  const double ek = std::pow(eps, set.k);

  std::string err;
  parallel_for_cells(C, [&](std::size_t c) {
    try {
      Vec M = local_maxwellian(vg, bg.moments(c));
      Vec FRc(FR.cell(c), FR.cell(c) + N);
      // higher-order part of the truncated sum
      Vec Ah(N);
      const double* Fc = Ftil.cell(c);
      for (std::size_t a = 0; a < N; ++a) Ah[a] = Fc[a] - M[a];

      double* rc = out.rest.cell(c);
      {
        Vec b1 = collide(eng, Ah, FRc);
        Vec b2 = collide(eng, FRc, Ah);
        for (std::size_t a = 0; a < N; ++a) rc[a] += (b1[a] + b2[a]) / eps;
      }
      {
        Vec nn = collide(eng, FRc, FRc);
        for (std::size_t a = 0; a < N; ++a) rc[a] += ekm1 * nn[a];
      }
      if (want_stiff) {
        Vec b1 = collide(eng, M, FRc);
        Vec b2 = collide(eng, FRc, M);
        double* sc = out.bracket0.cell(c);
        for (std::size_t a = 0; a < N; ++a) sc[a] = (b1[a] + b2[a]) / eps;
      }
      if (s.vml) {
        std::array<double, 3> Ef, Bf;
        for (int i = 0; i < 3; ++i) {
          Ef[std::size_t(i)] = Et[std::size_t(i)][c] + ek * s.ER[std::size_t(i)][c];
          Bf[std::size_t(i)] = Bt[std::size_t(i)][c] + ek * s.BR[std::size_t(i)][c];
        }
        Vec L1 = lorentz_apply(vg, Ef, Bf, FRc.data());
        Vec L2 = lorentz_apply(vg, at_cell(s.ER, c), at_cell(s.BR, c), Fc);
        for (std::size_t a = 0; a < N; ++a) rc[a] += L1[a] + L2[a];
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(err_mutex);
      err = e.what();
    }
  });
  if (!err.empty()) throw NumericsError(err);

  if (s.vml) {
    std::array<Vec, 3> cB, cE;
    curl_x(xg, s.BR, cB);
    curl_x(xg, s.ER, cE);
    for (int i = 0; i < 3; ++i) {
      out.d_ER[std::size_t(i)].resize(C);
      out.d_BR[std::size_t(i)].resize(C);
    }
    for (std::size_t c = 0; c < C; ++c) {
      auto j = current_of(vg, FR.cell(c));
      for (int i = 0; i < 3; ++i) {
        out.d_ER[std::size_t(i)][c] =
            cB[std::size_t(i)][c] + j[std::size_t(i)];
        out.d_BR[std::size_t(i)][c] = -cE[std::size_t(i)][c];
      }
    }
  }
  return out;
}

KineticField FR_from_f(const KineticField& f, const FluidState& bg) {
  KineticField FR(f.xg, f.vg);
  const std::size_t N = f.vg.size();
  for (std::size_t c = 0; c < f.xg.size(); ++c) {
    Vec sm = sqrt_local_maxwellian(f.vg, bg.moments(c));
    const double* fc = f.cell(c);
    double* oc = FR.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] = sm[a] * fc[a];
  }
  return FR;
}

KineticField FR_from_h(const KineticField& h, const GlobalMaxwellianParams& p) {
  KineticField FR(h.xg, h.vg);
  const std::size_t N = h.vg.size();
  Vec smu = global_maxwellian(h.vg, p);
  for (auto& v : smu) v = std::sqrt(v);
  for (std::size_t c = 0; c < h.xg.size(); ++c) {
    const double* hc = h.cell(c);
    double* oc = FR.cell(c);
    for (std::size_t a = 0; a < N; ++a) oc[a] = smu[a] * hc[a];
  }
  return FR;
}

}  // namespace

RemainderState make_remainder_state(const SpatialGrid& xg,
                                    const VelocityGrid& vg, double eps,
                                    bool vml, double Tc) {
  RemainderState s;
  s.f = KineticField(xg, vg);
  s.h = KineticField(xg, vg);
  for (auto& v : s.ER) v.assign(xg.size(), 0.0);
  for (auto& v : s.BR) v.assign(xg.size(), 0.0);
  s.eps = eps;
  s.vml = vml;
  s.mu.Tc = Tc;
  return s;
}

Vec forcing_multiplier(const VelocityGrid& g, const Moments& m,
                       const Moments& dt_m, const Moments& dx_m) {
  const std::size_t N = g.size();
  const double RT = kRGas * m.T;
  Vec out(N);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    const double vx = v[0];
    const double Drho = dt_m.rho + vx * dx_m.rho;
    const double DT = dt_m.T + vx * dx_m.T;
    double uDu = 0.0, w2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double wi = v[std::size_t(i)] - m.u[std::size_t(i)];
      uDu += wi * (dt_m.u[std::size_t(i)] + vx * dx_m.u[std::size_t(i)]);
      w2 += wi * wi;
    }
    out[a] = 0.5 * (Drho / m.rho - 1.5 * DT / m.T + uDu / RT +
                    w2 * DT / (2.0 * RT * m.T));
  }
  return out;
}

RemTend rhs_f(const ConvEngine& eng, const RemainderState& s,
              const ExpansionSet& set, const FluidSeries& fluid) {
  const std::size_t N = s.f.vg.size();
  FluidState bg = fluid.eval(s.time);
  PrimTend pt = primitive_tendency(bg, SpaceScheme::spectral);
  KineticField FR = FR_from_f(s.f, bg);
  SharedTend sh = assemble_shared(eng, s, set, fluid, FR, true);

  RemTend out{KineticField(s.f.xg, s.f.vg), KineticField(s.f.xg, s.f.vg),
              sh.d_ER, sh.d_BR};
  Moments zero{0.0, {0.0, 0.0, 0.0}, 0.0};
  for (std::size_t c = 0; c < s.f.xg.size(); ++c) {
    Vec sm = sqrt_local_maxwellian(s.f.vg, bg.moments(c));
    Moments dtm{pt.d_rho[c],
                {pt.d_u[0][c], pt.d_u[1][c], pt.d_u[2][c]},
                pt.d_T[c]};
    Vec mult = forcing_multiplier(s.f.vg, bg.moments(c), dtm, zero);
    const double* fc = s.f.cell(c);
    const double* rc = sh.rest.cell(c);
    const double* bc = sh.bracket0.cell(c);
    double* oe = out.expl.cell(c);
    double* os = out.stiff.cell(c);
    for (std::size_t a = 0; a < N; ++a) {
      oe[a] = rc[a] / sm[a] - fc[a] * mult[a];
      os[a] = bc[a] / sm[a];
    }
  }
  return out;
}

RemTend rhs_h(const ConvEngine& eng, const RemainderState& s,
              const ExpansionSet& set, const FluidSeries& fluid) {
  const std::size_t N = s.h.vg.size();
  KineticField FR = FR_from_h(s.h, s.mu);
  SharedTend sh = assemble_shared(eng, s, set, fluid, FR, true);

  Vec smu = global_maxwellian(s.h.vg, s.mu);
  for (auto& v : smu) v = std::sqrt(v);
  RemTend out{KineticField(s.h.xg, s.h.vg), KineticField(s.h.xg, s.h.vg),
              sh.d_ER, sh.d_BR};
  for (std::size_t c = 0; c < s.h.xg.size(); ++c) {
    const double* rc = sh.rest.cell(c);
    const double* bc = sh.bracket0.cell(c);
    double* oe = out.expl.cell(c);
    double* os = out.stiff.cell(c);
    for (std::size_t a = 0; a < N; ++a) {
      oe[a] = rc[a] / smu[a];
      os[a] = bc[a] / smu[a];
    }
  }
  return out;
}

RemainderState step_imex(const ConvEngine& eng, const RemainderState& s,
                         const ExpansionSet& set, const FluidSeries& fluid,
                         double dt, int* resync_events) {
  const std::size_t C = s.f.xg.size();
  const std::size_t N = s.f.vg.size();
  FluidState bg = fluid.eval(s.time);
  PrimTend pt = primitive_tendency(bg, SpaceScheme::spectral);
  KineticField FR = FR_from_f(s.f, bg);
  SharedTend sh = assemble_shared(eng, s, set, fluid, FR, false);

  // frame-consistency audit on the incoming state
  if (resync_events) {
    double d2 = 0.0, n2 = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      Vec hc = f_to_h(s.f.vg, Vec(s.f.cell(c), s.f.cell(c) + N),
                      bg.moments(c), s.mu);
      const double* hs = s.h.cell(c);
      for (std::size_t a = 0; a < N; ++a) {
        const double d = hs[a] - hc[a];
        d2 += d * d;
        n2 += hc[a] * hc[a];
      }
    }
    if (n2 > 0 && std::sqrt(d2 / n2) > 1e-8) ++(*resync_events);
  }

  RemainderState out = s;
  out.time = s.time + dt;
  FluidState bg1 = fluid.eval(out.time);

  Moments zero{0.0, {0.0, 0.0, 0.0}, 0.0};
  std::string err;
  parallel_for_cells(C, [&](std::size_t c) {
    try {
      Vec sm = sqrt_local_maxwellian(s.f.vg, bg.moments(c));
      Moments dtm{pt.d_rho[c],
                  {pt.d_u[0][c], pt.d_u[1][c], pt.d_u[2][c]},
                  pt.d_T[c]};
      Vec mult = forcing_multiplier(s.f.vg, bg.moments(c), dtm, zero);
      const double* fc = s.f.cell(c);
      const double* rc = sh.rest.cell(c);
      Vec fstar(N);
      for (std::size_t a = 0; a < N; ++a)
        fstar[a] = fc[a] + dt * (rc[a] / sm[a] - fc[a] * mult[a]);

      FrameOps ops(eng, bg1.moments(c));
      const double lam = dt / s.eps;
      auto apply = [&](const double* x, double* y) {
        ops.apply_L(x, y);
        for (std::size_t a = 0; a < N; ++a) y[a] = x[a] + lam * y[a];
      };
      Vec diag = ops.diag_L();
      for (auto& d : diag) d = 1.0 + lam * d;
      Vec x(N, 0.0);
      CgResult res = cg_solve(apply, fstar, x, 1e-10, 2000, &diag);
      if (!res.converged)
        throw NumericsError("implicit collision solve did not converge");
      double* fo = out.f.cell(c);
      for (std::size_t a = 0; a < N; ++a) fo[a] = x[a];
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(err_mutex);
      err = e.what();
    }
  });
  if (!err.empty()) throw NumericsError(err);

  if (s.vml) {
    // staggered Maxwell update with the post-solve current
    const SpatialGrid& xg = s.f.xg;
    KineticField FRn = FR_from_f(out.f, bg1);
    std::array<Vec, 3> cB, cE;
    curl_x(xg, s.BR, cB);
    for (std::size_t c = 0; c < C; ++c) {
      auto j = current_of(s.f.vg, FRn.cell(c));
      for (int i = 0; i < 3; ++i)
        out.ER[std::size_t(i)][c] =
            s.ER[std::size_t(i)][c] +
            dt * (cB[std::size_t(i)][c] + j[std::size_t(i)]);
    }
    curl_x(xg, out.ER, cE);
    for (std::size_t c = 0; c < C; ++c)
      for (int i = 0; i < 3; ++i)
        out.BR[std::size_t(i)][c] =
            s.BR[std::size_t(i)][c] - dt * cE[std::size_t(i)][c];
  }

  // h is derived from the frame of record
  for (std::size_t c = 0; c < C; ++c) {
    Vec hc = f_to_h(s.f.vg, Vec(out.f.cell(c), out.f.cell(c) + N),
                    bg1.moments(c), s.mu);
    double* ho = out.h.cell(c);
    for (std::size_t a = 0; a < N; ++a) ho[a] = hc[a];
  }
  return out;
}

FullState step_full(const ConvEngine& eng, const FullState& s, double eps,
                    double dt) {
  const SpatialGrid& xg = s.F.xg;
  const VelocityGrid& vg = s.F.vg;
  const std::size_t C = xg.size();
  const std::size_t N = vg.size();

  auto rhs = [&](const FullState& st, FullState& d) {
    KineticField trans = transport_term(st.F);
    d.F = KineticField(xg, vg);
    for (std::size_t a = 0; a < d.F.data.size(); ++a)
      d.F.data[a] = -trans.data[a];
    if (s.vml) {
      for (std::size_t c = 0; c < C; ++c) {
        Vec L = lorentz_apply(vg, at_cell(st.E, c), at_cell(st.B, c),
                              st.F.cell(c));
        double* dc = d.F.cell(c);
        for (std::size_t a = 0; a < N; ++a) dc[a] += L[a];
      }
      std::array<Vec, 3> cB, cE;
      curl_x(xg, st.B, cB);
      curl_x(xg, st.E, cE);
      for (int i = 0; i < 3; ++i) {
        d.E[std::size_t(i)].resize(C);
        d.B[std::size_t(i)].resize(C);
      }
      for (std::size_t c = 0; c < C; ++c) {
        auto j = current_of(vg, st.F.cell(c));
        for (int i = 0; i < 3; ++i) {
          d.E[std::size_t(i)][c] = cB[std::size_t(i)][c] + j[std::size_t(i)];
          d.B[std::size_t(i)][c] = -cE[std::size_t(i)][c];
        }
      }
    }
  };
  auto axpy = [&](const FullState& a, double wa, const FullState& b, double wb,
                  const FullState& db, double wd) {
    FullState r = a;
    for (std::size_t i = 0; i < r.F.data.size(); ++i)
      r.F.data[i] = wa * a.F.data[i] + wb * b.F.data[i] + wd * db.F.data[i];
    if (s.vml)
      for (int k = 0; k < 3; ++k)
        for (std::size_t c = 0; c < C; ++c) {
          r.E[std::size_t(k)][c] = wa * a.E[std::size_t(k)][c] +
                                   wb * b.E[std::size_t(k)][c] +
                                   wd * db.E[std::size_t(k)][c];
          r.B[std::size_t(k)][c] = wa * a.B[std::size_t(k)][c] +
                                   wb * b.B[std::size_t(k)][c] +
                                   wd * db.B[std::size_t(k)][c];
        }
    return r;
  };

  // SSP-RK3 transport (+ fields)
  FullState d0;
  d0.vml = s.vml;
  rhs(s, d0);
  FullState s1 = axpy(s, 1.0, s, 0.0, d0, dt);
  FullState d1;
  d1.vml = s.vml;
  rhs(s1, d1);
  FullState s2 = axpy(s, 0.75, s1, 0.25, d1, 0.25 * dt);
  FullState d2;
  d2.vml = s.vml;
  rhs(s2, d2);
  FullState out = axpy(s, 1.0 / 3.0, s2, 2.0 / 3.0, d2, 2.0 / 3.0 * dt);
  out.time = s.time + dt;
  out.vml = s.vml;

  // backward-Euler collision substep in the local-Maxwellian frame
  std::string err;
  parallel_for_cells(C, [&](std::size_t c) {
    try {
      double* Fc = out.F.cell(c);
      Moments m = moments_of(vg, Fc);
      Vec M = local_maxwellian(vg, m);
      Vec sm = sqrt_local_maxwellian(vg, m);
      Vec g(N);
      for (std::size_t a = 0; a < N; ++a) g[a] = (Fc[a] - M[a]) / sm[a];
      FrameOps ops(eng, m);
      const double lam = dt / eps;
      Vec b = ops.gamma(g, g);
      for (std::size_t a = 0; a < N; ++a) b[a] = g[a] + lam * b[a];
      auto apply = [&](const double* x, double* y) {
        ops.apply_L(x, y);
        for (std::size_t a = 0; a < N; ++a) y[a] = x[a] + lam * y[a];
      };
      Vec diag = ops.diag_L();
      for (auto& d : diag) d = 1.0 + lam * d;
      Vec x(N, 0.0);
      CgResult res = cg_solve(apply, b, x, 1e-10, 2000, &diag);
      if (!res.converged)
        throw NumericsError("collision substep solve did not converge");
      for (std::size_t a = 0; a < N; ++a) Fc[a] = M[a] + sm[a] * x[a];
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(err_mutex);
      err = e.what();
    }
  });
  if (!err.empty()) throw NumericsError(err);
  return out;
}

FullState reconstruct_full(const ExpansionSet& set, const RemainderState& s) {
  FullState out;
  out.vml = s.vml;
  out.time = s.time;
  out.F = set.truncated(s.eps, s.time);
  const double ek = std::pow(s.eps, set.k);
  KineticField FR = FR_from_h(s.h, s.mu);
  for (std::size_t a = 0; a < out.F.data.size(); ++a)
    out.F.data[a] += ek * FR.data[a];
  if (s.vml) {
    out.E = set.truncated_E(s.eps, s.time);
    out.B = set.truncated_B(s.eps, s.time);
    for (int i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < out.E[std::size_t(i)].size(); ++c) {
        out.E[std::size_t(i)][c] += ek * s.ER[std::size_t(i)][c];
        out.B[std::size_t(i)][c] += ek * s.BR[std::size_t(i)][c];
      }
  } else {
    for (int i = 0; i < 3; ++i) {
      out.E[std::size_t(i)].assign(s.f.xg.size(), 0.0);
      out.B[std::size_t(i)].assign(s.f.xg.size(), 0.0);
    }
  }
  return out;
}

double remainder_gauss_residual(const RemainderState& s) {
  const SpatialGrid& xg = s.h.xg;
  const VelocityGrid& vg = s.h.vg;
  const std::size_t C = xg.size();
  Vec smu = global_maxwellian(vg, s.mu);
  for (auto& v : smu) v = std::sqrt(v);
  Vec m0(C), dE(C);
  Vec integ(vg.size());
  for (std::size_t c = 0; c < C; ++c) {
    const double* hc = s.h.cell(c);
    for (std::size_t a = 0; a < vg.size(); ++a) integ[a] = smu[a] * hc[a];
    m0[c] = det_sum(integ.data(), vg.size()) * vg.weight();
  }
  spatial_dx_scalar(xg, s.ER[0].data(), dE.data());
  double worst = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    worst = std::max(worst, std::fabs(dE[c] + 4.0 * M_PI * m0[c]));
  return worst;
}

double remainder_divB_residual(const RemainderState& s) {
  const SpatialGrid& xg = s.h.xg;
  Vec dB(xg.size());
  spatial_dx_scalar(xg, s.BR[0].data(), dB.data());
  double worst = 0.0;
  for (double v : dB) worst = std::max(worst, std::fabs(v));
  return worst;
}

void write_checkpoint(const std::string& path, const RemainderState& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open checkpoint file: " + path);
  out.precision(17);
  out << "kinlim-checkpoint 1\n";
  out << s.f.xg.n << " " << s.f.xg.length << " " << s.f.vg.n << " "
      << s.f.vg.vmax << "\n";
  out << s.eps << " " << s.time << " " << (s.vml ? 1 : 0) << " " << s.mu.Tc
      << "\n";
  auto dump = [&](const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      out << v[i] << (i + 1 == v.size() ? '\n' : ' ');
  };
  dump(s.f.data);
  dump(s.h.data);
  for (int i = 0; i < 3; ++i) dump(s.ER[std::size_t(i)]);
  for (int i = 0; i < 3; ++i) dump(s.BR[std::size_t(i)]);
}

RemainderState read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "kinlim-checkpoint" || version != 1)
    throw ConfigError("unrecognized checkpoint format: " + path);
  int nx = 0, nv = 0, vml = 0;
  double length = 0, vmax = 0, eps = 0, time = 0, Tc = 0;
  in >> nx >> length >> nv >> vmax >> eps >> time >> vml >> Tc;
  SpatialGrid xg(nx, length);
  VelocityGrid vg(nv, vmax);
  RemainderState s = make_remainder_state(xg, vg, eps, vml != 0, Tc);
  s.time = time;
  auto load = [&](Vec& v) {
    for (auto& x : v)
      if (!(in >> x)) throw ConfigError("truncated checkpoint: " + path);
  };
  load(s.f.data);
  load(s.h.data);
  for (int i = 0; i < 3; ++i) load(s.ER[std::size_t(i)]);
  for (int i = 0; i < 3; ++i) load(s.BR[std::size_t(i)]);
  return s;
}

}  // namespace kinlim
