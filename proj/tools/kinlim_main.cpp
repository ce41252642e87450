// kinlim: kinetic hydrodynamic-limit verification suite.
// Subcommands: selftest, sweep, report, operators-dump.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "kinlim/reference.hpp"
#include "kinlim/sweep.hpp"

using namespace kinlim;

namespace {

struct SelftestReport {
  int failures = 0;
  void check(const std::string& name, const std::string& tag, double residual,
             double tol) {
    const bool ok = residual <= tol;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << " [" << tag
              << "] residual=" << std::scientific << std::setprecision(3)
              << residual << " tol=" << tol << "\n";
  }
  void check_bool(const std::string& name, const std::string& tag, bool ok,
                  const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << " [" << tag << "] "
              << detail << "\n";
  }
};

Vec random_smooth_density(const VelocityGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Moments m;
  m.rho = 1.0 + 0.2 * U(rng);
  for (int i = 0; i < 3; ++i) m.u[std::size_t(i)] = 0.3 * U(rng);
  m.T = 1.0 + 0.2 * U(rng);
  Vec F = local_maxwellian(g, m);
  const double w0 = U(rng), w1 = U(rng), w2 = U(rng), amp = 0.1 * U(rng);
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    F[a] *= 1.0 + amp * std::cos(w0 * v[0] + w1 * v[1] + w2 * v[2]);
  }
  return F;
}

// | int psi C | relative to int (1+|v|^2) |C|
double conservation_residual(const VelocityGrid& g, const Vec& C) {
  const std::size_t N = g.size();
  double denom = 0.0;
  std::array<double, 5> mom{};
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    denom += (1.0 + v2) * std::fabs(C[a]);
    mom[0] += C[a];
    for (int i = 0; i < 3; ++i) mom[std::size_t(1 + i)] += v[std::size_t(i)] * C[a];
    mom[4] += v2 * C[a];
  }
  double worst = 0.0;
  for (double m : mom) worst = std::max(worst, std::fabs(m));
  return denom > 0 ? worst / denom : worst;
}

double rel_diff(const Vec& a, const Vec& b) {
  double d2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
    n2 += b[i] * b[i];
  }
  return n2 > 0 ? std::sqrt(d2 / n2) : std::sqrt(d2);
}

int cmd_selftest(int n_v, unsigned long seed) {
  SelftestReport rep;
  VelocityGrid g(n_v, 6.0);
  ConvEngine eng(g);
  std::mt19937_64 rng(seed);

  // conservation of the bilinear operator on random smooth densities
  {
    double worst = 0.0;
    for (int r = 0; r < 5; ++r) {
      Vec F = random_smooth_density(g, rng);
      Vec C = collide(eng, F, F);
      worst = std::max(worst, conservation_residual(g, C));
    }
    rep.check("collision-conservation", "mass-momentum-energy-moments", worst,
              1e-8);
  }
  // near-equilibrium: C(M,M) small relative to M
  {
    Moments m;
    Vec M = local_maxwellian(g, m);
    Vec C = collide(eng, M, M);
    double nc = 0.0, nm = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      nc += C[a] * C[a];
      nm += M[a] * M[a];
    }
    rep.check("maxwellian-equilibrium", "collision-annihilates-equilibrium",
              std::sqrt(nc / nm), 2e-2);
  }
  // route equivalence of the linearized operator
  {
    Moments m{1.05, {0.1, -0.05, 0.02}, 1.1};
    FrameOps ops(eng, m);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int r = 0; r < 3; ++r) {
      Vec f(g.size());
      for (std::size_t a = 0; a < g.size(); ++a) {
        auto v = g.v(a);
        const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        f[a] = U(rng) * std::exp(-0.25 * v2);
      }
      Vec l1 = ops.apply_L(f);
      Vec l2 = ops.apply_L_direct(f);
      Vec l3 = ops.apply_L_explicit(f);
      worst = std::max(worst, rel_diff(l2, l1));
      worst = std::max(worst, rel_diff(l3, l1));
    }
    rep.check("linearized-route-equivalence", "production-direct-explicit",
              worst, 1e-8);
  }
  // exact null space of L
  {
    Moments m{1.0, {0.05, 0.0, -0.02}, 0.95};
    FrameOps ops(eng, m);
    MacroBasis basis(g, m);
    double worst = 0.0, scale = 0.0;
    {
      Vec probe(g.size(), 1.0);
      Vec lp = ops.apply_L(probe);
      for (double v : lp) scale = std::max(scale, std::fabs(v));
    }
    for (int q = 0; q < 5; ++q) {
      Vec lc = ops.apply_L(basis.chi(q));
      for (double v : lc) worst = std::max(worst, std::fabs(v));
    }
    rep.check("null-space", "collision-invariants-annihilated",
              worst / std::max(scale, 1e-30), 1e-10);
  }
  // negative control: corrupted kernel must break conservation
  {
    ConvEngine bad(g);
    bad.corrupt_kernel_sign();
    Vec F = random_smooth_density(g, rng);
    Vec C = collide(bad, F, F);
    const double res = conservation_residual(g, C);
    rep.check_bool("corrupted-kernel-detected", "negative-control",
                   res > 1e-8,
                   "conservation residual under corruption = " +
                       std::to_string(res));
  }
  // coercivity structure (coarse): 5 near-null modes, positive gap
  {
    GlobalMaxwellianParams p{0.9};
    GapResult gr = spectral_gap(eng, p, 80, unsigned(seed));
    int near_null = 0;
    for (double e : gr.eigs)
      if (std::fabs(e) <= 1e-4 * std::max(gr.delta, 1e-300)) ++near_null;
    rep.check_bool("spectral-gap", "coercivity-lower-bound",
                   near_null == 5 && gr.delta > 0 &&
                       gr.principal_angle < 1e-4,
                   "near_null=" + std::to_string(near_null) +
                       " delta=" + std::to_string(gr.delta) +
                       " angle=" + std::to_string(gr.principal_angle));
  }

  std::cout << (rep.failures == 0 ? "selftest: all properties pass\n"
                                  : "selftest: FAILURES present\n");
  return rep.failures == 0 ? 0 : 1;
}

int cmd_operators_dump(int n_v, double v_max, double t_c,
                       const std::string& out_path) {
  VelocityGrid g(n_v, v_max);
  ConvEngine eng(g);
  SigmaField sig = eng.sigma(global_maxwellian(g, {t_c}));
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open " << out_path << "\n";
    return 2;
  }
  out << std::setprecision(17);
  out << "# sigma_mu convolution tables, t_c=" << t_c << " n_v=" << n_v
      << " v_max=" << v_max << "\n";
  out << "vx,vy,vz,s00,s11,s22,s01,s02,s12\n";
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto v = g.v(a);
    out << v[0] << "," << v[1] << "," << v[2];
    for (int q = 0; q < 6; ++q) out << "," << sig.c[std::size_t(q)][a];
    out << "\n";
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic hydrodynamic-limit verification suite"};
  app.require_subcommand(1);

  auto* st = app.add_subcommand("selftest",
                                "run the operator property suites");
  int st_nv = 16;
  unsigned long st_seed = 12345;
  st->add_option("--n-v", st_nv, "velocity points per axis");
  st->add_option("--seed", st_seed, "random seed");

  auto* sw = app.add_subcommand("sweep", "run a Knudsen-number sweep");
  std::string sw_config;
  bool sw_keys = false;
  sw->add_option("--config", sw_config, "configuration file");
  sw->add_flag("--keys", sw_keys, "print the config key reference and exit");

  auto* rp = app.add_subcommand("report", "consolidate sweep outputs");
  std::string rp_dir;
  rp->add_option("--dir", rp_dir, "sweep output directory")->required();

  auto* od = app.add_subcommand("operators-dump",
                                "write sigma_mu tables for inspection");
  int od_nv = 16;
  double od_vmax = 6.0, od_tc = 0.9;
  std::string od_out = "sigma_mu.csv";
  od->add_option("--n-v", od_nv, "velocity points per axis");
  od->add_option("--v-max", od_vmax, "velocity cube half-width");
  od->add_option("--t-c", od_tc, "reference temperature");
  od->add_option("--out", od_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (st->parsed()) return cmd_selftest(st_nv, st_seed);
    if (sw->parsed()) {
      if (sw_keys) {
        std::cout << config_reference();
        return 0;
      }
      if (sw_config.empty()) {
        std::cerr << "sweep: --config is required (or --keys)\n";
        return 2;
      }
      RunConfig cfg = parse_config_file(sw_config);
      SweepSummary sum = run_sweep(cfg, &std::cout);
      std::cout << "sweep complete: " << sum.runs.size()
                << " runs written to " << cfg.outdir << "\n";
      if (sum.runs.size() >= 2)
        std::cout << "H2 slope=" << sum.h2_slope
                  << " residual slope=" << sum.residual_slope
                  << " C spread=" << sum.C_spread << "\n";
      return 0;
    }
    if (rp->parsed()) {
      std::cout << make_report(rp_dir);
      return 0;
    }
    if (od->parsed()) return cmd_operators_dump(od_nv, od_vmax, od_tc, od_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
