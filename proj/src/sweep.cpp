#include "kinlim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace kinlim {

namespace {

constexpr const char* kCsvHeader =
    "time[t],eps[knudsen],E_total[energy-functional],"
    "D_total[dissipation-functional],h2_metric[h2-distance-to-local-maxwellian],"
    "gauss_drift[gauss-constraint],divB_drift[divB-constraint],"
    "min_F[positivity-monitor],max_F[positivity-scale]";

// amplitude of the (purely macroscopic, zero-mass) initial remainder mode
constexpr double kRemInitAmp = 1e-3;

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

double rel_l2_diff(const Vec& a, const Vec& b) {
  double d2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
    n2 += b[i] * b[i];
  }
  return n2 > 0 ? std::sqrt(d2 / n2) : std::sqrt(d2);
}

struct CsvFile {
  std::string path;
  std::string branch;
  int k = 0;
  double eps = 0.0;
  std::map<std::string, double> results;  // second meta line
  std::vector<std::array<double, 9>> rows;
};

std::map<std::string, std::string> parse_meta(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos)
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep CSV: " + path);
  CsvFile f;
  f.path = path;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# kinlim-sweep", 0) != 0)
    throw ConfigError(path + ": missing sweep metadata line");
  auto meta = parse_meta(line);
  if (!meta.count("branch") || !meta.count("k") || !meta.count("eps"))
    throw ConfigError(path + ": metadata line lacks branch/k/eps");
  f.branch = meta["branch"];
  f.k = std::stoi(meta["k"]);
  f.eps = std::stod(meta["eps"]);
  if (!std::getline(in, line) || line.rfind("# results", 0) != 0)
    throw ConfigError(path + ": missing results metadata line");
  for (const auto& [key, val] : parse_meta(line))
    f.results[key] = std::stod(val);
  if (!std::getline(in, line))
    throw ConfigError(path + ": missing header row");
  {
    // column-by-column schema check
    std::istringstream have(line), want(kCsvHeader);
    std::string hc, wc;
    while (std::getline(want, wc, ',')) {
      if (!std::getline(have, hc, ',') || hc != wc)
        throw ConfigError(path + ": schema error in column '" + wc +
                          "' (found '" + hc + "')");
    }
  }
  int lineno = 3;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 9> row{};
    std::istringstream ss(line);
    std::string cell;
    for (int i = 0; i < 9; ++i) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError(path + ": truncated row at line " +
                          std::to_string(lineno));
      try {
        row[std::size_t(i)] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ": bad value '" + cell + "' at line " +
                          std::to_string(lineno));
      }
    }
    f.rows.push_back(row);
  }
  if (f.rows.empty()) throw ConfigError(path + ": no data rows");
  return f;
}

struct Derived {
  double E0 = 0.0, lhs_max = 0.0, C = 0.0;
  double h2_sup = 0.0, gauss = 0.0, divB = 0.0;
  double min_ratio = 0.0;  // min over rows of min_F / max_F
};

Derived derive(const CsvFile& f) {
  Derived d;
  d.E0 = f.rows.front()[2];
  double intD = 0.0;
  d.min_ratio = 0.0;
  for (std::size_t i = 0; i < f.rows.size(); ++i) {
    const auto& r = f.rows[i];
    if (i > 0) {
      const auto& p = f.rows[i - 1];
      intD += 0.5 * (p[3] + r[3]) * (r[0] - p[0]);
    }
    d.lhs_max = std::max(d.lhs_max, r[2] + intD);
    d.h2_sup = std::max(d.h2_sup, r[4]);
    d.gauss = std::max(d.gauss, std::fabs(r[5]));
    d.divB = std::max(d.divB, std::fabs(r[6]));
    if (r[8] > 0) d.min_ratio = std::min(d.min_ratio, r[7] / r[8]);
  }
  d.C = d.lhs_max / (d.E0 + std::pow(f.eps, 2 * f.k + 3));
  return d;
}

}  // namespace

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0)
      throw NumericsError("slope fit requires positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FluidSeries build_background(const RunConfig& cfg) {
  SpatialGrid xg(cfg.n_x, cfg.length);
  const bool vml = cfg.branch == "vml";
  FluidState s0(xg, vml);
  s0.maxwell = vml;
  const double a = cfg.amplitude;
  for (int i = 0; i < cfg.n_x; ++i) {
    const double th = 2.0 * M_PI * xg.x(i) / cfg.length;
    const std::size_t c = std::size_t(i);
    s0.rho[c] = 1.0 + a * std::sin(th);
    s0.u[0][c] = a * std::sin(th);
    if (vml) {
      s0.u[1][c] = 0.5 * a * std::sin(th);
      s0.T[c] = std::pow(s0.rho[c], 2.0 / 3.0);
      // Gauss-consistent electric field: d_x E_x = 4 pi (1 - rho)
      s0.E[0][c] = 2.0 * a * cfg.length * std::cos(th);
    } else {
      s0.T[c] = 1.0 + 0.5 * a * std::sin(th);
    }
  }
  const int n_steps = std::max(1, int(std::llround(cfg.t_end / cfg.fluid_dt)));
  auto snaps = advance_fluid(s0, cfg.fluid_dt, n_steps,
                             SpaceScheme::spectral, cfg.snap_every);
  if (snaps.size() < 5)
    throw ConfigError(
        "background trajectory too coarse: need >= 5 snapshots "
        "(t_end / (fluid_dt * snap_every) >= 4)");
  return make_series(std::move(snaps));
}

SweepSummary run_sweep(const RunConfig& cfg, std::ostream* log) {
  validate_config(cfg);
  const bool vml = cfg.branch == "vml";
  std::filesystem::create_directories(cfg.outdir);

  VelocityGrid vg(cfg.n_v, cfg.v_max);
  ConvEngine eng(vg);
  GlobalMaxwellianParams mu{cfg.t_c};
  SigmaField sig_mu = eng.sigma(global_maxwellian(vg, mu));

  if (log) *log << "building fluid background...\n";
  FluidSeries fluid = build_background(cfg);
  if (log) *log << "building expansion coefficients (k=" << cfg.k << ")...\n";
  ExpansionSet set = build_coefficients(eng, fluid, cfg.k, vml);

  SweepSummary sum;
  sum.cfg = cfg;

  for (double eps : cfg.eps) {
    const double t_e =
        vml ? std::min(cfg.t_end, std::pow(eps, -1.0 / 3.0)) : cfg.t_end;
    const int n_steps = std::max(1, int(std::llround(t_e / cfg.dt)));
    if (log)
      *log << "eps=" << eps << ": " << n_steps << " steps to t=" << t_e
           << "\n";

    EpsRunResult res;
    res.eps = eps;

    // zero-mass, purely macroscopic initial remainder (temperature mode)
    RemainderState rem = make_remainder_state(fluid.snaps[0].xg, vg, eps, vml,
                                              cfg.t_c);
    {
      const SpatialGrid& xg = rem.f.xg;
      auto mom0 = fluid.moments_at(fluid.t0);
      for (std::size_t c = 0; c < xg.size(); ++c) {
        const double th = 2.0 * M_PI * xg.x(int(c)) / cfg.length;
        MacroBasis basis(vg, mom0[c]);
        Vec mode = basis.from_hydro({0.0, {0.0, 0.0, 0.0}, 1.0});
        double* fc = rem.f.cell(c);
        for (std::size_t a = 0; a < vg.size(); ++a)
          fc[a] = kRemInitAmp * std::sin(th) * mode[a];
        Vec hc = f_to_h(vg, Vec(fc, fc + vg.size()), mom0[c], mu);
        double* hp = rem.h.cell(c);
        for (std::size_t a = 0; a < vg.size(); ++a) hp[a] = hc[a];
      }
      rem.time = fluid.t0;
    }
    FullState full = reconstruct_full(set, rem);

    std::ostringstream name;
    name << "run_eps" << eps << ".csv";
    res.csv_path = (std::filesystem::path(cfg.outdir) / name.str()).string();
    std::ostringstream body;

    auto mom_at = [&](double t) { return fluid.moments_at(t); };
    auto record = [&](double& D_prev, double& intD, bool first) {
      auto mom = mom_at(rem.time);
      EnergyInputs in;
      in.f = &rem.f;
      in.h = &rem.h;
      in.mom = &mom;
      in.sig_mu = &sig_mu;
      in.Tc = cfg.t_c;
      in.eps = eps;
      in.k = cfg.k;
      in.t = rem.time - fluid.t0;
      in.ell = cfg.ell;
      in.ER = &rem.ER;
      in.BR = &rem.BR;
      EnergyRow er = vml ? energy_vml(in) : energy_landau(in);
      if (first) {
        res.E0 = er.E_total;
        D_prev = er.D_total;
      } else {
        intD += 0.5 * (D_prev + er.D_total) * cfg.dt;
        D_prev = er.D_total;
      }
      const double lhs = er.E_total + intD;
      res.C_fit = std::max(
          res.C_fit, lhs / (res.E0 + std::pow(eps, 2 * cfg.k + 3)));
      const double h2 = convergence_metric(full.F, mom);
      res.h2_sup = std::max(res.h2_sup, h2);
      double mn = full.F.data[0], mx = full.F.data[0];
      for (double v : full.F.data) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      if (first || mn < res.min_F) res.min_F = mn;
      if (first || mx > res.max_F) res.max_F = mx;
      const double ga = vml ? remainder_gauss_residual(rem) : 0.0;
      const double db = vml ? remainder_divB_residual(rem) : 0.0;
      res.gauss_drift = std::max(res.gauss_drift, ga);
      res.divB_drift = std::max(res.divB_drift, db);
      body << fmt(rem.time) << "," << fmt(eps) << "," << fmt(er.E_total)
           << "," << fmt(er.D_total) << "," << fmt(h2) << "," << fmt(ga)
           << "," << fmt(db) << "," << fmt(mn) << "," << fmt(mx) << "\n";
    };

    double D_prev = 0.0, intD = 0.0;
    record(D_prev, intD, true);
    for (int s = 1; s <= n_steps; ++s) {
      rem = step_imex(eng, rem, set, fluid, cfg.dt);
      full = step_full(eng, full, eps, cfg.dt);
      record(D_prev, intD, false);
      if (s % 10 == 0 || s == n_steps) {
        FullState recon = reconstruct_full(set, rem);
        res.two_route_diff = std::max(
            res.two_route_diff, rel_l2_diff(full.F.data, recon.F.data));
      }
    }

    ResidualResult rr = expansion_residual(eng, set, eps,
                                           fluid.t0 + 0.5 * t_e);
    res.residual = rr.value;
    res.residual_route_diff = rr.route_diff;

    std::ofstream out(res.csv_path);
    if (!out) throw ConfigError("cannot write " + res.csv_path);
    out << "# kinlim-sweep v1 branch=" << cfg.branch << " k=" << cfg.k
        << " ell=" << cfg.ell << " t_c=" << fmt(cfg.t_c)
        << " seed=" << cfg.seed << " threads=" << cfg.threads
        << " eps=" << fmt(eps) << "\n";
    out << "# results residual=" << fmt(res.residual)
        << " residual_route_diff=" << fmt(res.residual_route_diff)
        << " two_route_diff=" << fmt(res.two_route_diff) << "\n";
    out << kCsvHeader << "\n" << body.str();
    out.close();
    sum.runs.push_back(res);
  }

  // cross-eps fits
  if (sum.runs.size() >= 2) {
    std::vector<double> xs, h2s, rs;
    for (const auto& r : sum.runs) {
      xs.push_back(r.eps);
      h2s.push_back(r.h2_sup);
      rs.push_back(r.residual);
    }
    sum.h2_slope = fit_loglog_slope(xs, h2s);
    sum.residual_slope = fit_loglog_slope(xs, rs);
    double cmin = sum.runs[0].C_fit, cmax = sum.runs[0].C_fit;
    for (const auto& r : sum.runs) {
      cmin = std::min(cmin, r.C_fit);
      cmax = std::max(cmax, r.C_fit);
    }
    sum.C_spread = cmin > 0 ? cmax / cmin : 0.0;
  }

  // metric-vs-eps table + plot script
  {
    std::ofstream mt(std::filesystem::path(cfg.outdir) / "metric_vs_eps.csv");
    mt << "eps[knudsen],h2_sup[h2-distance-to-local-maxwellian],"
          "residual[truncation-residual]\n";
    for (const auto& r : sum.runs)
      mt << fmt(r.eps) << "," << fmt(r.h2_sup) << "," << fmt(r.residual)
         << "\n";
  }
  {
    std::ofstream gp(std::filesystem::path(cfg.outdir) / "plot.gp");
    gp << "# gnuplot script over the sweep CSVs\n"
          "set datafile separator ','\n"
          "set terminal dumb size 100,30\n"
          "set logscale xy\n"
          "set xlabel 'eps'\n"
          "set ylabel 'sup_t H2 metric'\n"
          "plot 'metric_vs_eps.csv' every ::1 using 1:2 with linespoints "
          "title 'H2 metric', '' every ::1 using 1:3 with linespoints "
          "title 'residual'\n"
          "unset logscale\n"
          "set xlabel 't'\n"
          "set ylabel 'E(t)'\n";
    gp << "plot ";
    for (std::size_t i = 0; i < sum.runs.size(); ++i) {
      if (i) gp << ", ";
      gp << "'" << std::filesystem::path(sum.runs[i].csv_path).filename()
               .string()
         << "' every ::1 using 1:3 with lines title 'eps="
         << sum.runs[i].eps << "'";
    }
    gp << "\n";
  }
  {
    std::ofstream md(std::filesystem::path(cfg.outdir) / "summary.md");
    md << make_report(cfg.outdir);
  }
  return sum;
}

std::string make_report(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("run_", 0) == 0 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".csv")
      paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw ConfigError("no sweep CSVs (run_*.csv) found in " + dir);

  std::vector<CsvFile> files;
  for (const auto& p : paths) files.push_back(read_csv(p));
  std::sort(files.begin(), files.end(),
            [](const CsvFile& a, const CsvFile& b) { return a.eps > b.eps; });
  for (const auto& f : files)
    if (f.branch != files[0].branch)
      throw ConfigError("mixed-branch directory: " + f.path + " is branch '" +
                        f.branch + "' but " + files[0].path + " is '" +
                        files[0].branch + "' (refusing to merge)");

  std::ostringstream md;
  md << "# sweep report: " << files[0].branch << " branch, k=" << files[0].k
     << "\n\n";
  md << "All values recomputed from the CSV files in `" << dir << "`.\n\n";
  md << "| eps[knudsen] | sup H2 metric [hydro-limit] | E(0) "
        "[energy-functional] | C = max(E+int D)/(E0+eps^(2k+3)) "
        "[energy-inequality] | residual [truncation-residual] | gauss drift "
        "[gauss-constraint] | divB drift [divB-constraint] | min F / max F "
        "[positivity-monitor] |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  std::vector<double> xs, h2s, rs, Cs;
  for (const auto& f : files) {
    Derived d = derive(f);
    const double resid =
        f.results.count("residual") ? f.results.at("residual") : 0.0;
    md << "| " << f.eps << " | " << d.h2_sup << " | " << d.E0 << " | " << d.C
       << " | " << resid << " | " << d.gauss << " | " << d.divB << " | "
       << d.min_ratio << " |\n";
    xs.push_back(f.eps);
    h2s.push_back(d.h2_sup);
    if (resid > 0) rs.push_back(resid);
    Cs.push_back(d.C);
  }
  md << "\n";
  if (files.size() < 2) {
    md << "insufficient points for slope fit (need >= 2 Knudsen numbers)\n";
  } else {
    const double slope = fit_loglog_slope(xs, h2s);
    md << "- H2-metric log-log slope [hydro-limit]: " << slope
       << (slope >= 0.8 ? "  (PASS, >= 0.8)" : "  (FAIL, < 0.8)") << "\n";
    if (rs.size() == xs.size()) {
      const double rslope = fit_loglog_slope(xs, rs);
      md << "- residual log-log slope [truncation-residual]: " << rslope
         << " (expected ~ k = " << files[0].k << ")\n";
    }
    double cmin = Cs[0], cmax = Cs[0];
    for (double c : Cs) {
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    const double spread = cmin > 0 ? cmax / cmin : 0.0;
    md << "- energy-inequality constant spread max/min [energy-inequality]: "
       << spread << (spread <= 1.5 && spread > 0 ? "  (stable)" : "  (check)")
       << "\n";
  }
  return md.str();
}

}  // namespace kinlim
