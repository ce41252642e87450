#pragma once

#include <ostream>
#include <string>

#include "kinlim/config.hpp"
#include "kinlim/diagnostics.hpp"
#include "kinlim/remainder.hpp"

namespace kinlim {

// Outcome of one Knudsen-number run inside a sweep.
struct EpsRunResult {
  double eps = 0.0;
  double h2_sup = 0.0;     // sup_t of the H2 distance to the local Maxwellian
  double E0 = 0.0;         // initial energy functional
  double C_fit = 0.0;      // max_t [E(t) + int D] / (E(0) + eps^{2k+3})
  double gauss_drift = 0.0;
  double divB_drift = 0.0;
  double min_F = 0.0, max_F = 0.0;  // extremes of the directly evolved F
  double residual = 0.0;            // expansion residual at mid-horizon
  double residual_route_diff = 0.0;
  double two_route_diff = 0.0;  // direct F vs reconstruction, relative L2
  std::string csv_path;
};

struct SweepSummary {
  RunConfig cfg;
  std::vector<EpsRunResult> runs;
  double h2_slope = 0.0;        // log-log fit of h2_sup vs eps
  double residual_slope = 0.0;  // log-log fit of residual vs eps
  double C_spread = 0.0;        // max/min of C_fit across eps
};

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

// Fluid background trajectory for a config (shared by sweep, CLI and tests).
FluidSeries build_background(const RunConfig& cfg);

// Full pipeline: background -> expansion coefficients -> per-eps remainder and
// direct evolutions -> CSVs + summary + plot script in cfg.outdir.
SweepSummary run_sweep(const RunConfig& cfg, std::ostream* log = nullptr);

// Consolidated markdown report over a directory of sweep CSVs; recomputes the
// fits from the files alone.
std::string make_report(const std::string& dir);

}  // namespace kinlim
