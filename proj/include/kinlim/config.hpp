#pragma once

#include <istream>
#include <string>
#include <vector>

#include "kinlim/common.hpp"

namespace kinlim {

// One flat key-value file fully determines a run.  Sections map to key
// prefixes ([grid] n_x -> grid.n_x); unknown keys are hard errors.
struct RunConfig {
  // [run]
  std::string branch = "landau";  // landau | vml
  std::string outdir = "out";
  unsigned long seed = 12345;
  int threads = 0;  // 0 = library default; recorded into outputs

  // [grid]
  int n_x = 8;
  double length = 1.0;
  int n_v = 16;
  double v_max = 6.0;

  // [expansion]
  int k = 2;
  int ell = 3;
  double t_c = 0.9;        // global-Maxwellian temperature (must stay < min T)
  bool theorem_mode = false;  // requires k >= 3

  // [background]
  double amplitude = 0.05;
  std::string profile = "sine";

  // [sweep]
  std::vector<double> eps{0.2, 0.1, 0.05};
  double t_end = 0.04;       // kinetic horizon (VML additionally capped)
  double dt = 1e-3;          // kinetic step
  double fluid_dt = 2.5e-4;  // fluid background step
  int snap_every = 20;       // fluid steps between stored snapshots
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);
void validate_config(const RunConfig& c);  // throws ConfigError

// Generated key documentation (the config reference).
std::string config_reference();

}  // namespace kinlim
