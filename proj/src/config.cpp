#include "kinlim/config.hpp"

#include <fstream>
#include <sstream>

namespace kinlim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct KeyDoc {
  const char* key;
  const char* doc;
};

constexpr KeyDoc kKeys[] = {
    {"run.branch", "landau | vml"},
    {"run.outdir", "output directory for sweep artifacts"},
    {"run.seed", "random seed for self-test draws (recorded into outputs)"},
    {"run.threads", "worker threads; 0 = library default (recorded)"},
    {"grid.n_x", "spatial cells on the torus"},
    {"grid.length", "torus length"},
    {"grid.n_v", "velocity points per axis (>= 8)"},
    {"grid.v_max", "velocity cube half-width"},
    {"expansion.k", "truncation depth, >= 2 (remainder scales eps^k)"},
    {"expansion.ell", "velocity-weight exponent in w_i = <v>^{ell-i} exp(...)"},
    {"expansion.t_c", "global-Maxwellian temperature, must stay below min T"},
    {"expansion.theorem_mode", "0|1; when 1, requires k >= 3"},
    {"background.amplitude", "fluid perturbation amplitude"},
    {"background.profile", "initial profile id (sine)"},
    {"sweep.eps", "Knudsen numbers, strictly positive, sorted descending"},
    {"sweep.t_end", "kinetic time horizon (VML capped at eps^{-1/3})"},
    {"sweep.dt", "kinetic time step"},
    {"sweep.fluid_dt", "fluid background time step"},
    {"sweep.snap_every", "fluid steps between stored background snapshots"},
};

bool known_key(const std::string& k) {
  for (const auto& d : kKeys)
    if (k == d.key) return true;
  return false;
}

double to_double(const std::string& k, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + k + ": not a number: '" + v + "'");
  }
}

long to_long(const std::string& k, const std::string& v) {
  try {
    std::size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key " + k + ": not an integer: '" + v + "'");
  }
}

bool to_bool(const std::string& k, const std::string& v) {
  if (v == "0" || v == "false") return false;
  if (v == "1" || v == "true") return true;
  throw ConfigError("config key " + k + ": expected 0/1, got '" + v + "'");
}

std::vector<double> to_list(const std::string& k, const std::string& v) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) {
    if (!tok.empty() && tok.back() == ',') tok.pop_back();
    if (tok.empty()) continue;
    out.push_back(to_double(k, tok));
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (!known_key(key))
      throw ConfigError("unknown config key: " + key +
                        " (see `kinlim sweep --keys` for the reference)");

    if (key == "run.branch") c.branch = val;
    else if (key == "run.outdir") c.outdir = val;
    else if (key == "run.seed") c.seed = (unsigned long)to_long(key, val);
    else if (key == "run.threads") c.threads = (int)to_long(key, val);
    else if (key == "grid.n_x") c.n_x = (int)to_long(key, val);
    else if (key == "grid.length") c.length = to_double(key, val);
    else if (key == "grid.n_v") c.n_v = (int)to_long(key, val);
    else if (key == "grid.v_max") c.v_max = to_double(key, val);
    else if (key == "expansion.k") c.k = (int)to_long(key, val);
    else if (key == "expansion.ell") c.ell = (int)to_long(key, val);
    else if (key == "expansion.t_c") c.t_c = to_double(key, val);
    else if (key == "expansion.theorem_mode") c.theorem_mode = to_bool(key, val);
    else if (key == "background.amplitude") c.amplitude = to_double(key, val);
    else if (key == "background.profile") c.profile = val;
    else if (key == "sweep.eps") c.eps = to_list(key, val);
    else if (key == "sweep.t_end") c.t_end = to_double(key, val);
    else if (key == "sweep.dt") c.dt = to_double(key, val);
    else if (key == "sweep.fluid_dt") c.fluid_dt = to_double(key, val);
    else if (key == "sweep.snap_every") c.snap_every = (int)to_long(key, val);
  }
  validate_config(c);
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

void validate_config(const RunConfig& c) {
  if (c.branch != "landau" && c.branch != "vml")
    throw ConfigError("run.branch must be landau or vml");
  if (c.n_x < 1) throw ConfigError("grid.n_x must be >= 1");
  if (c.length <= 0) throw ConfigError("grid.length must be positive");
  if (c.n_v < 8) throw ConfigError("grid.n_v must be >= 8");
  if (c.v_max <= 0) throw ConfigError("grid.v_max must be positive");
  if (c.k < 2) throw ConfigError("expansion.k must be >= 2");
  if (c.theorem_mode && c.k < 3)
    throw ConfigError("expansion.theorem_mode requires k >= 3");
  if (c.ell < 0) throw ConfigError("expansion.ell must be >= 0");
  if (c.eps.empty()) throw ConfigError("sweep.eps must be non-empty");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (c.eps[i] <= 0) throw ConfigError("sweep.eps values must be positive");
    if (i > 0 && c.eps[i] >= c.eps[i - 1])
      throw ConfigError("sweep.eps must be sorted strictly descending");
  }
  if (c.amplitude < 0 || c.amplitude >= 0.5)
    throw ConfigError("background.amplitude must lie in [0, 0.5)");
  if (c.profile != "sine")
    throw ConfigError("background.profile: unknown profile '" + c.profile + "'");
  if (c.t_c <= 0 || c.t_c >= 1.0 - c.amplitude)
    throw ConfigError(
        "expansion.t_c must be positive and below the minimum background "
        "temperature 1 - amplitude");
  if (c.t_end <= 0 || c.dt <= 0 || c.fluid_dt <= 0)
    throw ConfigError("sweep times must be positive");
  if (c.snap_every < 1) throw ConfigError("sweep.snap_every must be >= 1");
  if (c.threads < 0) throw ConfigError("run.threads must be >= 0");
}

std::string config_reference() {
  std::ostringstream out;
  out << "# configuration key reference (flat key-value; [section] headers "
         "prefix keys)\n";
  for (const auto& d : kKeys) out << d.key << "\n    " << d.doc << "\n";
  return out.str();
}

}  // namespace kinlim
