#pragma once

// Flat key = value run configuration.  '#' starts a comment; blank lines are
// ignored; unknown keys are errors.  Every key has a default, so an empty
// document is a valid configuration.

#include <cstdint>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/energy.hpp"

namespace mhdbl {

enum class Mode { simulate, verify, mms, report };

struct RunConfig {
  Mode mode = Mode::simulate;
  // grid
  int nx = 64;
  int ny = 257;
  double lx = 2.0 * std::numbers::pi;
  double ymax = 12.0;
  double stretch = 0.0;
  // solver
  double dt = 1e-3;
  double t_end = 100.0;
  int save_every = 100;
  int order = 1;
  // physics and diagnostics
  double delta = 0.04;
  double lambda = 0.5;
  std::vector<double> lambda_list{0.0, 0.25, 0.5};
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  // outputs
  std::string csv = "frames.csv";
  std::string json = "summary.json";
  std::string checkpoint_dir = "checkpoints";
  std::string resume;  ///< checkpoint to continue from; empty for a fresh run
  // verify: skip the slow residual and defect studies
  bool quick = false;
  // verify: flip the sign of S_{m,k} and S~_{m,k} in every residual (0: off)
  int inject_defect = 0;

  SolverConfig solver() const {
    SolverConfig s;
    s.dt = dt;
    s.t_end = t_end;
    s.save_every = save_every;
    s.order = order;
    return s;
  }
};

/// Documented keys in file order; also the set of CLI flags.
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"mode", "simulate | verify | mms | report"},
      {"nx", "x nodes, power of two >= 16"},
      {"ny", "y nodes including both walls, >= 65"},
      {"lx", "x period"},
      {"ymax", "height of the truncated domain"},
      {"stretch", "wall clustering of the y map, in [0, 1)"},
      {"dt", "time step"},
      {"t_end", "final time"},
      {"save_every", "steps between frames and checkpoints"},
      {"order", "1: IMEX Euler, 2: Crank-Nicolson + AB2"},
      {"delta", "energy parameter, in (0, 1/25]"},
      {"lambda", "weight of the primitive H^{5,0} norms, in [0, 1)"},
      {"lambda_list", "comma-separated weights for the norm comparisons"},
      {"epsilon", "initial amplitude, >= 0"},
      {"seed", "seed of the initial-data draw"},
      {"csv", "frame CSV path"},
      {"json", "summary or report JSON path"},
      {"checkpoint_dir", "directory for checkpoints"},
      {"resume", "checkpoint to resume from"},
      {"quick", "verify: 1 skips the slow residual and defect studies"},
      {"inject_defect", "verify: k in 1..3 flips S_{m,k} in the residual evaluator, 0 off"},
  };
  return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw Error("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw Error("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

inline Mode parse_mode(const std::string& v) {
  if (v == "simulate") return Mode::simulate;
  if (v == "verify") return Mode::verify;
  if (v == "mms") return Mode::mms;
  if (v == "report") return Mode::report;
  throw Error("config: unknown mode '" + v + "'");
}

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::verify: return "verify";
    case Mode::mms: return "mms";
    case Mode::report: return "report";
  }
  return "?";
}

/// Sets one key from its textual value.  No range checks; see validate().
inline void set_config_key(RunConfig& c, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "mode") c.mode = parse_mode(v);
  else if (key == "nx") c.nx = static_cast<int>(parse_int(key, v));
  else if (key == "ny") c.ny = static_cast<int>(parse_int(key, v));
  else if (key == "lx") c.lx = parse_double(key, v);
  else if (key == "ymax") c.ymax = parse_double(key, v);
  else if (key == "stretch") c.stretch = parse_double(key, v);
  else if (key == "dt") c.dt = parse_double(key, v);
  else if (key == "t_end") c.t_end = parse_double(key, v);
  else if (key == "save_every") c.save_every = static_cast<int>(parse_int(key, v));
  else if (key == "order") c.order = static_cast<int>(parse_int(key, v));
  else if (key == "delta") c.delta = parse_double(key, v);
  else if (key == "lambda") c.lambda = parse_double(key, v);
  else if (key == "lambda_list") {
    c.lambda_list.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) c.lambda_list.push_back(parse_double(key, trim(item)));
  } else if (key == "epsilon") c.epsilon = parse_double(key, v);
  else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw Error("config: seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "csv") c.csv = v;
  else if (key == "json") c.json = v;
  else if (key == "checkpoint_dir") c.checkpoint_dir = v;
  else if (key == "resume") c.resume = v;
  else if (key == "quick") c.quick = parse_int(key, v) != 0;
  else if (key == "inject_defect") c.inject_defect = static_cast<int>(parse_int(key, v));
  else throw Error("config: unknown key '" + key + "'");
}

inline void validate(const RunConfig& c) {
  if (!is_power_of_two(c.nx) || c.nx < 16) {
    throw Error("nx must be a power of two (got " + std::to_string(c.nx) + ")");
  }
  if (c.ny < 65) throw Error("ny must be >= 65 (got " + std::to_string(c.ny) + ")");
  if (!(c.lx > 0.0) || !(c.ymax > 0.0)) throw Error("lx and ymax must be positive");
  if (!(c.stretch >= 0.0 && c.stretch < 1.0)) throw Error("stretch must lie in [0, 1)");
  if (!(c.dt > 0.0)) throw Error("dt must be positive");
  if (!(c.t_end > 0.0)) throw Error("t_end must be positive");
  if (c.save_every < 1) throw Error("save_every must be >= 1");
  if (c.order != 1 && c.order != 2) throw Error("order must be 1 or 2");
  validate_delta(c.delta);
  if (!(c.lambda >= 0.0 && c.lambda < 1.0)) throw Error("lambda must lie in [0, 1)");
  for (double l : c.lambda_list) {
    if (!(l >= 0.0 && l < 1.0)) throw Error("lambda_list entries must lie in [0, 1)");
  }
  if (!(c.epsilon >= 0.0)) throw Error("epsilon must be non-negative");
  if (c.inject_defect < 0 || c.inject_defect > 3) throw Error("inject_defect must lie in 0..3");
}

/// Parses a key = value document, applies defaults, validates.
inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_key(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate(c);
  return c;
}

/// Canonical text of the keys that determine the numerical results.  Output
/// paths, mode and resume are excluded, so a resumed run hashes the same.
inline std::string canonical_config(const RunConfig& c) {
  using detail::fmt_g17;
  std::ostringstream os;
  os << "nx=" << c.nx << "\nny=" << c.ny << "\nlx=" << fmt_g17(c.lx) << "\nymax=" << fmt_g17(c.ymax)
     << "\nstretch=" << fmt_g17(c.stretch) << "\ndt=" << fmt_g17(c.dt) << "\nt_end=" << fmt_g17(c.t_end)
     << "\nsave_every=" << c.save_every << "\norder=" << c.order << "\ndelta=" << fmt_g17(c.delta)
     << "\nlambda=" << fmt_g17(c.lambda) << "\nlambda_list=";
  for (std::size_t n = 0; n < c.lambda_list.size(); ++n) os << (n ? "," : "") << fmt_g17(c.lambda_list[n]);
  os << "\nepsilon=" << fmt_g17(c.epsilon) << "\nseed=" << c.seed << "\nquick=" << c.quick
     << "\ninject_defect=" << c.inject_defect << "\n";
  return os.str();
}

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(canonical_config(c)); }

}  // namespace mhdbl
