#pragma once

// Checkpoint layout (version 1):
//
//   MHDBL-CHECKPOINT\n
//   version 1\n
//   nx <int>\n  ny <int>\n  lx <%.17g>\n  ymax <%.17g>\n  stretch <%.17g>\n
//   t0 <%.17g>\n  t <%.17g>\n  dt <%.17g>\n  step <long>\n  order <int>\n
//   history <0|1>\n
//   end\n
//   u: nx*ny little-endian IEEE-754 doubles, row-major (x index outer)
//   f: same
//   if history == 1: the previous explicit terms for u, then for f
//
// t0 is the time the integrator started from; the time after `step` steps
// is t0 + step*dt, which is how a resumed run stays bit-identical.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "mhdbl/solver.hpp"

namespace mhdbl {

struct Checkpoint {
  State state;
  double t0 = 0.0;
  double dt = 0.0;
  long step = 0;
  int order = 1;
  std::optional<std::pair<Field, Field>> history;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_doubles(std::ostream& os, const Field& f) {
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
}

inline void read_doubles(std::istream& is, Field& f) {
  for (double& v : f.values()) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error("checkpoint: truncated data");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    v = std::bit_cast<double>(bits);
  }
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const State& s, const Integrator& it) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open checkpoint for writing: " + path);
  const Grid& g = s.grid();
  const auto& cfg = it.config();
  os << "MHDBL-CHECKPOINT\n"
     << "version 1\n"
     << "nx " << g.nx << "\n"
     << "ny " << g.ny << "\n"
     << "lx " << detail::fmt17(g.lx) << "\n"
     << "ymax " << detail::fmt17(g.ymax) << "\n"
     << "stretch " << detail::fmt17(g.stretch) << "\n"
     << "t0 " << detail::fmt17(it.t0()) << "\n"
     << "t " << detail::fmt17(s.t) << "\n"
     << "dt " << detail::fmt17(cfg.dt) << "\n"
     << "step " << it.steps() << "\n"
     << "order " << cfg.order << "\n"
     << "history " << (it.has_history() ? 1 : 0) << "\n"
     << "end\n";
  detail::write_doubles(os, s.u);
  detail::write_doubles(os, s.f);
  if (it.has_history()) {
    detail::write_doubles(os, it.history().first);
    detail::write_doubles(os, it.history().second);
  }
  if (!os) throw Error("checkpoint write failed: " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint: " + path);
  std::string line;
  std::getline(is, line);
  if (line != "MHDBL-CHECKPOINT") throw Error("not a checkpoint file: " + path);
  std::map<std::string, std::string> kv;
  while (std::getline(is, line) && line != "end") {
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw Error("checkpoint: malformed header line '" + line + "'");
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  auto need = [&](const char* k) -> const std::string& {
    auto p = kv.find(k);
    if (p == kv.end()) throw Error(std::string("checkpoint: missing header key ") + k);
    return p->second;
  };
  if (need("version") != "1") throw Error("checkpoint: unsupported version " + kv["version"]);
  auto grid = build_grid(std::stoi(need("nx")), std::stoi(need("ny")), std::stod(need("lx")),
                         std::stod(need("ymax")), std::stod(need("stretch")));
  Checkpoint c;
  c.state = State::zero(grid, std::stod(need("t")));
  c.t0 = std::stod(need("t0"));
  c.dt = std::stod(need("dt"));
  c.step = std::stol(need("step"));
  c.order = std::stoi(need("order"));
  detail::read_doubles(is, c.state.u);
  detail::read_doubles(is, c.state.f);
  if (need("history") == "1") {
    Field hu(grid), hf(grid);
    detail::read_doubles(is, hu);
    detail::read_doubles(is, hf);
    c.history.emplace(std::move(hu), std::move(hf));
  }
  return c;
}

}  // namespace mhdbl
