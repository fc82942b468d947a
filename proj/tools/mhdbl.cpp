// mhdbl: simulate | verify | mms | report.  Flags mirror the config keys;
// --config reads a key = value file first and flags override it.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mhdbl/commands.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw mhdbl::Error("cannot open config " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted-energy simulations and verification for the MHD boundary layer system"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  for (const char* name : {"simulate", "verify", "mms", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const auto& [key, help] : mhdbl::config_keys()) {
      if (key == "mode") continue;
      sub->add_option("--" + key, flags[key], help);
    }
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const std::string mode = app.get_subcommands().front()->get_name();
    std::string text = config_path.empty() ? "" : slurp(config_path);
    text += "\nmode = " + mode + "\n";
    for (const auto& [key, value] : flags) {
      if (!value.empty()) text += key + " = " + value + "\n";
    }
    const mhdbl::RunConfig cfg = mhdbl::parse_config(text);
    return mhdbl::dispatch(cfg);
  } catch (const mhdbl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  }
}
