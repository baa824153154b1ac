// Command-line front end: flags override values from an optional key=value config file.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dimerring/io.hpp"

namespace {

using dimerring::RunConfig;

struct Flag {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

// Registers a string-valued flag whose presence is checked after parsing.
Flag& add_flag(CLI::App* app, std::vector<Flag>& flags, const std::string& name, const std::string& key,
               const std::string& help) {
  flags.push_back({key, "", nullptr});
  auto& f = flags.back();
  f.option = app->add_option(name, f.value, help);
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact spectra and observables of a tight-binding ring with one asymmetric dimer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dimerring::kToolVersion));

  struct Sub {
    std::string name;
    std::string help;
    std::vector<std::pair<std::string, std::string>> extra;  // flag, key
  };
  const std::vector<Sub> subs = {
      {"spectrum", "solve all quasi-momenta", {{"--mu", "mu"}, {"--nu", "nu"}}},
      {"state", "per-site amplitudes of one level", {{"--mu", "mu"}, {"--nu", "nu"}, {"--level", "level"}}},
      {"loop", "half-filling observables along a loop around (1,1)", {{"--r", "r"}, {"--samples", "samples"}}},
      {"grid",
       "complex-level ratio on a (mu, nu) grid",
       {{"--mu-min", "mu_min"}, {"--mu-max", "mu_max"}, {"--nu-min", "nu_min"}, {"--nu-max", "nu_max"},
        {"--resolution", "resolution"}}},
      {"validate", "cross-check against the characteristic-polynomial oracle", {{"--mu", "mu"}, {"--nu", "nu"}}},
  };

  std::map<std::string, std::vector<Flag>> flags;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    apps[s.name] = sub;
    auto& list = flags[s.name];
    list.reserve(16);
    add_flag(sub, list, "--n", "n", "lattice size N (even, N/2 odd, N >= 6)");
    for (const auto& [flag, key] : s.extra) add_flag(sub, list, flag, key, key);
    add_flag(sub, list, "--out", "out", "output path (stdout when omitted)");
    add_flag(sub, list, "--format", "format", "csv or json");
    add_flag(sub, list, "--bond-range", "bond_range", "interior (l=2..N-2) or all (l=1..N-1)");
    add_flag(sub, list, "--workers", "workers", "worker threads, 0 = hardware concurrency");
    add_flag(sub, list, "--verbosity", "verbosity", "extra solver diagnostics in headers");
    sub->add_option("--config", config_paths[s.name], "key=value file; flags take precedence");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(dimerring::ExitCode::ConfigError);
  }

  RunConfig config;
  for (const auto& [name, sub] : apps) {
    if (!sub->parsed()) continue;
    config.command = name;
    try {
      if (!config_paths[name].empty()) {
        for (const auto& [k, v] : dimerring::read_config_file(config_paths[name])) {
          dimerring::apply_config_value(config, k, v);
        }
      }
      for (const auto& f : flags[name]) {
        if (f.option->count() > 0) dimerring::apply_config_value(config, f.key, f.value);
      }
    } catch (const dimerring::ConfigError& e) {
      std::cerr << dimerring::error_record(dimerring::ExitCode::ConfigError, "config_error", e.what()) << '\n';
      return static_cast<int>(dimerring::ExitCode::ConfigError);
    }
  }
  return dimerring::run_command(config, std::cout, std::cerr);
}
