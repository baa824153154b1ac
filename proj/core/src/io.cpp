#include "dimerring/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "dimerring/oracle.hpp"

namespace dimerring {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else {
          return csv_escape(v);
        }
      },
      c);
}

ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_number(v);
          return v;
        } else {
          return v;
        }
      },
      c);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("invalid number for " + key + ": '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("invalid integer for " + key + ": '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> header(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("tool", "dimerring");
  md.emplace_back("version", kToolVersion);
  for (auto& kv : config.echo()) md.push_back(kv);
  md.emplace_back("bond_range", to_string(config.bond_range) +
                                    (config.bond_range == BondRange::Interior ? " (l=2..N-2)" : " (l=1..N-1)"));
  return md;
}

ModelParams point_params(const RunConfig& config) { return ModelParams::create(config.n, config.mu, config.nu); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << content;
  if (!f) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace

std::string error_record(ExitCode code, const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"]["exit_code"] = static_cast<int>(code);
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return j.dump();
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw ConfigError("format must be 'csv' or 'json' (got '" + text + "')");
}

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string render(const Table& table, Format format) {
  if (format == Format::Csv) {
    std::string out;
    for (const auto& [k, v] : table.metadata) out += "# " + k + ": " + v + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (i) out += ',';
      out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += cell_text(row[i]);
      }
      out += '\n';
    }
    return out;
  }
  ordered_json j;
  j["metadata"] = ordered_json::object();
  for (const auto& [k, v] : table.metadata) j["metadata"][k] = v;
  j["columns"] = table.columns;
  j["rows"] = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json r = ordered_json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("command", command);
  e.emplace_back("n", std::to_string(n));
  if (command == "spectrum" || command == "state" || command == "validate") {
    e.emplace_back("mu", format_number(mu));
    e.emplace_back("nu", format_number(nu));
  }
  if (command == "state") e.emplace_back("level", std::to_string(level));
  if (command == "loop") {
    e.emplace_back("r", format_number(r));
    e.emplace_back("samples", std::to_string(samples));
  }
  if (command == "grid") {
    e.emplace_back("mu_min", format_number(grid.mu_lo));
    e.emplace_back("mu_max", format_number(grid.mu_hi));
    e.emplace_back("nu_min", format_number(grid.nu_lo));
    e.emplace_back("nu_max", format_number(grid.nu_hi));
    e.emplace_back("resolution", std::to_string(grid.resolution));
  }
  e.emplace_back("format", format == Format::Csv ? "csv" : "json");
  e.emplace_back("verbosity", std::to_string(verbosity));
  return e;
}

void RunConfig::validate() const {
  static const char* known[] = {"spectrum", "state", "loop", "grid", "validate"};
  if (std::find(std::begin(known), std::end(known), command) == std::end(known)) {
    throw ConfigError("unknown command '" + command + "'");
  }
  if (n <= 0) throw ConfigError("--n is required");
  if (workers < 0) throw ConfigError("--workers must be non-negative");
  try {
    if (command == "loop") {
      (void)LoopSpec::create(r, samples);
      (void)ModelParams::create(n, 1.0, 1.0);
    } else if (command == "grid") {
      if (grid.resolution < 2) throw ConfigError("--resolution must be at least 2");
      if (!(grid.mu_lo > 0.0 && grid.nu_lo > 0.0)) throw ConfigError("grid ranges must be positive");
      if (grid.mu_hi < grid.mu_lo || grid.nu_hi < grid.nu_lo) throw ConfigError("grid ranges must be ordered");
      (void)ModelParams::create(n, grid.mu_lo, grid.nu_lo);
    } else {
      (void)ModelParams::create(n, mu, nu);
    }
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (command == "state" && (level < 1 || level > n)) {
    throw ConfigError("--level must lie in 1.." + std::to_string(n));
  }
  if (command == "validate" && n > kOracleMaxSites) {
    throw ConfigError("validate needs N <= " + std::to_string(kOracleMaxSites));
  }
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = parse_int(key, value);
  else if (key == "mu") c.mu = parse_double(key, value);
  else if (key == "nu") c.nu = parse_double(key, value);
  else if (key == "level") c.level = parse_int(key, value);
  else if (key == "r") c.r = parse_double(key, value);
  else if (key == "samples") c.samples = parse_int(key, value);
  else if (key == "mu_min") c.grid.mu_lo = parse_double(key, value);
  else if (key == "mu_max") c.grid.mu_hi = parse_double(key, value);
  else if (key == "nu_min") c.grid.nu_lo = parse_double(key, value);
  else if (key == "nu_max") c.grid.nu_hi = parse_double(key, value);
  else if (key == "resolution") c.grid.resolution = parse_int(key, value);
  else if (key == "out") c.out = value;
  else if (key == "format") c.format = parse_format(value);
  else if (key == "bond_range") {
    try {
      c.bond_range = parse_bond_range(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "workers") c.workers = parse_int(key, value);
  else if (key == "verbosity") c.verbosity = parse_int(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

Table spectrum_table(const RunConfig& config) {
  const auto p = point_params(config);
  const auto sol = solve_spectrum(p);
  Table t;
  t.metadata = header(config);
  t.metadata.emplace_back("n_complex", std::to_string(sol.n_complex));
  t.metadata.emplace_back("g", format_number(sol.g));
  t.metadata.emplace_back("trace1_error", format_number(sol.trace1_error));
  t.metadata.emplace_back("trace2_error", format_number(sol.trace2_error));
  t.metadata.emplace_back("classification_tolerance", format_number(classification_tolerance(p)));
  if (config.verbosity > 0) {
    std::string notes;
    for (const auto& s : sol.notes) notes += (notes.empty() ? "" : "; ") + s;
    t.metadata.emplace_back("solver_notes", notes.empty() ? "none" : notes);
  }
  t.columns = {"n", "re_k", "im_k", "re_e", "im_e", "classification", "residual"};
  for (const auto& lv : sol.levels) {
    t.rows.push_back({static_cast<long long>(lv.n), lv.k.real(), lv.k.imag(), lv.energy.real(), lv.energy.imag(),
                      describe(lv.classification), lv.residual});
  }
  return t;
}

Table state_table(const RunConfig& config) {
  const auto p = point_params(config);
  const auto sol = solve_spectrum(p);
  const auto st = wavefunction(p, sol.level(config.level));
  const auto obs = state_observables(st, config.bond_range);
  Table t;
  t.metadata = header(config);
  t.metadata.emplace_back("re_k", format_number(st.qm.k.real()));
  t.metadata.emplace_back("im_k", format_number(st.qm.k.imag()));
  t.metadata.emplace_back("re_e", format_number(st.qm.energy.real()));
  t.metadata.emplace_back("im_e", format_number(st.qm.energy.imag()));
  t.metadata.emplace_back("classification", describe(st.qm.classification));
  t.metadata.emplace_back("com", format_number(obs.com));
  t.metadata.emplace_back("locality", to_string(st.locality));
  t.metadata.emplace_back("decay_length", format_number(st.decay_length));
  t.metadata.emplace_back("representation", to_string(st.representation));
  t.metadata.emplace_back("omega", format_number(st.omega));
  t.metadata.emplace_back("eigen_residual", format_number(st.residual));
  t.metadata.emplace_back("current_sum", format_number(obs.current_sum));
  t.columns = {"l", "re_f", "im_f", "abs2", "J_l"};
  const int n = p.sites();
  for (int l = 1; l <= n; ++l) {
    const auto f = st.amplitudes[static_cast<std::size_t>(l - 1)];
    Cell j = std::monostate{};
    if (l < n) j = obs.current_profile[static_cast<std::size_t>(l - 1)];
    t.rows.push_back({static_cast<long long>(l), f.real(), f.imag(), std::norm(f), j});
  }
  return t;
}

std::pair<Table, Table> loop_tables(const RunConfig& config) {
  const auto spec = LoopSpec::create(config.r, config.samples);
  const auto scan = scan_loop(spec, config.n, SweepOptions{config.workers, config.bond_range});
  Table data;
  data.metadata = header(config);
  data.metadata.emplace_back("derivatives", "periodic central differences, step 2*pi/samples");
  data.metadata.emplace_back("stagger_sign", "(-1)^rank over occupied levels sorted by (Re e, Im e)");
  data.metadata.emplace_back("nudge", "samples within 1e-8 of a boundary shifted by step*1e-3");
  int nudged = 0;
  for (char c : scan.nudged) nudged += c;
  data.metadata.emplace_back("nudged_samples", std::to_string(nudged));
  data.columns = {"t", "mu", "nu"};
  for (auto c : kLoopColumns) data.columns.push_back(column_name(c));
  for (auto c : kLoopColumns) data.columns.push_back("d1_" + column_name(c));
  for (auto c : kLoopColumns) data.columns.push_back("d2_" + column_name(c));
  data.columns.push_back("nudged");
  for (std::size_t k = 0; k < scan.t.size(); ++k) {
    const auto& rep = scan.reports[k];
    std::vector<Cell> row{scan.t[k], rep.params.mu(), rep.params.nu()};
    for (std::size_t c = 0; c < kLoopColumns.size(); ++c) row.emplace_back(scan.value[c][k]);
    for (std::size_t c = 0; c < kLoopColumns.size(); ++c) row.emplace_back(scan.d1[c][k]);
    for (std::size_t c = 0; c < kLoopColumns.size(); ++c) row.emplace_back(scan.d2[c][k]);
    row.emplace_back(static_cast<long long>(scan.nudged[k]));
    data.rows.push_back(std::move(row));
  }
  Table marks;
  marks.metadata = header(config);
  marks.metadata.emplace_back("content", "boundary marks located by bisection");
  marks.columns = {"t", "predicate", "type"};
  for (const auto& m : scan.marks) marks.rows.push_back({m.t, m.predicate(), std::string(1, m.type())});
  return {data, marks};
}

Table grid_table(const RunConfig& config) {
  const auto cells = grid_scan(config.grid, config.n, SweepOptions{config.workers, config.bond_range});
  Table t;
  t.metadata = header(config);
  int failed = 0;
  for (const auto& c : cells) failed += c.ok ? 0 : 1;
  t.metadata.emplace_back("failed_cells", std::to_string(failed));
  t.columns = {"mu", "nu", "g_counted", "g_closed", "status"};
  for (const auto& c : cells) {
    t.rows.push_back({c.mu, c.nu, c.g_counted, c.g_closed, c.ok ? std::string("ok") : c.error});
  }
  return t;
}

std::pair<Table, bool> validate_table(const RunConfig& config) {
  const auto p = point_params(config);
  const auto cv = cross_validate(p);
  const auto sol = solve_spectrum(p);
  double worst = 0.0;
  for (const auto& lv : sol.levels) worst = std::max(worst, wavefunction(p, lv).residual);
  const double n = p.sites();
  const bool ok = cv.max_deviation <= 1e-8 && worst <= 1e-9 * n && cv.bethe_trace1_error <= 1e-8 * n &&
                  cv.bethe_trace2_error <= 1e-8 * n;
  Table t;
  t.metadata = header(config);
  t.metadata.emplace_back("matching", n <= 20 ? "hungarian" : "greedy with conflict resolution");
  t.metadata.emplace_back("oracle_symmetrization_shift", format_number(cv.symmetrization_shift));
  t.columns = {"n", "mu", "nu", "max_deviation", "oracle_trace1_error", "oracle_trace2_error",
               "bethe_trace1_error", "bethe_trace2_error", "worst_eigen_residual", "passed"};
  t.rows.push_back({static_cast<long long>(p.sites()), p.mu(), p.nu(), cv.max_deviation, cv.oracle_trace1_error,
                    cv.oracle_trace2_error, cv.bethe_trace1_error, cv.bethe_trace2_error, worst,
                    std::string(ok ? "true" : "false")});
  return {t, ok};
}

std::string sidecar_path(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto fail = [&](ExitCode code, const std::string& kind, const std::string& msg) {
    err << error_record(code, kind, msg) << '\n';
    return static_cast<int>(code);
  };
  try {
    config.validate();
    std::vector<OutputFile> files;
    int code = 0;
    if (config.command == "spectrum") {
      files.push_back({config.out, render(spectrum_table(config), config.format)});
    } else if (config.command == "state") {
      files.push_back({config.out, render(state_table(config), config.format)});
    } else if (config.command == "loop") {
      auto [data, marks] = loop_tables(config);
      files.push_back({config.out, render(data, config.format)});
      files.push_back({config.out.empty() ? "" : sidecar_path(config.out, "marks"), render(marks, config.format)});
    } else if (config.command == "grid") {
      files.push_back({config.out, render(grid_table(config), config.format)});
    } else {
      auto [table, ok] = validate_table(config);
      files.push_back({config.out, render(table, config.format)});
      if (!ok) code = static_cast<int>(ExitCode::ValidationFailure);
    }
    for (const auto& f : files) {
      if (f.path.empty()) {
        out << f.content;
      } else {
        write_file(f.path, f.content);
      }
    }
    if (code != 0) return fail(ExitCode::ValidationFailure, "validation_failure", "cross-validation thresholds exceeded");
    return 0;
  } catch (const ConfigError& e) {
    return fail(ExitCode::ConfigError, "config_error", e.what());
  } catch (const InvalidParams& e) {
    return fail(ExitCode::ConfigError, "config_error", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ExitCode::ConfigError, "config_error", e.what());
  } catch (const std::exception& e) {
    return fail(ExitCode::SolverFailure, "solver_failure", e.what());
  }
}

}  // namespace dimerring
