#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dimerring/observables.hpp"
#include "dimerring/sweep.hpp"

namespace dimerring {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExitCode : int { Success = 0, ConfigError = 2, SolverFailure = 3, ValidationFailure = 4 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Format { Csv, Json };
Format parse_format(const std::string& text);

// 17 significant digits, locale independent.
std::string format_number(double x);

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// CSV: '#'-prefixed metadata, header line, LF endings. JSON mirrors it.
std::string render(const Table& table, Format format);

struct RunConfig {
  std::string command;
  int n = 0;
  double mu = 1.0;
  double nu = 1.0;
  int level = 1;
  double r = 0.9;
  int samples = 720;
  GridSpec grid;
  std::string out;  // empty writes to stdout
  Format format = Format::Csv;
  BondRange bond_range = BondRange::Interior;
  int workers = 0;
  int verbosity = 0;

  // Deterministic key/value echo for file headers; workers is excluded
  // so output bytes do not depend on it.
  std::vector<std::pair<std::string, std::string>> echo() const;
  void validate() const;
};

// key=value lines; '#' comments and blank lines ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

struct OutputFile {
  std::string path;  // empty means stdout
  std::string content;
};

Table spectrum_table(const RunConfig& config);
Table state_table(const RunConfig& config);
std::pair<Table, Table> loop_tables(const RunConfig& config);  // data, boundary marks
Table grid_table(const RunConfig& config);
// Second member is true when every check passed.
std::pair<Table, bool> validate_table(const RunConfig& config);

// Runs a command end to end: writes files, prints a JSON error record to err
// on failure, returns the process exit code.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

// One-line JSON error record for stderr.
std::string error_record(ExitCode code, const std::string& kind, const std::string& message);

std::string sidecar_path(const std::string& path, const std::string& tag);

}  // namespace dimerring
