#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dimerring/io.hpp"
#include "json.hpp"

using namespace dimerring;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DIMERRING_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  auto dir = fs::temp_directory_path() / ("dimerring_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

RunConfig point(const std::string& cmd, int n, double mu, double nu) {
  RunConfig c;
  c.command = cmd;
  c.n = n;
  c.mu = mu;
  c.nu = nu;
  return c;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5000000000000001e-300");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("render csv and json") {
  Table t;
  t.metadata = {{"tool", "dimerring"}};
  t.columns = {"a", "b", "c"};
  t.rows = {{1LL, 0.5, std::string("x")}, {2LL, Cell{}, std::string("y")}};
  const auto csv = render(t, Format::Csv);
  CHECK(csv == "# tool: dimerring\na,b,c\n1,0.5,x\n2,,y\n");
  const auto j = nlohmann::json::parse(render(t, Format::Json));
  CHECK(j["metadata"]["tool"] == "dimerring");
  CHECK(j["columns"][1] == "b");
  CHECK(j["rows"][0][1] == 0.5);
  CHECK(j["rows"][1][1].is_null());
  CHECK(parse_format("json") == Format::Json);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("config file and validation") {
  const auto dir = scratch();
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "# comment\n\nn = 42\nmu=1.9\nnu=0.3\nformat=json\n";
  RunConfig c;
  c.command = "spectrum";
  for (const auto& [k, v] : read_config_file(path.string())) apply_config_value(c, k, v);
  CHECK(c.n == 42);
  CHECK(c.mu == 1.9);
  CHECK(c.format == Format::Json);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(apply_config_value(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "n", "many"), ConfigError);
  CHECK_THROWS_AS(read_config_file((dir / "missing.cfg").string()), ConfigError);
  std::ofstream(dir / "bad.cfg") << "just words\n";
  CHECK_THROWS_AS(read_config_file((dir / "bad.cfg").string()), ConfigError);

  auto bad = point("spectrum", 8, 1.0, 1.0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  auto lvl = point("state", 10, 1.0, 1.0);
  lvl.level = 11;
  CHECK_THROWS_AS(lvl.validate(), ConfigError);
  CHECK_THROWS_AS(point("validate", 66, 1.0, 1.0).validate(), ConfigError);
  CHECK(sidecar_path("out/loop.csv", "marks") == "out/loop.marks.csv");
  CHECK(sidecar_path("loop", "marks") == "loop.marks");
}

TEST_CASE("spectrum tables") {
  const auto u = csv_rows(render(spectrum_table(point("spectrum", 6, 1.0, 1.0)), Format::Csv));
  REQUIRE(u.size() == 6);
  std::vector<double> e;
  for (const auto& r : u) e.push_back(std::stod(r[3]));
  std::sort(e.begin(), e.end());
  const std::vector<double> expect{-2, -1, -1, 1, 1, 2};
  for (std::size_t i = 0; i < 6; ++i) CHECK(e[i] == doctest::Approx(expect[i]).epsilon(1e-12));

  const auto up = csv_rows(render(spectrum_table(point("spectrum", 150, 0.2, 5.0)), Format::Csv));
  REQUIRE(up.size() == 150);
  for (const auto& r : up) CHECK(std::abs(std::stod(r[2]) - std::log(5.0) / 150) < 1e-12);

  const auto p = point("spectrum", 42, 1.9, 0.3);
  int complex = 0;
  for (const auto& r : csv_rows(render(spectrum_table(p), Format::Csv))) {
    if (r[5].rfind("complex", 0) == 0) ++complex;
  }
  CHECK(complex == fragile_level_count(ModelParams::create(42, 1.9, 0.3)));
}

TEST_CASE("state tables") {
  auto c = point("state", 10, 1.0, 1.0);
  c.level = 2;
  const auto t = state_table(c);
  const auto rows = csv_rows(render(t, Format::Csv));
  REQUIRE(rows.size() == 10);
  for (std::size_t l = 0; l < 10; ++l) {
    if (l < 9) CHECK(std::abs(std::stod(rows[l][4])) < 1e-12);
  }
  bool has_com = false;
  for (const auto& [k, v] : t.metadata) has_com |= (k == "com");
  CHECK(has_com);

  auto red = point("state", 150, 0.1, 5.0);
  red.level = 40;
  const auto rr = csv_rows(render(state_table(red), Format::Csv));
  REQUIRE(rr.size() == 150);
  for (std::size_t l = 15; l < 150; l += 15) CHECK(std::stod(rr[l][3]) < std::stod(rr[l - 15][3]));
  CHECK(std::abs(std::stod(rr[10][4])) > 1e-6);

  auto yellow = point("state", 150, 2.0, 4.0);
  yellow.level = 40;
  const auto t2 = state_table(yellow);
  for (const auto& r : csv_rows(render(t2, Format::Csv))) {
    if (r.size() > 4) CHECK(std::abs(std::stod(r[4])) < 1e-9);
  }
  for (const auto& [k, v] : t2.metadata) {
    if (k == "locality") CHECK(v == "extended");
  }
}

TEST_CASE("exit codes") {
  CHECK(run("spectrum --n 10 --mu 2 --nu 0.5") == 0);
  CHECK(run("spectrum --n 8 --mu 2 --nu 0.5") == 2);
  CHECK(run("spectrum --n 10 --mu -1 --nu 0.5") == 2);
  CHECK(run("spectrum --n 10 --mu 2 --nu 0.5 --format yaml") == 2);
  CHECK(run("spectrum --bogus") == 2);
  CHECK(run("state --n 10 --level 11") == 2);
  CHECK(run("validate --n 10 --mu 2 --nu 0.5") == 0);
  CHECK(run("spectrum --n 10 --config /nonexistent/file.cfg") == 2);
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch();
  std::ofstream(dir / "a.cfg") << "n=10\nmu=3\nnu=0.2\n";
  const auto out = dir / "a.csv";
  REQUIRE(run("spectrum --config " + (dir / "a.cfg").string() + " --mu 2 --out " + out.string()) == 0);
  const auto text = slurp(out);
  CHECK(text.find("# mu: 2\n") != std::string::npos);
  CHECK(text.find("# nu: 0.20000000000000001\n") != std::string::npos);
}

TEST_CASE("outputs are byte-stable across worker counts") {
  const auto dir = scratch();
  const auto a = dir / "loop1.csv";
  const auto b = dir / "loop3.csv";
  REQUIRE(run("loop --n 42 --r 0.9 --samples 48 --workers 1 --out " + a.string()) == 0);
  REQUIRE(run("loop --n 42 --r 0.9 --samples 48 --workers 3 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(dir / "loop1.marks.csv") == slurp(dir / "loop3.marks.csv"));
  CHECK(slurp(a).find('\r') == std::string::npos);
  CHECK(slurp(a).find("# version: ") != std::string::npos);
  CHECK(slurp(a).find("# bond_range: ") != std::string::npos);

  const auto g1 = dir / "grid1.json";
  const auto g2 = dir / "grid2.json";
  REQUIRE(run("grid --n 42 --resolution 6 --format json --workers 1 --out " + g1.string()) == 0);
  REQUIRE(run("grid --n 42 --resolution 6 --format json --workers 4 --out " + g2.string()) == 0);
  CHECK(slurp(g1) == slurp(g2));
  fs::remove_all(dir);
}
