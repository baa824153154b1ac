#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerring/observables.hpp"

namespace dimerring {

// Circle of radius r about (nu, mu) = (1, 1): nu = 1 + r cos t, mu = 1 + r sin t.
struct LoopSpec {
  double r = 0.9;
  int samples = 720;

  static LoopSpec create(double r, int samples);
  double step() const;
};

ModelParams loop_params(const LoopSpec& spec, double t, int sites);

enum class Observable { G, EnergyDensity, CenterOfMass, StaggeredCurrent };
inline constexpr std::array<Observable, 4> kLoopColumns = {Observable::G, Observable::EnergyDensity,
                                                           Observable::CenterOfMass, Observable::StaggeredCurrent};
std::string column_name(Observable o);

enum class BoundaryKind { MuOne, NuOne, UnitProduct };

struct BoundaryMark {
  double t = 0.0;
  BoundaryKind kind = BoundaryKind::MuOne;
  char type() const noexcept { return kind == BoundaryKind::UnitProduct ? 'B' : 'A'; }
  std::string predicate() const;
};

// Exact predicate crossings along the loop, ascending in t within [0, 2 pi).
std::vector<BoundaryMark> boundary_marks(const LoopSpec& spec);

struct SweepOptions {
  int workers = 0;  // 0 picks hardware concurrency
  BondRange bond_range = BondRange::Interior;
};

struct LoopScan {
  LoopSpec spec;
  int sites = 0;
  BondRange bond_range = BondRange::Interior;
  std::vector<double> t;
  std::vector<char> nudged;
  std::vector<GroundStateReport> reports;
  std::array<std::vector<double>, 4> value;  // indexed like kLoopColumns
  std::array<std::vector<double>, 4> d1;
  std::array<std::vector<double>, 4> d2;
  std::vector<BoundaryMark> marks;

  const std::vector<double>& column(Observable o) const { return value[static_cast<std::size_t>(o)]; }
  const std::vector<double>& second(Observable o) const { return d2[static_cast<std::size_t>(o)]; }
};

class SweepError : public std::runtime_error {
 public:
  SweepError(const std::string& what, double t);
  double t;
};

// Periodic central differences with spacing h.
std::vector<double> central_first(const std::vector<double>& x, double h);
std::vector<double> central_second(const std::vector<double>& x, double h);

LoopScan scan_loop(const LoopSpec& spec, int sites, const SweepOptions& options = {});

struct GridSpec {
  double mu_lo = 0.1;
  double mu_hi = 3.0;
  double nu_lo = 0.1;
  double nu_hi = 3.0;
  int resolution = 50;
};

struct GridCell {
  int i = 0;  // mu index
  int j = 0;  // nu index
  double mu = 0.0;
  double nu = 0.0;
  double g_counted = 0.0;
  double g_closed = 0.0;
  bool ok = true;
  std::string error;
};

// Cells stream through on_cell as they finish (serialized); the returned
// vector is in (i, j) order.
std::vector<GridCell> grid_scan(const GridSpec& spec, int sites, const SweepOptions& options = {},
                                const std::function<void(const GridCell&)>& on_cell = {});

struct GrowthSeries {
  int sites = 0;
  std::vector<double> d2;  // one loop column, sampled on t_k = k * step
};

struct GrowthRow {
  BoundaryMark mark;
  Observable column = Observable::EnergyDensity;
  std::vector<int> sites;
  std::vector<double> peak;  // max |d2| within the window, per size
  double slope = 0.0;        // d log(peak) / d log(N)
  bool monotone = false;     // strictly increasing in N
};

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

GrowthRow growth_near_mark(const BoundaryMark& mark, Observable column, double step,
                           const std::vector<GrowthSeries>& series, int window);

// Requires scans at three or more distinct N on the same loop.
std::vector<GrowthRow> divergence_exponent(const std::vector<LoopScan>& scans, int window = 8);

}  // namespace dimerring
