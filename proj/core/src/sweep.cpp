#include "dimerring/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>

#include "parallel.hpp"

namespace dimerring {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double predicate(const LoopSpec& spec, BoundaryKind kind, double t) {
  const double mu = 1.0 + spec.r * std::sin(t);
  const double nu = 1.0 + spec.r * std::cos(t);
  switch (kind) {
    case BoundaryKind::MuOne: return spec.r * std::sin(t);
    case BoundaryKind::NuOne: return spec.r * std::cos(t);
    case BoundaryKind::UnitProduct: return mu * nu - 1.0;
  }
  return 0.0;
}

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

LoopSpec LoopSpec::create(double r, int samples) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("loop radius must lie in (0, 1)");
  if (samples < 16) throw std::invalid_argument("loop needs at least 16 samples");
  return LoopSpec{r, samples};
}

double LoopSpec::step() const { return kTwoPi / samples; }

ModelParams loop_params(const LoopSpec& spec, double t, int sites) {
  return ModelParams::create(sites, 1.0 + spec.r * std::sin(t), 1.0 + spec.r * std::cos(t));
}

std::string column_name(Observable o) {
  switch (o) {
    case Observable::G: return "g";
    case Observable::EnergyDensity: return "E_g";
    case Observable::CenterOfMass: return "R_c";
    case Observable::StaggeredCurrent: return "J_stag";
  }
  return "?";
}

std::string BoundaryMark::predicate() const {
  switch (kind) {
    case BoundaryKind::MuOne: return "mu=1";
    case BoundaryKind::NuOne: return "nu=1";
    case BoundaryKind::UnitProduct: return "mu*nu=1";
  }
  return "?";
}

std::vector<BoundaryMark> boundary_marks(const LoopSpec& spec) {
  constexpr int grid = 4096;
  const double h = kTwoPi / grid;
  std::vector<BoundaryMark> marks;
  for (auto kind : {BoundaryKind::MuOne, BoundaryKind::NuOne, BoundaryKind::UnitProduct}) {
    for (int j = 0; j < grid; ++j) {
      // Half-offset grid keeps sample points off the exact crossings.
      double a = (j + 0.5) * h;
      double b = a + h;
      double fa = predicate(spec, kind, a);
      const double fb = predicate(spec, kind, b);
      if ((fa < 0.0) == (fb < 0.0)) continue;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = predicate(spec, kind, m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      double t = 0.5 * (a + b);
      if (t >= kTwoPi) t -= kTwoPi;
      if (kTwoPi - t < 1e-12) t = 0.0;
      marks.push_back({t, kind});
    }
  }
  std::sort(marks.begin(), marks.end(), [](const BoundaryMark& x, const BoundaryMark& y) { return x.t < y.t; });
  return marks;
}

SweepError::SweepError(const std::string& what, double t_)
    : std::runtime_error("sweep failed at t=" + std::to_string(t_) + ": " + what), t(t_) {}

std::vector<double> central_first(const std::vector<double>& x, double h) {
  const std::size_t m = x.size();
  std::vector<double> d(m);
  for (std::size_t k = 0; k < m; ++k) d[k] = (x[(k + 1) % m] - x[(k + m - 1) % m]) / (2.0 * h);
  return d;
}

std::vector<double> central_second(const std::vector<double>& x, double h) {
  const std::size_t m = x.size();
  std::vector<double> d(m);
  for (std::size_t k = 0; k < m; ++k) d[k] = (x[(k + 1) % m] - 2.0 * x[k] + x[(k + m - 1) % m]) / (h * h);
  return d;
}

LoopScan scan_loop(const LoopSpec& spec, int sites, const SweepOptions& options) {
  LoopScan scan;
  scan.spec = spec;
  scan.sites = sites;
  scan.bond_range = options.bond_range;
  scan.marks = boundary_marks(spec);
  const auto m = static_cast<std::size_t>(spec.samples);
  const double h = spec.step();
  scan.t.resize(m);
  scan.nudged.assign(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    double t = h * static_cast<double>(k);
    for (const auto& mark : scan.marks) {
      if (circular_distance(t, mark.t) < 1e-8) {
        t += h * 1e-3;
        scan.nudged[k] = 1;
        break;
      }
    }
    scan.t[k] = t;
  }
  // Validate N once up front so a bad size is a config error, not a sweep error.
  (void)loop_params(spec, scan.t[0], sites);

  std::vector<std::optional<GroundStateReport>> slots(m);
  const ReportOptions ropt{options.bond_range};
  detail::parallel_for(m, options.workers, [&](std::size_t k) {
    try {
      slots[k] = ground_state_report(loop_params(spec, scan.t[k], sites), ropt);
    } catch (const std::exception& e) {
      throw SweepError(e.what(), scan.t[k]);
    }
  });

  scan.reports.reserve(m);
  for (auto& s : slots) scan.reports.push_back(std::move(*s));
  for (std::size_t c = 0; c < kLoopColumns.size(); ++c) {
    auto& col = scan.value[c];
    col.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& r = scan.reports[k];
      switch (kLoopColumns[c]) {
        case Observable::G: col[k] = r.g; break;
        case Observable::EnergyDensity: col[k] = r.e_g; break;
        case Observable::CenterOfMass: col[k] = r.r_c; break;
        case Observable::StaggeredCurrent: col[k] = r.j_stag; break;
      }
    }
    scan.d1[c] = central_first(col, h);
    scan.d2[c] = central_second(col, h);
  }
  return scan;
}

std::vector<GridCell> grid_scan(const GridSpec& spec, int sites, const SweepOptions& options,
                                const std::function<void(const GridCell&)>& on_cell) {
  if (spec.resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  if (!(spec.mu_lo > 0.0 && spec.nu_lo > 0.0 && spec.mu_hi >= spec.mu_lo && spec.nu_hi >= spec.nu_lo)) {
    throw std::invalid_argument("grid ranges must be positive and ordered");
  }
  (void)ModelParams::create(sites, spec.mu_lo, spec.nu_lo);
  const auto r = static_cast<std::size_t>(spec.resolution);
  std::vector<GridCell> cells(r * r);
  std::mutex emit;
  auto axis = [&](double lo, double hi, std::size_t i) { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(r - 1); };

  detail::parallel_for(r * r, options.workers, [&](std::size_t idx) {
    GridCell cell;
    cell.i = static_cast<int>(idx / r);
    cell.j = static_cast<int>(idx % r);
    cell.mu = axis(spec.mu_lo, spec.mu_hi, idx / r);
    cell.nu = axis(spec.nu_lo, spec.nu_hi, idx % r);
    try {
      const auto p = ModelParams::create(sites, cell.mu, cell.nu);
      cell.g_closed = ratio_g_closed_form(p);
      cell.g_counted = solve_spectrum(p).g;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.g_counted = std::nan("");
    }
    cells[idx] = cell;
    if (on_cell) {
      std::lock_guard<std::mutex> lock(emit);
      on_cell(cells[idx]);
    }
  });
  return cells;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need matching series");
  const bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  if (all_zero) return 0.0;
  const double floor = 1e-300;
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], floor));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

GrowthRow growth_near_mark(const BoundaryMark& mark, Observable column, double step,
                           const std::vector<GrowthSeries>& series, int window) {
  GrowthRow row;
  row.mark = mark;
  row.column = column;
  for (const auto& s : series) {
    const auto m = static_cast<long>(s.d2.size());
    const long center = std::lround(mark.t / step);
    double peak = 0.0;
    for (long d = -window; d <= window; ++d) {
      const long k = ((center + d) % m + m) % m;
      peak = std::max(peak, std::abs(s.d2[static_cast<std::size_t>(k)]));
    }
    row.sites.push_back(s.sites);
    row.peak.push_back(peak);
  }
  std::vector<double> xs(row.sites.begin(), row.sites.end());
  row.slope = loglog_slope(xs, row.peak);
  row.monotone = true;
  for (std::size_t i = 1; i < row.peak.size(); ++i) {
    if (!(row.peak[i] > row.peak[i - 1])) row.monotone = false;
  }
  return row;
}

std::vector<GrowthRow> divergence_exponent(const std::vector<LoopScan>& scans, int window) {
  std::set<int> sizes;
  for (const auto& s : scans) sizes.insert(s.sites);
  if (sizes.size() < 3 || sizes.size() != scans.size()) {
    throw std::invalid_argument("divergence_exponent needs scans at three or more distinct N");
  }
  for (const auto& s : scans) {
    if (s.spec.samples != scans.front().spec.samples || s.spec.r != scans.front().spec.r) {
      throw std::invalid_argument("divergence_exponent: scans must share the same loop");
    }
  }
  std::vector<const LoopScan*> ordered;
  for (const auto& s : scans) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const LoopScan* a, const LoopScan* b) { return a->sites < b->sites; });

  std::vector<GrowthRow> rows;
  const double step = scans.front().spec.step();
  for (const auto& mark : ordered.front()->marks) {
    for (auto col : kLoopColumns) {
      std::vector<GrowthSeries> series;
      for (const auto* s : ordered) series.push_back({s->sites, s->second(col)});
      rows.push_back(growth_near_mark(mark, col, step, series, window));
    }
  }
  return rows;
}

}  // namespace dimerring
