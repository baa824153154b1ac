#include "dimerring/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include <boost/math/tools/roots.hpp>

namespace dimerring {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxNewton = 50;
constexpr double kUnitProductTol = 1e-12;

std::string format_cplx(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
  return os.str();
}

// sin(z) * exp(-a); finite whenever |Im z| <= a.
cplx scaled_sin(cplx z, double a) {
  const double x = z.real();
  const double y = z.imag();
  const double ch = 0.5 * (std::exp(y - a) + std::exp(-y - a));
  const double sh = 0.5 * (std::exp(y - a) - std::exp(-y - a));
  return {std::sin(x) * ch, std::cos(x) * sh};
}

double spectrum_budget(const ModelParams& p) { return 1e-10 * p.sites(); }

QuasiMomentum make_level(const ModelParams& p, int n, cplx k, LevelClass cls) {
  QuasiMomentum qm;
  qm.n = n;
  qm.k = k;
  qm.theta = k - 2.0 * kPi * n / p.sites();
  qm.energy = 2.0 * std::cos(k);
  qm.classification = cls;
  qm.residual = secular_residual(p, k);
  return qm;
}

int energy_sign(cplx energy) { return energy.imag() >= 0.0 ? 1 : -1; }

// Newton without throwing; nullopt on divergence or insufficient residual.
std::optional<cplx> try_newton(const ModelParams& p, cplx k, std::optional<cplx> deflate = {}) {
  for (int it = 0; it < kMaxNewton; ++it) {
    const cplx f = secular_function(p, k);
    cplx d = secular_derivative(p, k);
    if (deflate) d -= f / (k - *deflate);
    if (d == cplx{}) break;
    const cplx step = f / d;
    k -= step;
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) return std::nullopt;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(k))) break;
  }
  if (secular_residual(p, k) > spectrum_budget(p)) return std::nullopt;
  return k;
}

struct CellPair {
  cplx first;   // assigned to level n
  cplx second;  // its cell partner; level N - n receives 2 pi - second
  bool complex = false;
  bool near_coalescent = false;
};

class CellSolver {
 public:
  CellSolver(const ModelParams& p, int n)
      : p_(p),
        n_(n),
        big_n_(p.sites()),
        q_(2.0 * kPi * n / p.sites()),
        lo_((2.0 * n - 1.0) * kPi / p.sites()),
        hi_((2.0 * n + 1.0) * kPi / p.sites()),
        tau_(classification_tolerance(p)) {}

  CellPair solve() {
    if (auto r = from_closed_form()) return *r;
    if (auto r = from_critical_point()) return *r;
    if (auto r = from_brackets()) return *r;
    throw RootRefinementError(q_, q_, std::abs(secular_function(p_, q_)));
  }

 private:
  bool in_cell(cplx k) const {
    const double slack = 1e-9;
    return k.real() > lo_ - slack && k.real() < hi_ + slack;
  }

  std::optional<CellPair> accept(std::optional<cplx> a, std::optional<cplx> b) const {
    if (!a || !b || !in_cell(*a) || !in_cell(*b)) return std::nullopt;
    const bool ra = std::abs(a->imag()) <= tau_;
    const bool rb = std::abs(b->imag()) <= tau_;
    if (ra && rb) {
      const double x1 = a->real();
      const double x2 = b->real();
      const double gap = std::abs(x1 - x2);
      if (gap <= 1e-13 * std::max(1.0, std::abs(x1))) return std::nullopt;
      CellPair out;
      out.first = std::min(x1, x2);
      out.second = std::max(x1, x2);
      out.near_coalescent = gap < 1e-8;
      return out;
    }
    if (ra || rb) return std::nullopt;
    // Complex pair: the two iterates must be conjugates of one root.
    if (std::abs(*a - std::conj(*b)) > 1e-8 * std::max(1.0, std::abs(*a))) return std::nullopt;
    CellPair out;
    const cplx up = a->imag() > 0.0 ? *a : std::conj(*a);
    out.first = up;
    out.second = std::conj(up);
    out.complex = true;
    out.near_coalescent = 2.0 * up.imag() < 1e-8;
    return out;
  }

  std::optional<CellPair> from_closed_form() const {
    const double phi = phase_angle(p_, q_);
    const cplx theta = big_theta_at(p_, q_);
    if (theta.imag() == 0.0) {
      const double t = theta.real();
      auto a = try_newton(p_, q_ + (t - phi) / big_n_);
      auto b = try_newton(p_, q_ + (kPi - t - phi) / big_n_);
      return accept(a, b);
    }
    auto a = try_newton(p_, q_ + (theta - phi) / static_cast<double>(big_n_));
    if (!a) return std::nullopt;
    return accept(a, std::conj(*a));
  }

  // Near a coalescence the cell maximum of F sits between the two roots.
  std::optional<CellPair> from_critical_point() const {
    double k = q_ + (kPi / 2.0 - phase_angle(p_, q_)) / big_n_;
    for (int it = 0; it < kMaxNewton; ++it) {
      const double d1 = secular_derivative(p_, k).real();
      const double d2 = secular_second_derivative(p_, k).real();
      if (d2 == 0.0) break;
      const double step = d1 / d2;
      k = std::clamp(k - step, lo_, hi_);
      if (std::abs(step) < 1e-16) break;
    }
    const double fc = secular_function(p_, k).real();
    const double f2 = secular_second_derivative(p_, k).real();
    if (f2 == 0.0) return std::nullopt;
    const double ratio = -2.0 * fc / f2;
    if (ratio >= 0.0) {
      const double w = std::sqrt(ratio);
      auto a = try_newton(p_, k - w);
      if (!a) return std::nullopt;
      auto b = try_newton(p_, k + w, *a);
      return accept(a, b);
    }
    const cplx seed{k, std::sqrt(-ratio)};
    auto a = try_newton(p_, seed);
    if (!a) return std::nullopt;
    if (std::abs(a->imag()) <= tau_) {
      auto b = try_newton(p_, std::conj(seed), *a);
      return accept(a, b);
    }
    return accept(a, std::conj(*a));
  }

  std::optional<CellPair> from_brackets() const {
    constexpr int samples = 512;
    auto f = [&](double x) { return secular_function(p_, x).real(); };
    std::vector<double> roots;
    double x0 = lo_;
    double f0 = f(x0);
    for (int i = 1; i <= samples; ++i) {
      const double x1 = lo_ + (hi_ - lo_) * i / samples;
      const double f1 = f(x1);
      if (f1 == 0.0) {
        roots.push_back(x1);
      } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, x0, x1, f0, f1,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
      x0 = x1;
      f0 = f1;
    }
    if (roots.size() != 2) return std::nullopt;
    auto a = try_newton(p_, roots[0]);
    auto b = try_newton(p_, roots[1]);
    if (!a || !b) return std::nullopt;
    return accept(cplx{a->real(), 0.0}, cplx{b->real(), 0.0});
  }

  const ModelParams& p_;
  int n_;
  int big_n_;
  double q_;
  double lo_;
  double hi_;
  double tau_;
};

SpectrumSolution finish(SpectrumSolution sol) {
  const auto& p = sol.params;
  const int n = p.sites();
  cplx s1{};
  cplx s2{};
  for (const auto& lv : sol.levels) {
    s1 += lv.energy;
    s2 += lv.energy * lv.energy;
  }
  sol.trace1_error = std::abs(s1 - trace_moment(p, 1));
  sol.trace2_error = std::abs(s2 - trace_moment(p, 2));
  const double budget = 1e-8 * n;
  if (sol.trace1_error > budget || sol.trace2_error > budget) {
    const int moment = sol.trace1_error > budget ? 1 : 2;
    throw CompletenessError(moment, moment == 1 ? sol.trace1_error : sol.trace2_error,
                            "N=" + std::to_string(n) + " mu=" + std::to_string(p.mu()) +
                                " nu=" + std::to_string(p.nu()));
  }

  // Duplicate detection on k reduced to [0, 2 pi).
  std::vector<cplx> ks;
  ks.reserve(sol.levels.size());
  for (const auto& lv : sol.levels) {
    double re = std::fmod(lv.k.real(), 2.0 * kPi);
    if (re < 0.0) re += 2.0 * kPi;
    ks.emplace_back(re, lv.k.imag());
  }
  std::sort(ks.begin(), ks.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (std::abs(ks[i] - ks[i - 1]) < 1e-8) {
      sol.notes.push_back("coincident roots at k=" + format_cplx(ks[i]));
    }
  }

  sol.n_complex = 0;
  for (const auto& lv : sol.levels) {
    if (lv.is_complex_pair()) ++sol.n_complex;
  }
  if (sol.closed_form && is_unit_product(p) && p.mu() != p.nu()) {
    // Every quasi-momentum carries the same Im k; all N levels count as complex.
    sol.n_complex = n;
    sol.notes.push_back("unit product: all N levels share Im k = ln(nu)/N and are counted complex");
  }
  sol.g = static_cast<double>(sol.n_complex) / n;
  return sol;
}

SpectrumSolution uniform_ring(const ModelParams& p) {
  const int n = p.sites();
  SpectrumSolution sol{p, {}, 0, 0.0, true, 0.0, 0.0, {}};
  sol.levels.reserve(static_cast<std::size_t>(n));
  for (int m = 1; m <= n; ++m) {
    const double k = 2.0 * kPi * m / n;
    LevelClass cls = RealLevel{};
    if (m == n) cls = SpecialLevel{SpecialKind::BandTop, ThetaBranch::Real};
    if (2 * m == n) cls = SpecialLevel{SpecialKind::BandBottom, ThetaBranch::Real};
    sol.levels.push_back(make_level(p, m, k, cls));
  }
  sol.notes.push_back("uniform ring: analytic spectrum");
  return finish(std::move(sol));
}

SpectrumSolution unit_product(const ModelParams& p) {
  const int n = p.sites();
  const double decay = std::log(p.nu()) / n;
  SpectrumSolution sol{p, {}, 0, 0.0, true, 0.0, 0.0, {}};
  sol.levels.reserve(static_cast<std::size_t>(n));
  for (int m = 1; m <= n; ++m) {
    const cplx k{2.0 * kPi * m / n, decay};
    LevelClass cls;
    if (m == n) {
      cls = SpecialLevel{SpecialKind::BandTop, ThetaBranch::Complex};
    } else if (2 * m == n) {
      cls = SpecialLevel{SpecialKind::BandBottom, ThetaBranch::Complex};
    } else {
      cls = ComplexPairMember{energy_sign(2.0 * std::cos(k))};
    }
    auto lv = make_level(p, m, k, cls);
    if (2 * m == n || m == n) lv.energy = {lv.energy.real(), 0.0};
    sol.levels.push_back(lv);
  }
  // Levels n and N - n are conjugate partners; make that exact.
  for (int m = n / 2 + 1; m < n; ++m) {
    sol.levels[static_cast<std::size_t>(m - 1)].energy = std::conj(sol.levels[static_cast<std::size_t>(n - m - 1)].energy);
  }
  return finish(std::move(sol));
}

}  // namespace

std::string describe(const LevelClass& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealLevel>) {
          return "real";
        } else if constexpr (std::is_same_v<T, ComplexPairMember>) {
          return v.sign > 0 ? "complex+" : "complex-";
        } else {
          std::string s = v.kind == SpecialKind::BandTop ? "special-top" : "special-bottom";
          return s + (v.branch == ThetaBranch::Real ? "/real-theta" : "/complex-theta");
        }
      },
      c);
}

RootRefinementError::RootRefinementError(cplx seed_, cplx last_, double residual_)
    : std::runtime_error("root refinement failed: seed=" + format_cplx(seed_) + " last=" +
                         format_cplx(last_) + " residual=" + std::to_string(residual_)),
      seed(seed_),
      last(last_),
      residual(residual_) {}

CompletenessError::CompletenessError(int moment_, double error_, const std::string& detail)
    : std::runtime_error("spectrum incomplete: trace moment p=" + std::to_string(moment_) +
                         " off by " + std::to_string(error_) + " (" + detail + ")"),
      moment(moment_),
      error(error_) {}

double classification_tolerance(const ModelParams& params) {
  const double scale = std::abs(std::log(params.product())) / params.sites();
  return 1e-9 / std::max(1.0, scale);
}

bool is_unit_product(const ModelParams& params) {
  return std::abs(params.product() - 1.0) <= kUnitProductTol;
}

double phase_angle(const ModelParams& params, double q) {
  if (is_unit_product(params)) {
    throw SpecialCaseDispatch("phase angle undefined at mu*nu = 1");
  }
  const double mn = params.product();
  double phi = std::atan2((1.0 + mn) * std::sin(q), (1.0 - mn) * std::cos(q));
  if (phi <= 0.0) phi += 2.0 * kPi;
  return phi;
}

double phi_n(const ModelParams& params, int n) {
  const int big_n = params.sites();
  if (n < 1 || n >= big_n || 2 * n == big_n) {
    throw std::invalid_argument("phi_n: level " + std::to_string(n) + " has no cell phase");
  }
  return phase_angle(params, 2.0 * kPi * n / big_n);
}

cplx big_theta_at(const ModelParams& params, double q) {
  const double mn = params.product();
  const double s = std::sin(q);
  const double denom = std::sqrt((1.0 - mn) * (1.0 - mn) + 4.0 * mn * s * s);
  const double x = (params.mu() + params.nu()) * s / denom;
  if (std::abs(x) <= 1.0) return std::asin(x);
  return {std::copysign(kPi / 2.0, x), std::acosh(std::abs(x))};
}

cplx big_theta_n(const ModelParams& params, int n) {
  const int big_n = params.sites();
  if (n < 1 || n >= big_n || 2 * n == big_n) {
    throw std::invalid_argument("big_theta_n: level " + std::to_string(n) + " is a special level");
  }
  return big_theta_at(params, 2.0 * kPi * n / big_n);
}

cplx secular_function(const ModelParams& params, cplx k) {
  const double n = params.sites();
  return std::sin(k * (1.0 + n)) + params.product() * std::sin(k * (1.0 - n)) -
         (params.mu() + params.nu()) * std::sin(k);
}

cplx secular_derivative(const ModelParams& params, cplx k) {
  const double n = params.sites();
  return (1.0 + n) * std::cos(k * (1.0 + n)) + params.product() * (1.0 - n) * std::cos(k * (1.0 - n)) -
         (params.mu() + params.nu()) * std::cos(k);
}

cplx secular_second_derivative(const ModelParams& params, cplx k) {
  const double n = params.sites();
  return -(1.0 + n) * (1.0 + n) * std::sin(k * (1.0 + n)) -
         params.product() * (1.0 - n) * (1.0 - n) * std::sin(k * (1.0 - n)) +
         (params.mu() + params.nu()) * std::sin(k);
}

double secular_residual(const ModelParams& params, cplx k) {
  const double n = params.sites();
  const double a = std::abs(k.imag()) * (n + 1.0);
  const cplx f = scaled_sin(k * (1.0 + n), a) + params.product() * scaled_sin(k * (1.0 - n), a) -
                 (params.mu() + params.nu()) * scaled_sin(k, a);
  const double cosh_scaled = 0.5 * (1.0 + std::exp(-2.0 * a));
  return std::abs(f) / std::max(std::exp(-a), cosh_scaled);
}

cplx refine_root(const ModelParams& params, cplx k0) {
  cplx k = k0;
  // Already at the rounding floor: Newton would only wander near a double root.
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * (params.sites() + 1.0);
  for (int it = 0; it < kMaxNewton; ++it) {
    if (secular_residual(params, k) <= floor) break;
    const cplx d = secular_derivative(params, k);
    if (d == cplx{}) break;
    const cplx step = secular_function(params, k) / d;
    k -= step;
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) break;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(k))) break;
  }
  const double res = secular_residual(params, k);
  if (!(res <= spectrum_budget(params))) throw RootRefinementError(k0, k, res);
  return k;
}

std::array<QuasiMomentum, 2> solve_special_levels(const ModelParams& params) {
  const double n = params.sites();
  const double mn = params.product();
  const double sum = params.mu() + params.nu();
  const double p2 = (n + 1.0) - mn * (n - 1.0) - sum;

  cplx theta{};
  ThetaBranch branch = ThetaBranch::Real;
  auto tol = boost::math::tools::eps_tolerance<double>(53);

  if (p2 > 0.0) {
    // F(k) = sin k * g(k); g(0+) = P(2) > 0 and g(pi/N) < 0.
    auto g = [&](double k) {
      if (k == 0.0) return p2;
      return (1.0 - mn) * std::sin(n * k) / std::tan(k) + (1.0 + mn) * std::cos(n * k) - sum;
    };
    boost::uintmax_t iters = 300;
    const double hi = kPi / n;
    auto r = boost::math::tools::toms748_solve(g, 0.0, hi, p2, g(hi), tol, iters);
    theta = 0.5 * (r.first + r.second);
  } else if (p2 < 0.0) {
    // Imaginary branch k = i kappa; Q(0+) = P(2) < 0 and Q(inf) = 2.
    branch = ThetaBranch::Complex;
    auto sech = [](double x) { return x > 700.0 ? 0.0 : 1.0 / std::cosh(x); };
    auto qf = [&](double kappa) {
      if (kappa == 0.0) return p2;
      return (1.0 - mn) * std::tanh(n * kappa) / std::tanh(kappa) + (1.0 + mn) - sum * sech(n * kappa);
    };
    double hi = 1.0;
    while (qf(hi) <= 0.0) {
      hi *= 2.0;
      if (hi > 1e6) throw SpecialLevelError("special level: imaginary branch not bracketed");
    }
    boost::uintmax_t iters = 300;
    auto r = boost::math::tools::toms748_solve(qf, 0.0, hi, p2, qf(hi), tol, iters);
    theta = {0.0, 0.5 * (r.first + r.second)};
  }

  const int big_n = params.sites();
  auto top = make_level(params, big_n, 2.0 * kPi + theta, SpecialLevel{SpecialKind::BandTop, branch});
  auto bottom =
      make_level(params, big_n / 2, kPi + theta, SpecialLevel{SpecialKind::BandBottom, branch});
  // Both energies are real on either branch.
  top.energy = {top.energy.real(), 0.0};
  bottom.energy = {bottom.energy.real(), 0.0};
  top.theta = theta;
  bottom.theta = theta;

  const double budget = spectrum_budget(params);
  for (const auto* lv : {&top, &bottom}) {
    if (!(lv->residual <= budget)) {
      throw SpecialLevelError("special level n=" + std::to_string(lv->n) + " residual " +
                              std::to_string(lv->residual) + " exceeds tolerance (P(2)=" +
                              std::to_string(p2) + ")");
    }
  }
  return {top, bottom};
}

SpectrumSolution solve_spectrum(const ModelParams& params) {
  if (params.mu() == 1.0 && params.nu() == 1.0) return uniform_ring(params);
  if (is_unit_product(params)) return unit_product(params);

  const int big_n = params.sites();
  SpectrumSolution sol{params, {}, 0, 0.0, false, 0.0, 0.0, {}};
  sol.levels.resize(static_cast<std::size_t>(big_n));

  for (int n = 1; 2 * n < big_n; ++n) {
    const CellPair cell = CellSolver(params, n).solve();
    if (cell.near_coalescent) {
      sol.notes.push_back("near-coalescent pair in cell n=" + std::to_string(n));
    }
    const cplx k_lo = cell.first;
    const cplx k_hi = 2.0 * kPi - cell.second;
    LevelClass c_lo = RealLevel{};
    LevelClass c_hi = RealLevel{};
    if (cell.complex) {
      c_lo = ComplexPairMember{energy_sign(2.0 * std::cos(k_lo))};
      c_hi = ComplexPairMember{energy_sign(2.0 * std::cos(k_hi))};
    }
    auto lo = make_level(params, n, k_lo, c_lo);
    auto hi = make_level(params, big_n - n, k_hi, c_hi);
    if (cell.complex) {
      // Members are exact conjugates by construction.
      hi.energy = std::conj(lo.energy);
    } else {
      lo.energy = {lo.energy.real(), 0.0};
      hi.energy = {hi.energy.real(), 0.0};
    }
    sol.levels[static_cast<std::size_t>(n - 1)] = lo;
    sol.levels[static_cast<std::size_t>(big_n - n - 1)] = hi;
  }

  const auto special = solve_special_levels(params);
  sol.levels[static_cast<std::size_t>(big_n - 1)] = special[0];
  sol.levels[static_cast<std::size_t>(big_n / 2 - 1)] = special[1];
  return finish(std::move(sol));
}

}  // namespace dimerring
