#include "dimerring/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace dimerring {

namespace {

constexpr double kPi = std::numbers::pi;

// cosh(x) * exp(-m)
double cosh_scaled(double x, double m) { return 0.5 * (std::exp(x - m) + std::exp(-x - m)); }

// Unit-product limit of the complex-level CoM, Im alpha -> -inf.
double com_alpha_limit(int sites, double k) {
  const double n = sites;
  const double x = 1.0 - (1.0 + n) * std::exp(-2.0 * k * n) + n * std::exp(-2.0 * k * (n + 1.0));
  return x / std::sinh(k) / (4.0 * n * std::exp(-k * (n + 1.0)) * std::sinh(k * n));
}

}  // namespace

std::string to_string(BondRange r) { return r == BondRange::Interior ? "interior" : "all"; }

BondRange parse_bond_range(const std::string& text) {
  if (text == "interior") return BondRange::Interior;
  if (text == "all") return BondRange::AllBulk;
  throw std::invalid_argument("bond range must be 'interior' or 'all' (got '" + text + "')");
}

double state_com(const EigenState& state) {
  const auto& f = state.amplitudes;
  const double n = static_cast<double>(f.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::norm(f[i]);
    num += static_cast<double>(i + 1) * w;
    den += w;
  }
  return num / (den * n);
}

std::vector<double> state_current_profile(const EigenState& state) {
  const auto& f = state.amplitudes;
  std::vector<double> j(f.size() - 1);
  // -i (a* b - b* a) = 2 Im(a* b)
  for (std::size_t i = 0; i + 1 < f.size(); ++i) j[i] = 2.0 * (std::conj(f[i]) * f[i + 1]).imag();
  return j;
}

double bond_current_sum(const std::vector<double>& profile, BondRange range) {
  const std::size_t first = range == BondRange::Interior ? 1 : 0;
  const std::size_t last = range == BondRange::Interior ? profile.size() - 1 : profile.size();
  double s = 0.0;
  for (std::size_t i = first; i < last; ++i) s += profile[i];
  return s;
}

StateObservables state_observables(const EigenState& state, BondRange range) {
  StateObservables out;
  out.com = state_com(state);
  out.current_profile = state_current_profile(state);
  out.current_sum = bond_current_sum(out.current_profile, range);
  return out;
}

double ratio_g_closed_form(const ModelParams& params) {
  const double mu = params.mu();
  const double nu = params.nu();
  // Checked first so the Hermitian point mu = nu = 1 is not taken as a unit product.
  if ((mu - 1.0) * (nu - 1.0) >= 0.0) return 0.0;
  if (is_unit_product(params)) return 1.0;
  const double kc = std::abs(std::asin((1.0 - mu * nu) / (nu - mu)));
  return (kPi - 2.0 * kc) / kPi;
}

int fragile_level_count(const ModelParams& params) {
  const int n = params.sites();
  if (params.mu() == params.nu()) return 0;
  const double d = params.mu() - params.nu();
  const double bound = (params.product() - 1.0) * (params.product() - 1.0) / (d * d);
  int count = 0;
  for (int m = 1; m < n; ++m) {
    if (2 * m == n) continue;
    const double s = std::sin(2.0 * kPi * m / n);
    if (s * s > bound) ++count;
  }
  return count;
}

double complex_level_com_closed_form(int sites, double k_imag, double alpha_imag) {
  if (std::isinf(alpha_imag)) return com_alpha_limit(sites, alpha_imag < 0 ? k_imag : -k_imag);
  const double n = sites;
  const double k = k_imag;
  const double a = alpha_imag;
  const double m = 2.0 * std::abs(a);
  const double x = cosh_scaled(2.0 * a, m) - (1.0 + n) * cosh_scaled(2.0 * (k * n + a), m) +
                   n * cosh_scaled(2.0 * (k + k * n + a), m);
  const double y = cosh_scaled(k + k * n + 2.0 * a, m);
  return x / std::sinh(k) / (4.0 * n * y * std::sinh(k * n));
}

double unit_product_com_large_n(int sites, double nu) {
  const double n = sites;
  return 1.0 / ((std::pow(nu, 2.0 / n) - 1.0) * n) + 1.0 / (1.0 - nu * nu);
}

double complex_level_current_shape(cplx k, cplx alpha, int bond) {
  return -std::sin(k.real()) * std::sinh(2.0 * k.imag() * bond + 2.0 * alpha.imag() + k.imag());
}

Occupation fill_ground_state(const SpectrumSolution& spectrum) {
  const int n = spectrum.params.sites();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 1);
  auto energy = [&](int m) { return spectrum.level(m).energy; };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const cplx ea = energy(a);
    const cplx eb = energy(b);
    if (ea.real() != eb.real()) return ea.real() < eb.real();
    return ea.imag() < eb.imag();
  });

  Occupation occ;
  std::vector<int> taken(order.begin(), order.begin() + n / 2);
  std::set<int> in(taken.begin(), taken.end());
  auto paired = [&](int m) { return spectrum.level(m).is_complex_pair(); };

  for (int m : std::vector<int>(taken)) {
    if (!paired(m)) continue;
    const int partner = n - m;
    if (in.count(partner)) continue;
    // Keep the pair together; drop the highest singlet instead.
    auto victim = std::find_if(taken.rbegin(), taken.rend(), [&](int x) { return !paired(x); });
    if (victim == taken.rend()) throw OccupationError("no singlet available to keep a conjugate pair filled");
    occ.pair_adjusted = true;
    occ.excluded_level = *victim;
    in.erase(*victim);
    taken.erase(std::next(victim).base());
    taken.push_back(partner);
    in.insert(partner);
  }
  std::stable_sort(taken.begin(), taken.end(), [&](int a, int b) {
    const cplx ea = energy(a);
    const cplx eb = energy(b);
    if (ea.real() != eb.real()) return ea.real() < eb.real();
    return ea.imag() < eb.imag();
  });
  for (int m : taken) {
    if (paired(m) && !in.count(n - m)) throw OccupationError("occupied set not closed under conjugation");
  }
  occ.levels = std::move(taken);
  return occ;
}

GroundStateReport ground_state_report(const SpectrumSolution& spectrum, const ReportOptions& options) {
  const auto& p = spectrum.params;
  const double n = p.sites();
  GroundStateReport rep{.params = p, .occupied = {}};
  rep.n_complex = spectrum.n_complex;
  rep.g = spectrum.g;
  rep.bond_range = options.bond_range;
  rep.occupied = fill_ground_state(spectrum);

  double e_sum = 0.0;
  double im_sum = 0.0;
  double com_sum = 0.0;
  double stag = 0.0;
  int rank = 0;
  for (int m : rep.occupied.levels) {
    ++rank;
    const auto& qm = spectrum.level(m);
    const auto st = wavefunction(p, qm);
    rep.worst_residual = std::max(rep.worst_residual, st.residual);
    e_sum += qm.energy.real();
    im_sum += qm.energy.imag();
    com_sum += state_com(st);
    const double current = bond_current_sum(state_current_profile(st), options.bond_range);
    stag += (rank % 2 == 0 ? 1.0 : -1.0) * current;
  }
  rep.e_g = 2.0 / n * e_sum;
  rep.im_energy_sum = im_sum;
  rep.r_c = 2.0 / n * com_sum;
  rep.j_stag = 2.0 / n * stag;
  rep.eta = rep.r_c - 0.5;
  return rep;
}

GroundStateReport ground_state_report(const ModelParams& params, const ReportOptions& options) {
  return ground_state_report(solve_spectrum(params), options);
}

}  // namespace dimerring
