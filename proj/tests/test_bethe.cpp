#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dimerring/bethe.hpp"
#include "dimerring/observables.hpp"
#include "dimerring/oracle.hpp"

using namespace dimerring;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<cplx> energies(const SpectrumSolution& s) {
  std::vector<cplx> e;
  for (const auto& lv : s.levels) e.push_back(lv.energy);
  return e;
}

}  // namespace

TEST_CASE("phi_n angle map") {
  const int n_sites = 42;
  const auto small = ModelParams::create(n_sites, 0.1, 0.1);
  for (int n = 1; n < n_sites; ++n) {
    if (2 * n == n_sites) continue;
    const double q = 2.0 * kPi * n / n_sites;
    const double phi = phi_n(small, n);
    // Same tangent, and within a quarter turn of q itself.
    CHECK(std::tan(phi) == doctest::Approx(1.01 / 0.99 * std::tan(q)).epsilon(1e-9));
    CHECK(std::abs(std::remainder(phi - q, 2.0 * kPi)) < 0.05);
  }
  const auto p = ModelParams::create(n_sites, 2.0, 3.0);
  const double phi5 = phi_n(p, 5);
  CHECK(std::tan(phi5) == doctest::Approx(7.0 / -5.0 * std::tan(2.0 * kPi * 5 / n_sites)));
  CHECK(phi_n(p, n_sites - 5) == doctest::Approx(2.0 * kPi - phi5).epsilon(1e-13));
  // Symmetry point q = pi/2 on the continuous branch.
  CHECK(phase_angle(p, kPi / 2) == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(phi_n(ModelParams::create(10, 2.0, 0.5), 1), SpecialCaseDispatch);
}

TEST_CASE("big_theta branches") {
  const auto u = ModelParams::create(42, 1.0, 1.0);
  for (int n : {1, 5, 13, 30}) {
    const cplx t = big_theta_n(u, n);
    CHECK(std::abs(t.imag()) < 1e-7);
    CHECK(std::abs(std::abs(t.real()) - kPi / 2) < 1e-7);
  }
  const auto p = ModelParams::create(42, 2.0, 0.5);
  const cplx t = big_theta_at(p, kPi / 2);
  CHECK(t.real() == doctest::Approx(kPi / 2));
  CHECK(t.imag() == doctest::Approx(std::acosh(1.25)));
  const auto r = ModelParams::create(42, 2.0, 3.0);
  for (int n = 1; n < 42; ++n) {
    if (n != 21) CHECK(big_theta_n(r, n).imag() == 0.0);
  }
}

TEST_CASE("secular function") {
  const auto u = ModelParams::create(14, 1.0, 1.0);
  for (int n = 1; n <= 14; ++n) CHECK(std::abs(secular_function(u, 2.0 * kPi * n / 14)) < 1e-13);
  const auto up = ModelParams::create(150, 0.2, 5.0);
  for (int n : {1, 17, 74, 75, 149, 150}) {
    const cplx k(2.0 * kPi * n / 150, std::log(5.0) / 150);
    CHECK(secular_residual(up, k) < 1e-12);
  }
  const auto p = ModelParams::create(10, 1.5, 0.5);
  CHECK(std::abs(secular_function(p, {0.3, 0.01})) > 1e-3);
  // Analytic derivatives against central differences.
  const cplx k0(0.7, 0.05);
  const double h = 1e-6;
  const cplx fd = (secular_function(p, k0 + h) - secular_function(p, k0 - h)) / (2.0 * h);
  CHECK(std::abs(fd - secular_derivative(p, k0)) < 1e-6);
  const cplx fd2 = (secular_derivative(p, k0 + h) - secular_derivative(p, k0 - h)) / (2.0 * h);
  CHECK(std::abs(fd2 - secular_second_derivative(p, k0)) < 1e-5);
}

TEST_CASE("refine_root") {
  const auto u = ModelParams::create(6, 1.0, 1.0);
  CHECK(std::abs(refine_root(u, 2.0 * kPi / 6) - 2.0 * kPi / 6) < 1e-14);

  const auto p = ModelParams::create(42, 1.9, 0.3);
  int checked = 0;
  for (int n = 1; n < 21; ++n) {
    const cplx seed = 2.0 * kPi * n / 42 + (big_theta_n(p, n) - phi_n(p, n)) / 42.0;
    const double before = std::abs(secular_function(p, seed));
    const cplx k = refine_root(p, seed);
    const double after = std::abs(secular_function(p, k));
    CHECK(after <= 1e-10 * 42);
    if (before > 1e-6) {
      CHECK(before / std::max(after, 1e-300) >= 1e6);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("polished roots match oracle eigen-roots at N=10") {
  for (auto [mu, nu] : {std::pair{1.9, 0.3}, {2.0, 0.5}, {0.3, 0.4}, {3.0, 2.0}}) {
    const auto p = ModelParams::create(10, mu, nu);
    const auto s = solve_spectrum(p);
    const auto roots = poly_roots(char_poly(build_hamiltonian(p)));
    // Compare k = acos(e/2) folded into the Bethe branch of each level.
    std::vector<cplx> ks;
    for (const auto& r : roots) ks.push_back(std::acos(r / 2.0));
    for (const auto& lv : s.levels) {
      double best = 1e9;
      for (const auto& k : ks) {
        for (cplx cand : {k, -k, 2.0 * kPi - k, 2.0 * kPi + k, std::conj(k), 2.0 * kPi - std::conj(k)}) {
          best = std::min(best, std::abs(cand - lv.k));
        }
      }
      CHECK(best < 1e-8);
    }
  }
}

TEST_CASE("special levels") {
  const auto u = ModelParams::create(10, 1.0, 1.0);
  const auto sp = solve_special_levels(u);
  CHECK(std::abs(sp[0].energy - 2.0) < 1e-14);
  CHECK(std::abs(sp[1].energy + 2.0) < 1e-14);

  const auto b = ModelParams::create(42, 10.0, 5.0);
  for (const auto& lv : solve_special_levels(b)) {
    CHECK(std::abs(lv.k.imag()) > 0.1);
    CHECK(std::abs(lv.energy.imag()) < 1e-12);
    const double re_theta = std::remainder(lv.theta.real(), kPi);
    CHECK(std::abs(re_theta) < 1e-12);
  }
  const auto w = ModelParams::create(42, 0.3, 0.4);
  for (const auto& lv : solve_special_levels(w)) CHECK(std::abs(secular_function(w, lv.k)) <= 1e-10 * 42);
}

TEST_CASE("spectrum examples") {
  const auto u = solve_spectrum(ModelParams::create(6, 1.0, 1.0));
  std::vector<double> e;
  for (const auto& lv : u.levels) e.push_back(lv.energy.real());
  std::sort(e.begin(), e.end());
  const std::vector<double> expect{-2, -1, -1, 1, 1, 2};
  for (std::size_t i = 0; i < 6; ++i) CHECK(e[i] == doctest::Approx(expect[i]).epsilon(1e-13));

  const auto up = solve_spectrum(ModelParams::create(150, 0.2, 5.0));
  CHECK(up.n_complex == 150);
  CHECK(up.g == 1.0);
  for (const auto& lv : up.levels) CHECK(std::abs(lv.k.imag() - std::log(5.0) / 150) < 1e-12);

  const auto r = solve_spectrum(ModelParams::create(42, 2.0, 3.0));
  CHECK(r.n_complex == 0);
  CHECK(r.g == 0.0);

  const auto p = ModelParams::create(750, 1.5, 0.5);
  const auto m = solve_spectrum(p);
  CHECK(ratio_g_closed_form(p) == doctest::Approx((kPi - 2.0 * std::asin(0.25)) / kPi));
  CHECK(std::abs(m.g - ratio_g_closed_form(p)) <= 2.0 / 750);
}

TEST_CASE("completeness and pairing over random parameters") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(0.01, 4.0);
  for (int n : {6, 10, 42}) {
    for (int trial = 0; trial < 40; ++trial) {
      const auto p = ModelParams::create(n, d(rng), d(rng));
      const auto s = solve_spectrum(p);
      REQUIRE(s.levels.size() == static_cast<std::size_t>(n));
      cplx s1 = 0.0;
      cplx s2 = 0.0;
      for (const auto& lv : s.levels) {
        s1 += lv.energy;
        s2 += lv.energy * lv.energy;
      }
      CHECK(std::abs(s1) <= 1e-8 * n);
      CHECK(std::abs(s2 - trace_moment(p, 2)) <= 1e-8 * n);
      CHECK(s.n_complex % 2 == 0);
      // Conjugate closure of the complex multiset.
      for (const auto& lv : s.levels) {
        if (std::holds_alternative<RealLevel>(lv.classification)) {
          CHECK(std::abs(lv.k.imag()) <= classification_tolerance(p));
        }
        if (!lv.is_complex_pair()) continue;
        double best = 1e9;
        for (const auto& other : s.levels) best = std::min(best, std::abs(other.energy - std::conj(lv.energy)));
        CHECK(best <= 1e-10);
      }
    }
  }
}

TEST_CASE("onset predicate") {
  for (double mu = 0.5; mu <= 1.5; mu += 0.05) {
    for (double nu = 0.5; nu <= 1.5; nu += 0.05) {
      if (std::abs(1 - mu) < 1e-3 || std::abs(1 - nu) < 1e-3) continue;
      const auto s = solve_spectrum(ModelParams::create(42, mu, nu));
      CHECK_MESSAGE((s.n_complex > 0) == ((1 - mu) * (1 - nu) < 0), "mu=", mu, " nu=", nu);
    }
  }
}

// Levels that sit within half a spacing of the fragility threshold can flip
// at finite N; away from it the predicate must decide every level.
TEST_CASE("fragility ordering") {
  for (int n_sites : {42, 150}) {
    int decided = 0;
    for (double mu = 0.05; mu < 4.0; mu += 0.15) {
      for (double nu = 0.05; nu < 4.0; nu += 0.15) {
        if ((mu - 1) * (nu - 1) >= 0 || std::abs(1 - mu * nu) < 1e-2) continue;
        const auto p = ModelParams::create(n_sites, mu, nu);
        const auto s = solve_spectrum(p);
        const double bound = (mu * nu - 1) * (mu * nu - 1) / ((mu - nu) * (mu - nu));
        const double qs = std::asin(std::sqrt(std::min(1.0, bound)));
        for (int n = 1; n < n_sites; ++n) {
          if (2 * n == n_sites) continue;
          const double q = 2.0 * kPi * n / n_sites;
          double gap = 1e9;
          for (double t : {qs, kPi - qs, kPi + qs, 2 * kPi - qs}) gap = std::min(gap, std::abs(q - t));
          if (gap < 0.5 * 2.0 * kPi / n_sites) continue;
          ++decided;
          CHECK((std::sin(q) * std::sin(q) > bound) == s.level(n).is_complex_pair());
        }
      }
    }
    CHECK(decided > 1000);
  }
  const auto p = ModelParams::create(14, 1.9, 0.3);
  CHECK(cross_validate(p).oracle_complex == solve_spectrum(p).n_complex);
}

TEST_CASE("swap invariance") {
  for (auto [mu, nu] : {std::pair{1.9, 0.3}, {2.0, 3.0}, {0.3, 0.4}, {5.0, 0.2}}) {
    const auto a = ModelParams::create(42, mu, nu);
    CHECK(matched_max_deviation(energies(solve_spectrum(a)), energies(solve_spectrum(a.swapped()))) <= 1e-10);
  }
}
