#include "dimerring/eigenstates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dimerring {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Above this |Im k| (N + 2) the phase form overflows or loses all digits.
constexpr double kPhaseFormLimit = 300.0;
constexpr double kPhaseAcceptResidual = 1e-11;

cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

double max_abs(const std::vector<cplx>& f) {
  double m = 0.0;
  for (const auto& x : f) m = std::max(m, std::abs(x));
  return m;
}

double sum_sq(const std::vector<cplx>& f) {
  double s = 0.0;
  for (const auto& x : f) s += std::norm(x);
  return s;
}

// Unit norm, then a global phase making the first (near-)maximal entry real positive.
void normalize_and_fix_gauge(std::vector<cplx>& f) {
  const double norm = std::sqrt(sum_sq(f));
  for (auto& x : f) x /= norm;
  const double peak = max_abs(f);
  for (const auto& x : f) {
    if (std::abs(x) >= (1.0 - 1e-6) * peak) {
      const cplx phase = std::conj(x) / std::abs(x);
      for (auto& y : f) y *= phase;
      break;
    }
  }
}

std::vector<cplx> phase_form(const ModelParams& p, cplx k, cplx alpha) {
  const int n = p.sites();
  std::vector<cplx> f(static_cast<std::size_t>(n));
  for (int l = 1; l <= n; ++l) f[static_cast<std::size_t>(l - 1)] = std::sin(k * static_cast<double>(l) + alpha);
  return f;
}

// Two bulk solutions combined so both boundary rows vanish.
std::vector<cplx> null_vector_form(const ModelParams& p, cplx k) {
  const int n = p.sites();
  cplx kr = k.imag() < 0.0 ? -k : k;
  kr = {std::remainder(kr.real(), 2.0 * kPi), kr.imag()};
  bool flip = false;
  if (std::abs(kr.real()) > kPi / 2.0) {
    // Sublattice sign flip maps e to -e.
    kr -= std::copysign(kPi, kr.real());
    flip = true;
  }
  const cplx e = 2.0 * std::cos(kr);
  const auto sz = static_cast<std::size_t>(n);
  std::vector<cplx> b1(sz);
  std::vector<cplx> b2(sz);
  if (std::abs(kr) * n < 1.0) {
    const double c = 0.5 * (n + 1);
    for (int l = 1; l <= n; ++l) {
      const double x = l - c;
      b1[static_cast<std::size_t>(l - 1)] = std::cos(kr * x);
      b2[static_cast<std::size_t>(l - 1)] = x * sinc(kr * x);
    }
  } else {
    for (int l = 1; l <= n; ++l) {
      b1[static_cast<std::size_t>(l - 1)] = std::exp(kI * kr * static_cast<double>(l));
      b2[static_cast<std::size_t>(l - 1)] = std::exp(kI * kr * static_cast<double>(n - l));
    }
  }
  auto first_row = [&](const std::vector<cplx>& b) { return b[1] + p.nu() * b[sz - 1] - e * b[0]; };
  auto last_row = [&](const std::vector<cplx>& b) { return b[sz - 2] + p.mu() * b[0] - e * b[sz - 1]; };
  const cplx m00 = first_row(b1);
  const cplx m01 = first_row(b2);
  const cplx m10 = last_row(b1);
  const cplx m11 = last_row(b2);
  const bool use_first = std::norm(m00) + std::norm(m01) >= std::norm(m10) + std::norm(m11);
  const cplx r0 = use_first ? m00 : m10;
  const cplx r1 = use_first ? m01 : m11;

  std::vector<cplx> f(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    f[i] = r1 * b1[i] - r0 * b2[i];
    if (flip && (i % 2 == 0)) f[i] = -f[i];  // site l = i + 1 odd
  }
  return f;
}

std::vector<cplx> standing_wave(int n_sites, int level) {
  std::vector<cplx> f(static_cast<std::size_t>(n_sites));
  const double q = 2.0 * kPi * level / n_sites;
  for (int l = 1; l <= n_sites; ++l) {
    double v = 0.0;
    if (level == n_sites) {
      v = 1.0;
    } else if (2 * level == n_sites) {
      v = (l % 2 == 0) ? 1.0 : -1.0;
    } else if (2 * level < n_sites) {
      v = std::cos(q * l);
    } else {
      v = std::sin(q * l);
    }
    f[static_cast<std::size_t>(l - 1)] = v;
  }
  return f;
}

}  // namespace

std::string to_string(Locality l) {
  switch (l) {
    case Locality::Extended: return "extended";
    case Locality::Localized: return "localized";
    case Locality::SemiLocalized: return "semi-localized";
  }
  return "unknown";
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::PhaseAlpha: return "phase-alpha";
    case Representation::BoundaryNullVector: return "boundary-null-vector";
    case Representation::UnitProduct: return "unit-product";
    case Representation::StandingWave: return "standing-wave";
  }
  return "unknown";
}

StateConstructionError::StateConstructionError(int level_, int worst_site_, double residual_)
    : std::runtime_error("eigenstate n=" + std::to_string(level_) + " fails residual check: " +
                         std::to_string(residual_) + " at site " + std::to_string(worst_site_)),
      level(level_),
      worst_site(worst_site_),
      residual(residual_) {}

PhaseAlpha phase_alpha(const ModelParams& params, cplx k) {
  const double n = params.sites();
  if (std::abs(k.imag()) * (n + 2.0) > kPhaseFormLimit) {
    throw DegeneratePhase("phase form overflows for |Im k| N = " + std::to_string(std::abs(k.imag()) * n));
  }
  const double mn = params.product();
  const cplx e_n = std::exp(kI * k * n);
  const cplx zp = params.nu() - e_n - params.nu() * std::exp(-2.0 * kI * k) + mn * std::exp(kI * k * (n - 2.0));
  const cplx zm = (mn - 1.0) * e_n;
  PhaseAlpha out;
  out.s = 0.5 * (zp + zm);
  out.c = (zp - zm) / (2.0 * kI);
  const double scale = std::max(std::abs(zp), std::abs(zm));
  if (std::abs(out.s) < 1e-12 && std::abs(out.c) < 1e-12) {
    throw DegeneratePhase("s and c both vanish");
  }
  if (std::abs(zp) < 1e-14 * scale || std::abs(zm) < 1e-14 * scale) {
    throw DegeneratePhase("phase ratio is singular");
  }
  out.alpha = -0.5 * kI * std::log(zp / zm);
  if (std::abs(out.alpha.imag()) > kPhaseFormLimit) {
    throw DegeneratePhase("phase has runaway imaginary part");
  }
  return out;
}

double eigen_residual(const ModelParams& params, const std::vector<cplx>& f, cplx energy) {
  const auto hf = HamiltonianMatrix(params).apply(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(hf[i] - energy * f[i]));
  const double scale = max_abs(f);
  return scale > 0.0 ? worst / scale : worst;
}

Locality classify_locality(const ModelParams& params, cplx k) {
  const double im = std::abs(k.imag());
  if (im <= classification_tolerance(params)) return Locality::Extended;
  const double n = params.sites();
  constexpr double c_loc = 4.0;
  return im * n > c_loc * std::log(n) ? Locality::Localized : Locality::SemiLocalized;
}

EigenState wavefunction(const ModelParams& params, const QuasiMomentum& qm) {
  const int n = params.sites();
  EigenState st;
  st.qm = qm;
  st.alpha = {std::nan(""), std::nan("")};

  if (params.mu() == 1.0 && params.nu() == 1.0) {
    st.amplitudes = standing_wave(n, qm.n);
    st.representation = Representation::StandingWave;
  } else if (is_unit_product(params)) {
    st.amplitudes.resize(static_cast<std::size_t>(n));
    for (int l = 1; l <= n; ++l) st.amplitudes[static_cast<std::size_t>(l - 1)] = std::exp(kI * qm.k * static_cast<double>(l));
    st.representation = Representation::UnitProduct;
  } else {
    double phase_res = std::numeric_limits<double>::infinity();
    try {
      const auto pa = phase_alpha(params, qm.k);
      st.alpha = pa.alpha;
      st.amplitudes = phase_form(params, qm.k, pa.alpha);
      st.representation = Representation::PhaseAlpha;
      phase_res = eigen_residual(params, st.amplitudes, qm.energy);
    } catch (const DegeneratePhase&) {
    }
    if (!(phase_res <= kPhaseAcceptResidual * n)) {
      auto alt = null_vector_form(params, qm.k);
      if (!(eigen_residual(params, alt, qm.energy) > phase_res)) {
        st.amplitudes = std::move(alt);
        st.representation = Representation::BoundaryNullVector;
      }
    }
  }

  st.omega = sum_sq(st.amplitudes);
  normalize_and_fix_gauge(st.amplitudes);
  st.locality = classify_locality(params, qm.k);
  if (st.locality != Locality::Extended) st.decay_length = 1.0 / std::abs(2.0 * qm.k.imag());

  const auto hf = HamiltonianMatrix(params).apply(st.amplitudes);
  double worst = 0.0;
  int worst_site = 1;
  for (int l = 1; l <= n; ++l) {
    const auto i = static_cast<std::size_t>(l - 1);
    const double r = std::abs(hf[i] - qm.energy * st.amplitudes[i]);
    if (r > worst) {
      worst = r;
      worst_site = l;
    }
  }
  st.residual = worst / max_abs(st.amplitudes);
  if (!(st.residual <= 1e-9 * n)) throw StateConstructionError(qm.n, worst_site, st.residual);
  return st;
}

BiorthogonalPartner biorthogonal_partner_for(const ModelParams& params, const QuasiMomentum& qm,
                                             const std::vector<cplx>& right) {
  QuasiMomentum mirror = qm;
  mirror.k = std::conj(qm.k);
  mirror.energy = std::conj(qm.energy);
  const auto left = wavefunction(params.swapped(), mirror);
  BiorthogonalPartner out;
  out.amplitudes.resize(left.amplitudes.size());
  cplx overlap{};
  for (std::size_t i = 0; i < right.size(); ++i) {
    out.amplitudes[i] = std::conj(left.amplitudes[i]);
    overlap += out.amplitudes[i] * right[i];
  }
  if (std::abs(overlap) < 1e-10) {
    throw NearExceptionalPoint("biorthogonal overlap " + std::to_string(std::abs(overlap)) +
                               " for level n=" + std::to_string(qm.n) + ": coalescing pair");
  }
  for (auto& x : out.amplitudes) x /= overlap;
  return out;
}

BiorthogonalPartner biorthogonal_partner(const ModelParams& params, const QuasiMomentum& qm) {
  return biorthogonal_partner_for(params, qm, wavefunction(params, qm).amplitudes);
}

}  // namespace dimerring
