#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dimerring/model.hpp"

namespace dimerring {

struct RealLevel {};

// sign follows Im(energy): +1 or -1.
struct ComplexPairMember {
  int sign;
};

enum class SpecialKind { BandTop, BandBottom };  // n = N and n = N/2
enum class ThetaBranch { Real, Complex };

struct SpecialLevel {
  SpecialKind kind;
  ThetaBranch branch;
};

using LevelClass = std::variant<RealLevel, ComplexPairMember, SpecialLevel>;

struct QuasiMomentum {
  int n = 0;
  cplx k;
  cplx theta;   // k - 2 n pi / N
  cplx energy;  // 2 cos k
  LevelClass classification = RealLevel{};
  double residual = 0.0;  // scaled secular residual after polishing

  bool is_complex_pair() const noexcept {
    return std::holds_alternative<ComplexPairMember>(classification);
  }
  bool is_special() const noexcept { return std::holds_alternative<SpecialLevel>(classification); }
};

std::string describe(const LevelClass& c);

struct SpectrumSolution {
  ModelParams params;
  std::vector<QuasiMomentum> levels;  // index i holds level n = i + 1
  int n_complex = 0;
  double g = 0.0;
  bool closed_form = false;  // uniform ring or mu*nu = 1
  double trace1_error = 0.0;
  double trace2_error = 0.0;
  std::vector<std::string> notes;

  const QuasiMomentum& level(int n) const { return levels.at(static_cast<std::size_t>(n - 1)); }
};

// Thrown by the per-level closed forms when mu*nu = 1; solve_spectrum
// handles that point through its own closed form.
class SpecialCaseDispatch : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RootRefinementError : public std::runtime_error {
 public:
  RootRefinementError(cplx seed, cplx last, double residual);
  cplx seed;
  cplx last;
  double residual;
};

class CompletenessError : public std::runtime_error {
 public:
  CompletenessError(int moment, double error, const std::string& detail);
  int moment;
  double error;
};

class SpecialLevelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cutoff on |Im k| separating real from complex quasi-momenta.
double classification_tolerance(const ModelParams& params);

// True when mu*nu is one to within rounding.
bool is_unit_product(const ModelParams& params);

// Cell phase at reference momentum q, in (0, 2 pi).
double phase_angle(const ModelParams& params, double q);
double phi_n(const ModelParams& params, int n);

cplx big_theta_at(const ModelParams& params, double q);
cplx big_theta_n(const ModelParams& params, int n);

cplx secular_function(const ModelParams& params, cplx k);
cplx secular_derivative(const ModelParams& params, cplx k);
cplx secular_second_derivative(const ModelParams& params, cplx k);

// |F(k)| / max(1, cosh(|Im k| (N+1))), evaluated without overflow.
double secular_residual(const ModelParams& params, cplx k);

// Newton polish; throws RootRefinementError after 50 iterations.
cplx refine_root(const ModelParams& params, cplx k0);

// Levels n = N and n = N/2, in that order.
std::array<QuasiMomentum, 2> solve_special_levels(const ModelParams& params);

SpectrumSolution solve_spectrum(const ModelParams& params);

}  // namespace dimerring
