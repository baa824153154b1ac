#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerring/bethe.hpp"

namespace dimerring {

enum class Locality { Extended, Localized, SemiLocalized };

// Which closed form produced the amplitudes.
enum class Representation { PhaseAlpha, BoundaryNullVector, UnitProduct, StandingWave };

std::string to_string(Locality l);
std::string to_string(Representation r);

struct EigenState {
  QuasiMomentum qm;
  cplx alpha;                     // NaN when the phase form is singular
  std::vector<cplx> amplitudes;   // f_l for l = 1..N stored at index l - 1
  double omega = 0.0;             // sum |f|^2 of the raw representation
  Locality locality = Locality::Extended;
  double decay_length = std::numeric_limits<double>::infinity();
  Representation representation = Representation::PhaseAlpha;
  double residual = 0.0;          // ||H f - e f||_inf / ||f||_inf
};

struct BiorthogonalPartner {
  std::vector<cplx> amplitudes;
};

// Phase data of the sin(k l + alpha) form; tan(alpha) = c / s.
struct PhaseAlpha {
  cplx alpha;
  cplx s;
  cplx c;
};

class DegeneratePhase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StateConstructionError : public std::runtime_error {
 public:
  StateConstructionError(int level, int worst_site, double residual);
  int level;
  int worst_site;
  double residual;
};

class NearExceptionalPoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws DegeneratePhase when both s and c vanish or the ratio is singular.
PhaseAlpha phase_alpha(const ModelParams& params, cplx k);

// ||H f - e f||_inf / ||f||_inf.
double eigen_residual(const ModelParams& params, const std::vector<cplx>& f, cplx energy);

Locality classify_locality(const ModelParams& params, cplx k);

EigenState wavefunction(const ModelParams& params, const QuasiMomentum& qm);

// Left eigenvector scaled so that sum_l partner_l * right_l = 1.
BiorthogonalPartner biorthogonal_partner(const ModelParams& params, const QuasiMomentum& qm);
BiorthogonalPartner biorthogonal_partner_for(const ModelParams& params, const QuasiMomentum& qm,
                                             const std::vector<cplx>& right);

}  // namespace dimerring
