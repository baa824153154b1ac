#pragma once

#include <string>
#include <vector>

#include "dimerring/eigenstates.hpp"

namespace dimerring {

// Bonds entering the staggered current. Interior = l in 2..N-2, which drops
// both bonds adjacent to the dimer; AllBulk = l in 1..N-1.
enum class BondRange { Interior, AllBulk };

std::string to_string(BondRange r);
BondRange parse_bond_range(const std::string& text);

struct StateObservables {
  double com = 0.0;
  std::vector<double> current_profile;  // J_l for l = 1..N-1 at index l - 1
  double current_sum = 0.0;
};

double state_com(const EigenState& state);
std::vector<double> state_current_profile(const EigenState& state);
double bond_current_sum(const std::vector<double>& profile, BondRange range);
StateObservables state_observables(const EigenState& state, BondRange range = BondRange::Interior);

// Large-N ratio of complex levels as a piecewise function of (mu, nu).
double ratio_g_closed_form(const ModelParams& params);

// Number of levels obeying sin^2(2 n pi / N) > (mu nu - 1)^2 / (mu - nu)^2.
int fragile_level_count(const ModelParams& params);

// Closed-form CoM of a complex level from its Im k and Im alpha; alpha_imag
// = -inf gives the unit-product limit.
double complex_level_com_closed_form(int sites, double k_imag, double alpha_imag);

// Large-N CoM at mu nu = 1, measured from site 0.
double unit_product_com_large_n(int sites, double nu);

// Shape approximation -sin(Re k) sinh(2 Im k l + 2 Im alpha + Im k), unnormalized.
double complex_level_current_shape(cplx k, cplx alpha, int bond);

struct Occupation {
  std::vector<int> levels;  // level numbers n, ascending in (Re e, Im e)
  bool pair_adjusted = false;
  int excluded_level = 0;   // singlet dropped to keep a pair together
};

class OccupationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Occupation fill_ground_state(const SpectrumSolution& spectrum);

struct ReportOptions {
  BondRange bond_range = BondRange::Interior;
};

struct GroundStateReport {
  ModelParams params;
  int n_complex = 0;
  double g = 0.0;
  double e_g = 0.0;
  double r_c = 0.0;
  double j_stag = 0.0;
  double eta = 0.0;
  double im_energy_sum = 0.0;
  Occupation occupied{};
  BondRange bond_range = BondRange::Interior;
  double worst_residual = 0.0;
};

GroundStateReport ground_state_report(const SpectrumSolution& spectrum, const ReportOptions& options = {});
GroundStateReport ground_state_report(const ModelParams& params, const ReportOptions& options = {});

}  // namespace dimerring
