#pragma once

#include <stdexcept>
#include <vector>

#include "dimerring/model.hpp"

namespace dimerring {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// det(lambda I - H) = sum_i c_i lambda^i. Each coefficient is stored as an
// unevaluated double-double hi + lo so the quad-precision recurrence result
// survives the trip through the public interface.
struct CharPoly {
  std::vector<double> hi;
  std::vector<double> lo;

  int degree() const noexcept { return static_cast<int>(hi.size()) - 1; }
  double coefficient(int i) const { return hi.at(static_cast<std::size_t>(i)); }
};

inline constexpr int kOracleMaxSites = 64;

// Faddeev-LeVerrier on the sparse structure; throws OracleError for N > 64.
CharPoly char_poly(const HamiltonianMatrix& h);

// Two-site toy used to sanity-check the recurrence.
CharPoly char_poly_dense(const std::vector<double>& row_major, int dim);

struct RootReport {
  std::vector<cplx> roots;
  int sweeps = 0;
  double symmetrization_shift = 0.0;  // largest move made when pairing conjugates
};

// Aberth-Ehrlich in quad precision; conjugate-symmetrized output.
RootReport poly_roots_detailed(const CharPoly& p);
std::vector<cplx> poly_roots(const CharPoly& p);

// Exact Hungarian assignment for size <= 20, greedy with conflict
// resolution above. Returns the largest matched distance.
double matched_max_deviation(const std::vector<cplx>& a, const std::vector<cplx>& b);

struct CrossValidation {
  double max_deviation = 0.0;
  double oracle_trace1_error = 0.0;
  double oracle_trace2_error = 0.0;
  double bethe_trace1_error = 0.0;
  double bethe_trace2_error = 0.0;
  int oracle_complex = 0;  // roots with |Im| above 1e-8
  double symmetrization_shift = 0.0;
};

CrossValidation cross_validate(const ModelParams& params);

}  // namespace dimerring
