#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace dimerring {

using cplx = std::complex<double>;

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ring of N sites with one asymmetric bond: mu hops N -> 1, nu hops 1 -> N.
class ModelParams {
 public:
  // Throws InvalidParams naming the violated invariant.
  static ModelParams create(int sites, double mu, double nu);

  int sites() const noexcept { return sites_; }
  double mu() const noexcept { return mu_; }
  double nu() const noexcept { return nu_; }
  double product() const noexcept { return mu_ * nu_; }
  ModelParams swapped() const noexcept { return ModelParams(sites_, nu_, mu_); }

  bool operator==(const ModelParams&) const = default;

 private:
  ModelParams(int sites, double mu, double nu) : sites_(sites), mu_(mu), nu_(nu) {}
  int sites_;
  double mu_;
  double nu_;
};

// One stored coupling, 1-based indices.
struct Coupling {
  int row;
  int col;
  double value;
};

// Structured sparse storage: unit bulk band plus the two dimer entries.
class HamiltonianMatrix {
 public:
  explicit HamiltonianMatrix(const ModelParams& params) : params_(params) {}

  const ModelParams& params() const noexcept { return params_; }
  int dimension() const noexcept { return params_.sites(); }

  double entry(int row, int col) const;
  std::vector<Coupling> nonzeros() const;

  // Throws std::invalid_argument on length mismatch.
  std::vector<cplx> apply(std::span<const cplx> v) const;

  // Row-major N*N materialization for small-N oracle work.
  std::vector<double> dense() const;

 private:
  ModelParams params_;
};

HamiltonianMatrix build_hamiltonian(const ModelParams& params);

// tr(H^p). p = 1, 2 in closed form, higher powers by repeated matvec.
double trace_moment(const ModelParams& params, int power);

}  // namespace dimerring
