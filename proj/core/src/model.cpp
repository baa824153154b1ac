#include "dimerring/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dimerring {

ModelParams ModelParams::create(int sites, double mu, double nu) {
  if (sites < 6) {
    throw InvalidParams("N must be at least 6 (got " + std::to_string(sites) + ")");
  }
  if (sites % 2 != 0) {
    throw InvalidParams("N must be even (got " + std::to_string(sites) + ")");
  }
  if ((sites / 2) % 2 != 1) {
    throw InvalidParams("N/2 must be odd (got N=" + std::to_string(sites) + ")");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidParams("mu must be positive and finite (got " + std::to_string(mu) + ")");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw InvalidParams("nu must be positive and finite (got " + std::to_string(nu) + ")");
  }
  return ModelParams(sites, mu, nu);
}

double HamiltonianMatrix::entry(int row, int col) const {
  const int n = dimension();
  if (row < 1 || row > n || col < 1 || col > n) {
    throw std::out_of_range("matrix index out of range");
  }
  if (row == n && col == 1) return params_.mu();
  if (row == 1 && col == n) return params_.nu();
  return std::abs(row - col) == 1 ? 1.0 : 0.0;
}

std::vector<Coupling> HamiltonianMatrix::nonzeros() const {
  const int n = dimension();
  std::vector<Coupling> out;
  out.reserve(2 * static_cast<std::size_t>(n));
  for (int j = 1; j < n; ++j) {
    out.push_back({j, j + 1, 1.0});
    out.push_back({j + 1, j, 1.0});
  }
  out.push_back({n, 1, params_.mu()});
  out.push_back({1, n, params_.nu()});
  return out;
}

std::vector<cplx> HamiltonianMatrix::apply(std::span<const cplx> v) const {
  const auto n = static_cast<std::size_t>(dimension());
  if (v.size() != n) {
    throw std::invalid_argument("apply: vector length " + std::to_string(v.size()) +
                                " does not match dimension " + std::to_string(n));
  }
  std::vector<cplx> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = v[i - 1] + v[i + 1];
  out[0] = v[1] + params_.nu() * v[n - 1];
  out[n - 1] = v[n - 2] + params_.mu() * v[0];
  return out;
}

std::vector<double> HamiltonianMatrix::dense() const {
  const auto n = static_cast<std::size_t>(dimension());
  std::vector<double> m(n * n, 0.0);
  for (const auto& c : nonzeros()) {
    m[static_cast<std::size_t>(c.row - 1) * n + static_cast<std::size_t>(c.col - 1)] = c.value;
  }
  return m;
}

HamiltonianMatrix build_hamiltonian(const ModelParams& params) { return HamiltonianMatrix(params); }

double trace_moment(const ModelParams& params, int power) {
  if (power < 1) throw std::invalid_argument("trace_moment: power must be >= 1");
  const int n = params.sites();
  if (power == 1) return 0.0;
  if (power == 2) return 2.0 * (n - 1) + 2.0 * params.product();

  const HamiltonianMatrix h(params);
  double total = 0.0;
  std::vector<cplx> v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::fill(v.begin(), v.end(), cplx{});
    v[static_cast<std::size_t>(j)] = 1.0;
    for (int p = 0; p < power; ++p) v = h.apply(v);
    total += v[static_cast<std::size_t>(j)].real();
  }
  return total;
}

}  // namespace dimerring
