#include "dimerring/oracle.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "dimerring/bethe.hpp"

namespace dimerring {

namespace {

using quad = __float128;

struct qcplx {
  quad re = 0;
  quad im = 0;
};

qcplx operator+(qcplx a, qcplx b) { return {a.re + b.re, a.im + b.im}; }
qcplx operator-(qcplx a, qcplx b) { return {a.re - b.re, a.im - b.im}; }
qcplx operator*(qcplx a, qcplx b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
qcplx operator/(qcplx a, qcplx b) {
  // Smith's scaling avoids overflow for the huge initial circle.
  if (fabsq(b.re) >= fabsq(b.im)) {
    const quad r = b.im / b.re;
    const quad d = b.re + b.im * r;
    return {(a.re + a.im * r) / d, (a.im - a.re * r) / d};
  }
  const quad r = b.re / b.im;
  const quad d = b.re * r + b.im;
  return {(a.re * r + a.im) / d, (a.im * r - a.re) / d};
}
quad qabs(qcplx a) { return hypotq(a.re, a.im); }

// c_N = 1 down to c_0 via M_k = A M_{k-1} + c_{N-k+1} I, c_{N-k} = -tr(A M_k) / k.
std::vector<quad> faddeev_leverrier(int n, const std::function<void(const std::vector<quad>&, std::vector<quad>&)>& mul) {
  const auto sz = static_cast<std::size_t>(n);
  std::vector<quad> c(sz + 1, 0);
  c[sz] = 1;
  std::vector<quad> m(sz * sz, 0);
  std::vector<quad> am(sz * sz, 0);
  for (int k = 1; k <= n; ++k) {
    // m <- A m + c_{N-k+1} I
    mul(m, am);
    for (std::size_t i = 0; i < sz; ++i) am[i * sz + i] += c[sz - static_cast<std::size_t>(k) + 1];
    m.swap(am);
    mul(m, am);
    quad tr = 0;
    for (std::size_t i = 0; i < sz; ++i) tr += am[i * sz + i];
    c[sz - static_cast<std::size_t>(k)] = -tr / k;
  }
  return c;
}

CharPoly pack(const std::vector<quad>& c) {
  CharPoly p;
  p.hi.resize(c.size());
  p.lo.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    p.hi[i] = static_cast<double>(c[i]);
    p.lo[i] = static_cast<double>(c[i] - static_cast<quad>(p.hi[i]));
  }
  return p;
}

double hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double worst = 0.0;
  for (int j = 1; j <= n; ++j) {
    worst = std::max(worst, cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)][static_cast<std::size_t>(j - 1)]);
  }
  return worst;
}

double greedy_match(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  struct Edge {
    double d;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Edge> edges;
  edges.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) edges.push_back({std::abs(a[i] - b[j]), i, j});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.d != y.d) return x.d < y.d;
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  std::vector<char> ua(a.size(), 0);
  std::vector<char> ub(b.size(), 0);
  std::size_t matched = 0;
  double worst = 0.0;
  for (const auto& e : edges) {
    if (ua[e.i] || ub[e.j]) continue;
    ua[e.i] = ub[e.j] = 1;
    worst = std::max(worst, e.d);
    if (++matched == a.size()) break;
  }
  return worst;
}

}  // namespace

CharPoly char_poly_dense(const std::vector<double>& row_major, int dim) {
  if (dim < 1 || row_major.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim)) {
    throw OracleError("char_poly_dense: matrix shape mismatch");
  }
  const auto sz = static_cast<std::size_t>(dim);
  auto mul = [&](const std::vector<quad>& m, std::vector<quad>& out) {
    for (std::size_t i = 0; i < sz; ++i) {
      for (std::size_t j = 0; j < sz; ++j) {
        quad s = 0;
        for (std::size_t r = 0; r < sz; ++r) s += static_cast<quad>(row_major[i * sz + r]) * m[r * sz + j];
        out[i * sz + j] = s;
      }
    }
  };
  return pack(faddeev_leverrier(dim, mul));
}

CharPoly char_poly(const HamiltonianMatrix& h) {
  const int n = h.dimension();
  if (n > kOracleMaxSites) {
    throw OracleError("char_poly: N=" + std::to_string(n) + " exceeds the dense oracle limit of " +
                      std::to_string(kOracleMaxSites));
  }
  const auto nz = h.nonzeros();
  const auto sz = static_cast<std::size_t>(n);
  auto mul = [&](const std::vector<quad>& m, std::vector<quad>& out) {
    std::fill(out.begin(), out.end(), quad(0));
    for (const auto& c : nz) {
      const auto r = static_cast<std::size_t>(c.row - 1);
      const auto k = static_cast<std::size_t>(c.col - 1);
      const quad v = c.value;
      for (std::size_t j = 0; j < sz; ++j) out[r * sz + j] += v * m[k * sz + j];
    }
  };
  auto coeffs = faddeev_leverrier(n, mul);
  const auto p = pack(coeffs);
  // Exact trace identities for the top two coefficients.
  const double c1 = p.hi[sz - 1];
  const double c2 = p.hi[sz - 2];
  const double expect2 = -0.5 * trace_moment(h.params(), 2);
  if (std::abs(c1) > 1e-12 || std::abs(c2 - expect2) > 1e-12 * std::max(1.0, std::abs(expect2))) {
    throw OracleError("char_poly: trace identity check failed");
  }
  return p;
}

RootReport poly_roots_detailed(const CharPoly& p) {
  const int n = p.degree();
  if (n < 1) throw OracleError("poly_roots: degree must be positive");
  const auto sz = static_cast<std::size_t>(n);
  std::vector<quad> c(sz + 1);
  for (std::size_t i = 0; i <= sz; ++i) c[i] = static_cast<quad>(p.hi[i]) + static_cast<quad>(p.lo[i]);
  if (c[sz] == 0) throw OracleError("poly_roots: leading coefficient is zero");
  for (auto& x : c) x /= c[sz];

  // Fujiwara bound: every root lies within 2 max |c_{N-k}|^{1/k}.
  quad radius = 0;
  for (std::size_t k = 1; k <= sz; ++k) radius = std::max(radius, powq(fabsq(c[sz - k]), 1.0Q / k));
  radius = 2 * radius + 1e-3Q;

  std::vector<qcplx> z(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    const quad ang = 2 * M_PIq * static_cast<quad>(i) / n + 0.4Q;
    z[i] = {radius * cosq(ang), radius * sinq(ang)};
  }

  // Also returns the rounding floor of the Horner evaluation.
  auto eval = [&](qcplx x, qcplx& val, qcplx& der) {
    val = {c[sz], 0};
    der = {0, 0};
    quad floor = fabsq(c[sz]);
    const quad ax = qabs(x);
    for (std::size_t i = sz; i-- > 0;) {
      der = der * x + val;
      val = val * x + qcplx{c[i], 0};
      floor = floor * ax + fabsq(c[i]);
    }
    return floor * 4 * static_cast<quad>(n) * FLT128_EPSILON;
  };

  RootReport rep;
  constexpr int max_sweeps = 500;
  bool converged = false;
  int polish = 0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    quad worst = 0;
    for (std::size_t i = 0; i < sz; ++i) {
      qcplx val;
      qcplx der;
      const quad floor = eval(z[i], val, der);
      // Roots inside a cluster stall at the rounding floor rather than shrinking their steps.
      if (qabs(val) <= floor) continue;
      const qcplx w = val / der;
      qcplx s{0, 0};
      for (std::size_t j = 0; j < sz; ++j) {
        if (j != i) s = s + qcplx{1, 0} / (z[i] - z[j]);
      }
      const qcplx step = w / (qcplx{1, 0} - w * s);
      z[i] = z[i] - step;
      worst = std::max(worst, qabs(step));
    }
    rep.sweeps = sweep;
    if (!converged && worst < 1e-12Q) converged = true;
    // Once converged, keep polishing so clustered roots reach full quad accuracy.
    if (converged && (worst < 1e-28Q || ++polish > 60)) break;
  }
  if (!converged) throw OracleError("poly_roots: no convergence in 500 sweeps");

  // Conjugate symmetrization.
  std::vector<cplx> r(sz);
  for (std::size_t i = 0; i < sz; ++i) r[i] = {static_cast<double>(z[i].re), static_cast<double>(z[i].im)};
  std::vector<char> done(sz, 0);
  // Numerically real roots are settled first so they never pair with each other.
  for (std::size_t i = 0; i < sz; ++i) {
    if (std::abs(r[i].imag()) <= 1e-9 * std::max(1.0, std::abs(r[i]))) {
      rep.symmetrization_shift = std::max(rep.symmetrization_shift, std::abs(r[i].imag()));
      r[i] = {r[i].real(), 0.0};
      done[i] = 1;
    }
  }
  for (std::size_t i = 0; i < sz; ++i) {
    if (done[i] || r[i].imag() <= 0.0) continue;
    std::size_t best = sz;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sz; ++j) {
      if (j == i || done[j] || r[j].imag() > 0.0) continue;
      const double d = std::abs(r[j] - std::conj(r[i]));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == sz) continue;
    const cplx avg = 0.5 * (r[i] + std::conj(r[best]));
    rep.symmetrization_shift = std::max(rep.symmetrization_shift, std::abs(avg - r[i]));
    r[i] = avg;
    r[best] = std::conj(avg);
    done[i] = done[best] = 1;
  }
  for (std::size_t i = 0; i < sz; ++i) {
    if (!done[i]) {
      rep.symmetrization_shift = std::max(rep.symmetrization_shift, std::abs(r[i].imag()));
      r[i] = {r[i].real(), 0.0};
    }
  }
  rep.roots = std::move(r);
  return rep;
}

std::vector<cplx> poly_roots(const CharPoly& p) { return poly_roots_detailed(p).roots; }

double matched_max_deviation(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) {
    throw OracleError("unmatched level: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) return 0.0;
  if (a.size() <= 20) {
    std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = std::abs(a[i] - b[j]);
    }
    return hungarian(cost);
  }
  return greedy_match(a, b);
}

CrossValidation cross_validate(const ModelParams& params) {
  const auto h = build_hamiltonian(params);
  const auto spectrum = solve_spectrum(params);
  const auto roots = poly_roots_detailed(char_poly(h));

  std::vector<cplx> energies;
  energies.reserve(spectrum.levels.size());
  for (const auto& lv : spectrum.levels) energies.push_back(lv.energy);

  CrossValidation out;
  out.max_deviation = matched_max_deviation(energies, roots.roots);
  cplx s1{};
  cplx s2{};
  for (const auto& r : roots.roots) {
    s1 += r;
    s2 += r * r;
    if (std::abs(r.imag()) > 1e-8) ++out.oracle_complex;
  }
  out.oracle_trace1_error = std::abs(s1 - trace_moment(params, 1));
  out.oracle_trace2_error = std::abs(s2 - trace_moment(params, 2));
  out.bethe_trace1_error = spectrum.trace1_error;
  out.bethe_trace2_error = spectrum.trace2_error;
  out.symmetrization_shift = roots.symmetrization_shift;
  return out;
}

}  // namespace dimerring
