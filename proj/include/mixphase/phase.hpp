#pragma once

// Definitional machinery for mixed-state geometric phases of an N-level
// unitary evolution: time-ordered propagator integration, dynamical phases,
// parallel transport, and the diagonal and off-diagonal mixed-state phases.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mixphase/errors.hpp"
#include "mixphase/linalg.hpp"

namespace mixphase {

template <std::size_t N>
using Basis = std::array<CVector<N>, N>;

template <std::size_t N>
Basis<N> computational_basis() {
  Basis<N> b;
  for (std::size_t k = 0; k < N; ++k) b[k] = CVector<N>::unit(k);
  return b;
}

/// max_{k,l} |<psi_k|psi_l> - delta_kl|
template <std::size_t N>
double orthonormality_defect(const Basis<N>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t l = 0; l < N; ++l)
      worst = std::max(worst, std::abs(inner(b[k], b[l]) - (k == l ? 1.0 : 0.0)));
  return worst;
}

/// Matrix elements <psi_j|A|psi_k>.
template <std::size_t N>
CMatrix<N> in_basis(const CMatrix<N>& A, const Basis<N>& b) {
  CMatrix<N> out;
  for (std::size_t k = 0; k < N; ++k) {
    const CVector<N> Ak = A * b[k];
    for (std::size_t j = 0; j < N; ++j) out(j, k) = inner(b[j], Ak);
  }
  return out;
}

/// sum_k f_k |psi_k><psi_k|
template <std::size_t N>
CMatrix<N> spectral_sum(const Basis<N>& b, const std::array<Complex, N>& f) {
  CMatrix<N> out;
  for (std::size_t k = 0; k < N; ++k) out += f[k] * outer(b[k], b[k]);
  return out;
}

/// Sampled evolution U(t_i) on a uniform grid together with the running
/// dynamical phases delta_k(t_i) of a fixed reference basis.
template <std::size_t N>
struct PropagatorTrace {
  std::vector<double> grid;
  std::vector<CMatrix<N>> U;
  Basis<N> basis{};
  std::vector<std::array<double, N>> delta;
  // Richardson estimate ||U_h(T) - U_2h(T)||_F / 15; zero when not computed.
  double error_estimate = 0.0;
  // Largest ||U^dagger U - I||_F seen before any re-unitarisation.
  double max_drift = 0.0;

  double final_time() const { return grid.back(); }
  std::size_t steps() const { return grid.size() - 1; }
  double step() const { return grid[1] - grid[0]; }
  const CMatrix<N>& final_U() const { return U.back(); }
  const std::array<double, N>& final_delta() const { return delta.back(); }
};

struct IntegratorOptions {
  std::size_t reunitarize_every = 64;
  double drift_limit = 1e-6;
  bool estimate_error = true;
};

namespace detail {

// Cumulative integral of samples f on a uniform grid, composite Simpson at
// even nodes and the matching three-point rule on the last panel at odd ones.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> S(n, 0.0);
  if (n < 3) {
    if (n == 2) S[1] = 0.5 * h * (f[0] + f[1]);
    return S;
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (i % 2 == 0)
      S[i] = S[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    else if (i == 1)
      S[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    else
      S[i] = S[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
  }
  return S;
}

template <std::size_t N>
CMatrix<N> times_minus_i(const CMatrix<N>& A) {
  return Complex(0.0, -1.0) * A;
}

template <std::size_t N>
CMatrix<N> rk4_step(const CMatrix<N>& Hstart, const CMatrix<N>& Hmid, const CMatrix<N>& Hend,
                    const CMatrix<N>& U, double h) {
  const CMatrix<N> k1 = times_minus_i(Hstart * U);
  const CMatrix<N> k2 = times_minus_i(Hmid * (U + Complex(0.5 * h) * k1));
  const CMatrix<N> k3 = times_minus_i(Hmid * (U + Complex(0.5 * h) * k2));
  const CMatrix<N> k4 = times_minus_i(Hend * (U + Complex(h) * k3));
  return U + Complex(h / 6.0) * (k1 + Complex(2.0) * (k2 + k3) + k4);
}

// Integrates i dU/dt = H(t) U on [0, T]; fills `out` with every grid value
// when non-null and returns U(T).
template <std::size_t N, class Generator>
CMatrix<N> integrate_unitary(const Generator& H, double T, std::size_t steps,
                             const IntegratorOptions& opt, std::vector<CMatrix<N>>* out,
                             double* max_drift) {
  const double h = T / static_cast<double>(steps);
  CMatrix<N> U = CMatrix<N>::identity();
  if (out) {
    out->clear();
    out->reserve(steps + 1);
    out->push_back(U);
  }
  CMatrix<N> Hstart = H(0.0);
  double drift_seen = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = h * static_cast<double>(i);
    const CMatrix<N> Hmid = H(t + 0.5 * h);
    const CMatrix<N> Hend = H(h * static_cast<double>(i + 1));
    U = rk4_step(Hstart, Hmid, Hend, U, h);
    Hstart = Hend;
    const bool last = i + 1 == steps;
    if (((i + 1) % opt.reunitarize_every == 0) || last) {
      const double drift = unitarity_defect(U);
      drift_seen = std::max(drift_seen, drift);
      if (drift > opt.drift_limit)
        throw UnitarityLoss("unitarity drift " + std::to_string(drift) +
                            " exceeds limit; increase the number of steps");
      U = polar_project(U);
    }
    if (out) out->push_back(U);
  }
  if (max_drift) *max_drift = drift_seen;
  return U;
}

// Real integrand <psi|U^dagger H U|psi> sampled on the trace grid.
template <std::size_t N, class Generator>
std::vector<double> energy_samples(const std::vector<double>& grid,
                                   const std::vector<CMatrix<N>>& U, const Generator& H,
                                   const CVector<N>& psi) {
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CVector<N> phi = U[i] * psi;
    f[i] = inner(phi, H(grid[i]) * phi).real();
  }
  return f;
}

}  // namespace detail

/// Running dynamical phase delta(t_i) = -int_0^{t_i} <psi|U^dagger H U|psi> dt
/// of an arbitrary vector psi along a sampled evolution.
template <std::size_t N, class Generator>
std::vector<double> running_dynamical_phase(const PropagatorTrace<N>& trace,
                                            const Generator& H, const CVector<N>& psi) {
  const auto f = detail::energy_samples(trace.grid, trace.U, H, psi);
  auto S = detail::cumulative_simpson(f, trace.step());
  for (auto& s : S) s = -s;
  return S;
}

/// Classical RK4 for i dU/dt = H(t) U, U(0) = I, on `steps` uniform steps,
/// with polar re-unitarisation every `reunitarize_every` steps. Records the
/// running dynamical phases of `basis` and, optionally, a step-halving error
/// estimate of U(T).
template <std::size_t N, class Generator>
PropagatorTrace<N> integrate_propagator(const Generator& H, double T, std::size_t steps,
                                        const Basis<N>& basis,
                                        const IntegratorOptions& opt = {}) {
  if (steps < 2) throw InvalidArgument("integrate_propagator: steps must be >= 2");
  if (!(T >= 0.0) || !std::isfinite(T))
    throw InvalidArgument("integrate_propagator: final time must be finite and >= 0");
  if (opt.reunitarize_every == 0)
    throw InvalidArgument("integrate_propagator: reunitarize_every must be positive");

  PropagatorTrace<N> tr;
  tr.basis = basis;
  tr.grid.resize(steps + 1);
  const double h = T / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) tr.grid[i] = h * static_cast<double>(i);
  tr.grid.back() = T;

  const CMatrix<N> UT =
      detail::integrate_unitary<N>(H, T, steps, opt, &tr.U, &tr.max_drift);

  if (opt.estimate_error && steps % 2 == 0 && steps >= 4) {
    const CMatrix<N> coarse =
        detail::integrate_unitary<N>(H, T, steps / 2, opt, nullptr, nullptr);
    tr.error_estimate = frobenius_distance(UT, coarse) / 15.0;
  }

  tr.delta.assign(steps + 1, std::array<double, N>{});
  for (std::size_t k = 0; k < N; ++k) {
    const auto d = running_dynamical_phase(tr, H, basis[k]);
    for (std::size_t i = 0; i <= steps; ++i) tr.delta[i][k] = d[i];
  }
  return tr;
}

/// delta_k(T) for basis vector k of the trace, recomputed from the sampled
/// propagator by composite Simpson quadrature.
template <std::size_t N, class Generator>
double dynamical_phase(const PropagatorTrace<N>& trace, const Generator& H, std::size_t k) {
  if (k >= N) throw DimensionMismatch("dynamical_phase: basis index out of range");
  return running_dynamical_phase(trace, H, trace.basis[k]).back();
}

/// U_par(t) = U(t) sum_k e^{-i delta_k(t)} |psi_k><psi_k|. The returned trace
/// carries zero dynamical phases.
template <std::size_t N>
PropagatorTrace<N> parallel_transported(const PropagatorTrace<N>& trace) {
  PropagatorTrace<N> out = trace;
  for (std::size_t i = 0; i < trace.U.size(); ++i) {
    std::array<Complex, N> f;
    for (std::size_t k = 0; k < N; ++k) f[k] = std::polar(1.0, -trace.delta[i][k]);
    out.U[i] = trace.U[i] * spectral_sum(trace.basis, f);
    out.delta[i].fill(0.0);
  }
  return out;
}

/// max over interior nodes and k of |<psi_k|U^dagger dU/dt|psi_k>|, with the
/// derivative from the five-point central stencil. Zero for a
/// parallel-transported trace up to discretisation error.
template <std::size_t N>
double parallel_transport_residual(const PropagatorTrace<N>& trace) {
  const std::size_t n = trace.U.size();
  if (n < 5) throw InvalidArgument("parallel_transport_residual: need at least 4 steps");
  const double h = trace.step();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const CMatrix<N> dU =
        Complex(1.0 / (12.0 * h)) * (trace.U[i - 2] - Complex(8.0) * trace.U[i - 1] +
                                     Complex(8.0) * trace.U[i + 1] - trace.U[i + 2]);
    const CMatrix<N> A = adjoint(trace.U[i]) * dU;
    for (std::size_t k = 0; k < N; ++k)
      worst = std::max(worst, std::abs(inner(trace.basis[k], A * trace.basis[k])));
  }
  return worst;
}

/// Weighted orthonormal basis: rho = sum_k lambda_k |psi_k><psi_k|.
template <std::size_t N>
struct Ensemble {
  Basis<N> basis{};
  std::array<double, N> weights{};

  void validate() const {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvalidArgument("ensemble weights must be finite and non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("ensemble weights must sum to 1");
    if (orthonormality_defect(basis) > 1e-10)
      throw InvalidArgument("ensemble basis is not orthonormal");
  }

  double min_weight_gap() const {
    double gap = INFINITY;
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t l = k + 1; l < N; ++l)
        gap = std::min(gap, std::abs(weights[k] - weights[l]));
    return gap;
  }

  CMatrix<N> density() const {
    std::array<Complex, N> f;
    for (std::size_t k = 0; k < N; ++k) f[k] = weights[k];
    return spectral_sum(basis, f);
  }
};

inline constexpr double kWeightDegeneracy = 1e-9;

namespace detail {

template <std::size_t N>
bool same_basis(const Basis<N>& a, const Basis<N>& b) {
  for (std::size_t k = 0; k < N; ++k)
    if (norm(a[k] - b[k]) > 1e-12) return false;
  return true;
}

}  // namespace detail

/// Phi[ sum_k lambda_k <psi_k|U(T)|psi_k> e^{-i delta_k(T)} ].
template <std::size_t N>
PhaseFactor diagonal_mixed_phase(const PropagatorTrace<N>& trace, const Ensemble<N>& e) {
  e.validate();
  if (!detail::same_basis(trace.basis, e.basis))
    throw BasisMismatch("diagonal_mixed_phase: ensemble basis differs from the trace basis");
  const CMatrix<N>& U = trace.final_U();
  Complex z = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    z += e.weights[k] * inner(e.basis[k], U * e.basis[k]) *
         std::polar(1.0, -trace.final_delta()[k]);
  return phase_functional(z);
}

/// The N mutually non-interfering companions rho_n = W^{n-1} rho_1 W^{-(n-1)}
/// with W = sum_k |psi_{k+1}><psi_k|: weights rotate by one slot per shift.
template <std::size_t N>
std::vector<Ensemble<N>> shift_ensembles(const Ensemble<N>& e) {
  e.validate();
  if (e.min_weight_gap() <= kWeightDegeneracy)
    throw DegenerateWeights("off-diagonal phases need pairwise distinct weights");
  std::vector<Ensemble<N>> out;
  out.reserve(N);
  for (std::size_t n = 0; n < N; ++n) {
    Ensemble<N> r{e.basis, {}};
    for (std::size_t j = 0; j < N; ++j) r.weights[j] = e.weights[(j + N - n) % N];
    out.push_back(r);
  }
  return out;
}

/// Tr( prod_a U_par rho_a^{1/l} ) with rho_a^{1/l} = sum_k w_{a,k}^{1/l}
/// |psi_k><psi_k| and l = weights.size(). No non-degeneracy requirement.
template <std::size_t N>
Complex offdiagonal_trace(const CMatrix<N>& U_par, const Basis<N>& basis,
                          std::span<const std::array<double, N>> weights) {
  if (weights.empty()) throw DimensionMismatch("offdiagonal_trace: no density operators");
  const double inv_l = 1.0 / static_cast<double>(weights.size());
  CMatrix<N> prod = CMatrix<N>::identity();
  for (const auto& w : weights) {
    std::array<Complex, N> root;
    for (std::size_t k = 0; k < N; ++k) root[k] = std::pow(w[k], inv_l);
    prod = prod * (U_par * spectral_sum(basis, root));
  }
  return trace(prod);
}

/// gamma^(l) = Phi[ Tr( prod_{a=1..l} U_par(T) rho_{j_a}^{1/l} ) ] for the
/// ensembles rho_{j_1} ... rho_{j_l}, all sharing the trace basis.
template <std::size_t N>
PhaseFactor offdiagonal_mixed_phase(const PropagatorTrace<N>& trace,
                                    std::span<const Ensemble<N>> ensembles, std::size_t l) {
  if (l == 0 || l != ensembles.size())
    throw DimensionMismatch("offdiagonal_mixed_phase: l must equal the number of ensembles");
  std::vector<std::array<double, N>> weights;
  for (const auto& e : ensembles) {
    e.validate();
    if (!detail::same_basis(trace.basis, e.basis))
      throw BasisMismatch("offdiagonal_mixed_phase: ensembles must share the trace basis");
    if (e.min_weight_gap() <= kWeightDegeneracy)
      throw DegenerateWeights("off-diagonal phases need pairwise distinct weights");
    weights.push_back(e.weights);
  }
  std::array<Complex, N> f;
  for (std::size_t k = 0; k < N; ++k) f[k] = std::polar(1.0, -trace.final_delta()[k]);
  const CMatrix<N> U_par = trace.final_U() * spectral_sum(trace.basis, f);
  return phase_functional(offdiagonal_trace<N>(U_par, trace.basis, weights));
}

}  // namespace mixphase
