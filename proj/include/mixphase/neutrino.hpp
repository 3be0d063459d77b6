#pragma once

// Neutrino helicity precession in a uniformly rotating transverse magnetic
// field:
//
//   i d/dt (nu_R, nu_L)^T = H(t) (nu_R, nu_L)^T,
//   H(t) = [[ V/2,            muB e^{-i w t} ],
//           [ muB e^{+i w t}, -V/2           ]]
//
// Natural units (hbar = 1): energies and angular frequencies share a unit,
// times are inverse energies. muB is the product of the magnetic moment and
// the field magnitude; the two only ever enter through that product.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "mixphase/errors.hpp"
#include "mixphase/linalg.hpp"

namespace mixphase::neutrino {

struct ModelParams {
  double V = 0.0;      // mass / matter term
  double muB = 0.0;    // mu_nu * B, >= 0
  double omega = 0.0;  // field rotation angular frequency
  double beta = 0.0;   // inverse temperature 1/(kT), >= 0

  void validate() const {
    if (!std::isfinite(V) || !std::isfinite(muB) || !std::isfinite(omega) ||
        !std::isfinite(beta))
      throw InvalidArgument("model parameters must be finite");
    if (muB < 0.0) throw InvalidArgument("muB must be >= 0");
    if (beta < 0.0) throw InvalidArgument("beta must be >= 0");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr double kFrameThreshold = 1e-12;

inline CMatrix<2> hamiltonian(const ModelParams& p, double t) {
  const Complex rot = std::polar(1.0, p.omega * t);
  return {{Complex(0.5 * p.V), p.muB * std::conj(rot)},
          {p.muB * rot, Complex(-0.5 * p.V)}};
}

struct RotatingFrame {
  CMatrix<2> generator;          // muB sigma_x + (V - omega)/2 sigma_z
  std::array<double, 3> vector;  // generator = vector . sigma
  double Omega;                  // sqrt((2 muB)^2 + (V - omega)^2)
};

/// Time-independent generator obtained after removing the field rotation
/// with exp(-i sigma_z omega t / 2).
inline RotatingFrame rotating_frame(const ModelParams& p) {
  const std::array<double, 3> a{p.muB, 0.0, 0.5 * (p.V - p.omega)};
  const CMatrix<2> gen{{Complex(a[2]), Complex(a[0])},
                       {Complex(a[0]), Complex(-a[2])}};
  return {gen, a, std::hypot(2.0 * p.muB, p.V - p.omega)};
}

/// tau = 2 pi / Omega, the period after which exp(-i H~ t) returns to -I.
inline double period_tau(const ModelParams& p) {
  const double Omega = rotating_frame(p).Omega;
  if (Omega <= kFrameThreshold)
    throw DegenerateFrame("Omega vanishes (V == omega and muB == 0)");
  return 2.0 * std::numbers::pi / Omega;
}

enum class PropagatorConvention {
  // exp(-i H~ t) exp(+i sigma_z omega t / 2), operator order as printed.
  paper_literal,
  // exp(-i sigma_z omega t / 2) exp(-i H~ t); solves i dU/dt = H(t) U, U(0)=I.
  ode_consistent,
};

inline const char* to_string(PropagatorConvention c) {
  return c == PropagatorConvention::paper_literal ? "paper-literal"
                                                  : "ode-consistent";
}

inline CMatrix<2> closed_form_propagator(const ModelParams& p, double t,
                                         PropagatorConvention conv) {
  const auto frame = rotating_frame(p);
  const CMatrix<2> inner = su2_exponential(frame.vector, t);
  const std::array<double, 3> z_half{0.0, 0.0, 0.5 * p.omega};
  if (conv == PropagatorConvention::ode_consistent)
    return su2_exponential(z_half, t) * inner;
  return inner * su2_exponential({0.0, 0.0, -0.5 * p.omega}, t);
}

namespace detail {

// Mixing amplitudes of the instantaneous eigenvectors:
//   psi1 = (c, -e^{iwt} s), psi2 = (e^{-iwt} s, c),
// with c = muB/N, s = (V/2 - E1)/N. V/2 - E1 is evaluated without
// cancellation; when N == 0 (muB == 0, V >= 0) the muB -> 0+ limit
// (c, s) = (1, 0) is returned and `degenerate` is set.
struct Mixing {
  double E1;
  double gap;  // V/2 - E1
  double N;
  double c;
  double s;
  bool degenerate;
};

inline Mixing mixing(const ModelParams& p) {
  const double halfV = 0.5 * p.V;
  const double E1 = std::hypot(halfV, p.muB);
  const double gap =
      halfV >= 0.0 ? (E1 > 0.0 ? -(p.muB * p.muB) / (halfV + E1) : 0.0)
                   : halfV - E1;
  const double N = std::hypot(gap, p.muB);
  if (N <= 1e-12 * std::max(E1, 1e-300) || N == 0.0)
    return {E1, gap, N, 1.0, 0.0, true};
  return {E1, gap, N, p.muB / N, gap / N, false};
}

}  // namespace detail

struct SpectralFrame {
  double t = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  CVector<2> psi1;
  CVector<2> psi2;
  double normN = 0.0;  // normalisation factor of the printed eigenvectors
  bool fallback = false;  // printed formulas lost rank; eigh_2x2 was used
};

/// Instantaneous eigensystem of H(t) in the closed form
///   E1 = +sqrt((V/2)^2 + muB^2) = -E2,
///   psi1 = (muB, -e^{iwt}(V/2 - E1)) / N,  psi2 = (e^{-iwt}(V/2 - E1), muB) / N.
inline SpectralFrame eigensystem(const ModelParams& p, double t) {
  const auto m = detail::mixing(p);
  if (m.E1 <= 1e-12)
    throw DegenerateSpectrum("eigenvalues coincide (V == 0 and muB == 0)");
  SpectralFrame f;
  f.t = t;
  f.E1 = m.E1;
  f.E2 = -m.E1;
  f.normN = m.N;
  if (m.degenerate) {
    const auto e = eigh_2x2(hamiltonian(p, t));
    f.psi1 = e.v1;
    f.psi2 = e.v2;
    f.fallback = true;
    return f;
  }
  const Complex rot = std::polar(1.0, p.omega * t);
  f.psi1 = CVector<2>{Complex(m.c), -rot * m.s};
  f.psi2 = CVector<2>{std::conj(rot) * m.s, Complex(m.c)};
  return f;
}

struct ThermalWeights {
  double lambda1;  // weight of the upper level E1
  double lambda2;
};

/// Boltzmann weights of the two levels, lambda_k ~ exp(-beta E_k).
inline ThermalWeights thermal_weights(const ModelParams& p) {
  if (!(p.beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  const double E1 = std::hypot(0.5 * p.V, p.muB);
  // Shifted by the larger exponent (-beta E2 = +beta E1).
  const double x = std::exp(-2.0 * p.beta * E1);
  return {x / (1.0 + x), 1.0 / (1.0 + x)};
}

/// Closed-form values at t = tau as printed, under the time-dependent
/// eigenbasis convention used there.
struct PaperClosedForms {
  double tau = 0.0;
  Complex U11, U12, U21, U22;
  Complex U12_unrepaired;  // with sin(omega/2) exactly as typeset
  double delta1 = 0.0;
  double delta2 = 0.0;
  // Phi-arguments of the off-diagonal and diagonal phases, divided by the
  // positive factors N^4 and N^2 respectively (Phi is unaffected).
  Complex gamma_offdiag_arg;
  Complex gamma_diag_arg;
  ThermalWeights weights{};
};

/// Evaluates the printed closed forms. U22 = U11*, U21 = -U12*, delta2 =
/// -delta1 are taken as printed. The sin(omega/2) factor of U12 is evaluated
/// as sin(omega tau / 2); the typeset reading is kept in U12_unrepaired.
///
/// When `delta1_override` is given, it replaces the printed delta1 wherever
/// delta1 feeds a later expression (delta2 and both gamma arguments); the
/// `delta1` field still holds the printed value.
inline PaperClosedForms paper_closed_forms(
    const ModelParams& p, std::optional<double> delta1_override = {}) {
  const double tau = period_tau(p);
  const auto m = detail::mixing(p);
  const double c2 = m.c * m.c;  // muB^2 / N^2
  const double s2 = m.s * m.s;  // (V/2 - E1)^2 / N^2
  const double cs = m.c * m.s;  // muB (V/2 - E1) / N^2
  const double wt = p.omega * tau;
  const double halfV_minus_w = 0.5 * p.V - p.omega;

  PaperClosedForms r;
  r.tau = tau;
  r.U11 = -(c2 * std::polar(1.0, 0.5 * wt) + s2 * std::polar(1.0, -0.5 * wt));
  r.U22 = std::conj(r.U11);
  const Complex tail = std::polar(1.0, -(wt + 0.5 * std::numbers::pi));
  r.U12 = 2.0 * cs * std::sin(0.5 * wt) * tail;
  r.U12_unrepaired = 2.0 * cs * std::sin(0.5 * p.omega) * tail;
  r.U21 = -std::conj(r.U12);

  // (1/N^2)[2 muB^2 (V/2-E1) + (V/2-E1)^2 (V/2-w) - muB^2 (V/2-w)] tau
  r.delta1 = (2.0 * c2 * m.gap + s2 * halfV_minus_w - c2 * halfV_minus_w) * tau;
  const double d1 = delta1_override.value_or(r.delta1);
  r.delta2 = -d1;

  r.weights = thermal_weights(p);
  const double l1 = r.weights.lambda1, l2 = r.weights.lambda2;
  const double root = std::sqrt(l1 * l2);
  r.gamma_offdiag_arg =
      s2 * c2 * (std::cos(wt) - 1.0) +
      root * (s2 * s2 * std::cos(wt + 2.0 * d1) + c2 * c2 * std::cos(wt + 2.0 * d1) +
              2.0 * c2 * s2 * std::cos(2.0 * d1));
  r.gamma_diag_arg =
      (l1 * std::polar(1.0, 0.5 * wt - d1) + l2 * std::polar(1.0, -(0.5 * wt - d1))) * c2 +
      (l1 * std::polar(1.0, -(0.5 * wt + d1)) + l2 * std::polar(1.0, 0.5 * wt + d1)) * s2;
  return r;
}

}  // namespace mixphase::neutrino
