#pragma once

// Recomputes the printed t = tau closed forms of the rotating-field neutrino
// model from the definitional pipeline (RK4 propagator + quadrature
// dynamical phases + trace formulas) and classifies each one.
//
// Every item evaluates one printed step. Where a printed relation consumes an
// upstream quantity (delta1 inside delta2, the parallel-transported matrix
// and both phase formulas) the oracle's value of that quantity is fed in, so
// an error in an upstream formula is reported once, on its own item. The
// classification obtained with the fully printed chain is kept alongside as
// `chained_classification`.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mixphase/errors.hpp"
#include "mixphase/format.hpp"
#include "mixphase/linalg.hpp"
#include "mixphase/neutrino.hpp"
#include "mixphase/parallel.hpp"
#include "mixphase/phase.hpp"

namespace mixphase::verify {

using neutrino::ModelParams;

enum class EquationId {
  U11_Eq15,
  U12_Eq16,
  delta1_Eq17,
  delta2_Eq18,
  Uparallel_Eq19,
  offdiag_Eq23,
  diag_Eq24,
  propagator_Eq14_literal,
  propagator_Eq14_ode,
};

inline constexpr std::array<EquationId, 9> kAllEquations{
    EquationId::U11_Eq15,       EquationId::U12_Eq16,
    EquationId::delta1_Eq17,    EquationId::delta2_Eq18,
    EquationId::Uparallel_Eq19, EquationId::offdiag_Eq23,
    EquationId::diag_Eq24,      EquationId::propagator_Eq14_literal,
    EquationId::propagator_Eq14_ode,
};

inline const char* to_string(EquationId id) {
  switch (id) {
    case EquationId::U11_Eq15: return "U11_Eq15";
    case EquationId::U12_Eq16: return "U12_Eq16";
    case EquationId::delta1_Eq17: return "delta1_Eq17";
    case EquationId::delta2_Eq18: return "delta2_Eq18";
    case EquationId::Uparallel_Eq19: return "Uparallel_Eq19";
    case EquationId::offdiag_Eq23: return "offdiag_Eq23";
    case EquationId::diag_Eq24: return "diag_Eq24";
    case EquationId::propagator_Eq14_literal: return "propagator_Eq14_literal";
    case EquationId::propagator_Eq14_ode: return "propagator_Eq14_ode";
  }
  return "?";
}

enum class Classification { match, conjugate, sign_flip, repaired_match, mismatch };

inline constexpr std::array<Classification, 5> kAllClassifications{
    Classification::match, Classification::conjugate, Classification::sign_flip,
    Classification::repaired_match, Classification::mismatch};

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::match: return "match";
    case Classification::conjugate: return "conjugate";
    case Classification::sign_flip: return "sign_flip";
    case Classification::repaired_match: return "repaired_match";
    case Classification::mismatch: return "mismatch";
  }
  return "?";
}

inline std::optional<Classification> parse_classification(std::string_view s) {
  for (auto c : kAllClassifications)
    if (s == to_string(c)) return c;
  return std::nullopt;
}

// Classification tolerances.
inline constexpr double kPropagatorTol = 1e-6;  // matrix elements
inline constexpr double kDeltaTol = 1e-7;       // dynamical phases
inline constexpr double kPhaseTol = 1e-6;       // unit phase factors

struct VerifyItem {
  EquationId equation_id{};
  std::vector<Complex> paper_value;   // one entry, or 4 row-major for matrices
  std::vector<Complex> oracle_value;
  Classification classification = Classification::mismatch;
  double residual = 0.0;  // ||printed - oracle||
  double tolerance = 0.0;
  // Same item, oracle evaluated in the eigenbasis at t = tau.
  Classification tau_basis_classification = Classification::mismatch;
  // Same item with the printed upstream values in place of the oracle's.
  std::optional<Classification> chained_classification;
  // Items with a documented repair: the repaired value and how it relates to
  // the oracle in either basis reading.
  std::optional<std::vector<Complex>> repaired_value;
  std::optional<Classification> repaired_classification;
  std::optional<Classification> tau_basis_repaired_classification;
};

struct VerifyReport {
  ModelParams params{};
  std::size_t steps = 0;
  double tau = 0.0;
  double integrator_error = 0.0;  // step-halving estimate for U(tau)
  std::vector<VerifyItem> items;
  std::map<Classification, int> summary;
  std::optional<std::string> error;  // set when the point could not be verified

  const VerifyItem& item(EquationId id) const {
    for (const auto& it : items)
      if (it.equation_id == id) return it;
    throw InvalidArgument(std::string("report has no item ") + to_string(id));
  }
};

class InconsistentClassification : public Error {
 public:
  InconsistentClassification(const std::string& what, std::vector<VerifyReport> reports)
      : Error(what), reports_(std::move(reports)) {}
  const std::vector<VerifyReport>& reports() const { return reports_; }

 private:
  std::vector<VerifyReport> reports_;
};

namespace detail {

inline double distance(const std::vector<Complex>& a, const std::vector<Complex>& b,
                       bool conj_b = false, bool negate_b = false) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Complex bi = conj_b ? std::conj(b[i]) : b[i];
    if (negate_b) bi = -bi;
    s += std::norm(a[i] - bi);
  }
  return std::sqrt(s);
}

inline Classification classify(const std::vector<Complex>& printed,
                               const std::vector<Complex>& oracle, double tol,
                               const std::vector<Complex>* repaired = nullptr) {
  if (distance(printed, oracle) <= tol) return Classification::match;
  if (distance(printed, oracle, true) <= tol) return Classification::conjugate;
  if (distance(printed, oracle, false, true) <= tol) return Classification::sign_flip;
  if (repaired && distance(*repaired, oracle) <= tol) return Classification::repaired_match;
  return Classification::mismatch;
}

inline std::vector<Complex> entries(const CMatrix<2>& m) {
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

// Oracle and printed values of the basis-dependent items for one reading of
// the reference basis.
struct Reading {
  CMatrix<2> U_basis;    // <psi_j|U(tau)|psi_k>
  CMatrix<2> Upar_basis; // <psi_j|U_par(tau)|psi_k>
  std::array<double, 2> delta{};
  Complex offdiag_unit;
  Complex diag_unit;
};

inline Reading oracle_reading(const CMatrix<2>& U, const Basis<2>& basis,
                              const std::array<double, 2>& delta,
                              const neutrino::ThermalWeights& w) {
  Reading r;
  r.delta = delta;
  r.U_basis = in_basis(U, basis);
  const CMatrix<2> Upar =
      U * spectral_sum<2>(basis, {std::polar(1.0, -delta[0]), std::polar(1.0, -delta[1])});
  r.Upar_basis = in_basis(Upar, basis);
  const std::array<std::array<double, 2>, 2> rho{{{w.lambda1, w.lambda2}, {w.lambda2, w.lambda1}}};
  r.offdiag_unit = phase_functional(offdiagonal_trace<2>(Upar, basis, rho)).unit;
  const Complex diag = w.lambda1 * r.U_basis(0, 0) * std::polar(1.0, -delta[0]) +
                       w.lambda2 * r.U_basis(1, 1) * std::polar(1.0, -delta[1]);
  r.diag_unit = phase_functional(diag).unit;
  return r;
}

// Unit factor of a printed phase argument; a printed argument that vanishes
// yields 0, which can only classify as mismatch.
inline Complex printed_unit(Complex z) {
  try {
    return phase_functional(z).unit;
  } catch (const UndefinedPhase&) {
    return 0.0;
  }
}

inline std::vector<VerifyItem> basis_items(const ModelParams& p, const Reading& o) {
  const auto literal = neutrino::paper_closed_forms(p);
  const auto fed = neutrino::paper_closed_forms(p, o.delta[0]);
  std::vector<VerifyItem> items;

  auto add = [&](EquationId id, std::vector<Complex> printed, std::vector<Complex> oracle,
                 double tol, const std::vector<Complex>* repaired = nullptr,
                 const std::vector<Complex>* chained = nullptr) {
    VerifyItem it;
    it.equation_id = id;
    it.classification = classify(printed, oracle, tol, repaired);
    it.residual = distance(printed, oracle);
    it.tolerance = tol;
    if (chained) it.chained_classification = classify(*chained, oracle, tol, repaired);
    if (repaired) {
      it.repaired_value = *repaired;
      it.repaired_classification = classify(*repaired, oracle, tol);
    }
    it.paper_value = std::move(printed);
    it.oracle_value = std::move(oracle);
    items.push_back(std::move(it));
  };

  add(EquationId::U11_Eq15, {literal.U11}, {o.U_basis(0, 0)}, kPropagatorTol);

  const std::vector<Complex> u12_repaired{literal.U12};
  add(EquationId::U12_Eq16, {literal.U12_unrepaired}, {o.U_basis(0, 1)}, kPropagatorTol,
      &u12_repaired);

  add(EquationId::delta1_Eq17, {literal.delta1}, {o.delta[0]}, kDeltaTol);

  const std::vector<Complex> d2_chained{literal.delta2};
  add(EquationId::delta2_Eq18, {fed.delta2}, {o.delta[1]}, kDeltaTol, nullptr, &d2_chained);

  // U_par = U diag(e^{-i delta1}, e^{-i delta2}) in the reference basis.
  const auto diag_phases = [](double d1, double d2) {
    return CMatrix<2>::diagonal({std::polar(1.0, -d1), std::polar(1.0, -d2)});
  };
  const CMatrix<2> paper_U{{literal.U11, literal.U12}, {literal.U21, literal.U22}};
  const auto upar_chained = entries(paper_U * diag_phases(literal.delta1, literal.delta2));
  add(EquationId::Uparallel_Eq19, entries(o.U_basis * diag_phases(o.delta[0], o.delta[1])),
      entries(o.Upar_basis), kPropagatorTol, nullptr, &upar_chained);

  const std::vector<Complex> off_chained{printed_unit(literal.gamma_offdiag_arg)};
  add(EquationId::offdiag_Eq23, {printed_unit(fed.gamma_offdiag_arg)},
      {o.offdiag_unit}, kPhaseTol, nullptr, &off_chained);

  const std::vector<Complex> diag_chained{printed_unit(literal.gamma_diag_arg)};
  add(EquationId::diag_Eq24, {printed_unit(fed.gamma_diag_arg)}, {o.diag_unit},
      kPhaseTol, nullptr, &diag_chained);
  return items;
}

}  // namespace detail

/// Verifies every printed closed form at t = tau for one parameter point.
inline VerifyReport verify_point(const ModelParams& p, std::size_t steps) {
  p.validate();
  if (steps < 1024) throw InvalidArgument("verify_point: steps must be >= 1024");
  const double tau = neutrino::period_tau(p);
  const auto frame0 = neutrino::eigensystem(p, 0.0);
  const auto frame_tau = neutrino::eigensystem(p, tau);
  const Basis<2> basis0{frame0.psi1, frame0.psi2};
  const Basis<2> basis_tau{frame_tau.psi1, frame_tau.psi2};
  const auto H = [&p](double t) { return neutrino::hamiltonian(p, t); };

  const auto trace = integrate_propagator<2>(H, tau, steps, basis0);
  const CMatrix<2>& U = trace.final_U();
  const auto w = neutrino::thermal_weights(p);

  const auto o0 = detail::oracle_reading(U, basis0, trace.final_delta(), w);
  const std::array<double, 2> delta_tau{running_dynamical_phase(trace, H, basis_tau[0]).back(),
                                        running_dynamical_phase(trace, H, basis_tau[1]).back()};
  const auto otau = detail::oracle_reading(U, basis_tau, delta_tau, w);

  VerifyReport report;
  report.params = p;
  report.steps = steps;
  report.tau = tau;
  report.integrator_error = trace.error_estimate;
  report.items = detail::basis_items(p, o0);
  const auto tau_items = detail::basis_items(p, otau);
  for (std::size_t i = 0; i < tau_items.size(); ++i) {
    report.items[i].tau_basis_classification = tau_items[i].classification;
    report.items[i].tau_basis_repaired_classification = tau_items[i].repaired_classification;
  }

  for (auto conv : {neutrino::PropagatorConvention::paper_literal,
                    neutrino::PropagatorConvention::ode_consistent}) {
    VerifyItem it;
    it.equation_id = conv == neutrino::PropagatorConvention::paper_literal
                         ? EquationId::propagator_Eq14_literal
                         : EquationId::propagator_Eq14_ode;
    it.paper_value = detail::entries(neutrino::closed_form_propagator(p, tau, conv));
    it.oracle_value = detail::entries(U);
    it.tolerance = kPropagatorTol;
    it.classification = detail::classify(it.paper_value, it.oracle_value, it.tolerance);
    it.tau_basis_classification = it.classification;
    it.residual = detail::distance(it.paper_value, it.oracle_value);
    report.items.push_back(std::move(it));
  }

  for (auto c : kAllClassifications) report.summary[c] = 0;
  for (const auto& it : report.items) ++report.summary[it.classification];
  return report;
}

/// Throws InconsistentClassification when an equation's classification
/// differs between any two successfully verified points.
inline void check_consistency(const std::vector<VerifyReport>& reports) {
  const VerifyReport* ref = nullptr;
  for (const auto& r : reports) {
    if (r.error) continue;
    if (!ref) {
      ref = &r;
      continue;
    }
    for (std::size_t i = 0; i < r.items.size(); ++i)
      if (r.items[i].classification != ref->items[i].classification)
        throw InconsistentClassification(
            std::string("classification of ") + to_string(r.items[i].equation_id) +
                " differs across grid points (" + to_string(ref->items[i].classification) +
                " vs " + to_string(r.items[i].classification) + ")",
            reports);
  }
}

/// Independent verify_point per grid entry. Points that fail carry `error`
/// and are excluded from the consistency check.
inline std::vector<VerifyReport> verify_grid(const std::vector<ModelParams>& grid,
                                             std::size_t steps, unsigned threads = 1) {
  if (grid.empty()) throw InvalidArgument("verify_grid: empty grid");
  auto reports = ordered_parallel_map(grid.size(), threads, [&](std::size_t i) {
    try {
      return verify_point(grid[i], steps);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      VerifyReport r;
      r.params = grid[i];
      r.steps = steps;
      r.error = e.what();
      return r;
    }
  });
  check_consistency(reports);
  return reports;
}

/// Reproducible random generic points: V in [0.5, 2], muB in [0.2, 1],
/// omega in [0.1, 2], beta in [0.1, 3]; points with Omega < 0.05 are redrawn.
inline std::vector<ModelParams> generic_grid(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  std::vector<ModelParams> out;
  while (out.size() < count) {
    ModelParams p;
    p.V = uniform(0.5, 2.0);
    p.muB = uniform(0.2, 1.0);
    p.omega = uniform(0.1, 2.0);
    p.beta = uniform(0.1, 3.0);
    if (neutrino::rotating_frame(p).Omega < 0.05) continue;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation

inline nlohmann::json params_json(const ModelParams& p) {
  return {{"V", p.V}, {"muB", p.muB}, {"omega", p.omega}, {"beta", p.beta}};
}

inline nlohmann::json values_json(const std::vector<Complex>& v) {
  auto arr = nlohmann::json::array();
  for (auto z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

inline nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json j;
  j["params"] = params_json(r.params);
  j["steps"] = r.steps;
  if (r.error) {
    j["error"] = *r.error;
    j["items"] = nlohmann::json::array();
    j["summary"] = nlohmann::json::object();
    return j;
  }
  j["tau"] = r.tau;
  j["integrator_error"] = r.integrator_error;
  auto items = nlohmann::json::array();
  for (const auto& it : r.items) {
    nlohmann::json ji{{"equation_id", to_string(it.equation_id)},
                      {"classification", to_string(it.classification)},
                      {"residual", it.residual},
                      {"tolerance", it.tolerance},
                      {"tau_basis_classification", to_string(it.tau_basis_classification)},
                      {"paper_value", values_json(it.paper_value)},
                      {"oracle_value", values_json(it.oracle_value)}};
    ji["chained_classification"] =
        it.chained_classification ? nlohmann::json(to_string(*it.chained_classification))
                                  : nlohmann::json(nullptr);
    if (it.repaired_value) {
      ji["repaired_value"] = values_json(*it.repaired_value);
      ji["repaired_classification"] = to_string(*it.repaired_classification);
      ji["tau_basis_repaired_classification"] = to_string(*it.tau_basis_repaired_classification);
    }
    items.push_back(std::move(ji));
  }
  j["items"] = std::move(items);
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [c, n] : r.summary) summary[to_string(c)] = n;
  j["summary"] = std::move(summary);
  return j;
}

inline std::string format_value(const std::vector<Complex>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ";";
    s += "(" + format_number(v[i].real()) + "," + format_number(v[i].imag()) + ")";
  }
  return s;
}

/// One line per equation: id, classification, residual, tolerance, tau-basis
/// classification, chained classification, printed value, oracle value.
inline void write_table(const VerifyReport& r, std::ostream& os) {
  os << "# V=" << format_number(r.params.V) << " muB=" << format_number(r.params.muB)
     << " omega=" << format_number(r.params.omega) << " beta=" << format_number(r.params.beta)
     << " steps=" << r.steps << "\n";
  if (r.error) {
    os << "# error: " << *r.error << "\n";
    return;
  }
  os << "equation_id\tclassification\tresidual\ttolerance\ttau_basis\tchained\tpaper_value"
        "\toracle_value\n";
  for (const auto& it : r.items) {
    os << to_string(it.equation_id) << '\t' << to_string(it.classification) << '\t'
       << format_number(it.residual) << '\t' << format_number(it.tolerance) << '\t'
       << to_string(it.tau_basis_classification) << '\t'
       << (it.chained_classification ? to_string(*it.chained_classification) : "-") << '\t'
       << format_value(it.paper_value) << '\t' << format_value(it.oracle_value) << '\n';
  }
  os << "# summary:";
  for (const auto& [c, n] : r.summary) os << ' ' << to_string(c) << '=' << n;
  os << '\n';
}

}  // namespace mixphase::verify
