#pragma once

// Single-point phase evaluation for the neutrino model, parameter sweeps and
// their CSV / JSON encodings.

#include <cstddef>
#include <optional>
#include <ostream>
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

namespace mixphase::sweep {

using neutrino::ModelParams;

inline constexpr std::size_t kDefaultSteps = 8192;

struct PointOptions {
  std::size_t steps = kDefaultSteps;
  std::optional<double> t_final;  // defaults to tau
};

enum class PhaseStatus { ok, undefined_phase, degenerate_weights };

struct PhaseOutcome {
  PhaseStatus status = PhaseStatus::ok;
  std::optional<PhaseFactor> value;
  std::string message;
};

struct PointResult {
  ModelParams params{};
  double Omega = 0.0;
  double tau = 0.0;
  double T = 0.0;  // final time actually used
  neutrino::ThermalWeights weights{};
  double delta1 = 0.0;
  double delta2 = 0.0;
  double integrator_error = 0.0;
  PhaseOutcome diag;
  PhaseOutcome offdiag;  // gamma^(2) of rho_1, rho_2
};

/// Integrates the model over [0, T] in the t = 0 eigenbasis and evaluates
/// the diagonal and second-order off-diagonal mixed-state phases of the
/// thermal ensemble.
inline PointResult evaluate_point(const ModelParams& p, const PointOptions& opt = {}) {
  p.validate();
  PointResult r;
  r.params = p;
  r.Omega = neutrino::rotating_frame(p).Omega;
  r.tau = neutrino::period_tau(p);
  r.T = opt.t_final.value_or(r.tau);
  if (!(r.T >= 0.0)) throw InvalidArgument("final time must be >= 0");

  const auto frame = neutrino::eigensystem(p, 0.0);
  const Basis<2> basis{frame.psi1, frame.psi2};
  const auto H = [&p](double t) { return neutrino::hamiltonian(p, t); };
  const auto trace = integrate_propagator<2>(H, r.T, opt.steps, basis);
  r.integrator_error = trace.error_estimate;
  r.weights = neutrino::thermal_weights(p);
  r.delta1 = trace.final_delta()[0];
  r.delta2 = trace.final_delta()[1];

  const Ensemble<2> rho{basis, {r.weights.lambda1, r.weights.lambda2}};
  try {
    r.diag.value = diagonal_mixed_phase(trace, rho);
  } catch (const UndefinedPhase& e) {
    r.diag = {PhaseStatus::undefined_phase, std::nullopt, e.what()};
  }
  try {
    const auto companions = shift_ensembles(rho);
    r.offdiag.value = offdiagonal_mixed_phase<2>(trace, companions, 2);
  } catch (const UndefinedPhase& e) {
    r.offdiag = {PhaseStatus::undefined_phase, std::nullopt, e.what()};
  } catch (const DegenerateWeights& e) {
    r.offdiag = {PhaseStatus::degenerate_weights, std::nullopt, e.what()};
  }
  return r;
}

inline nlohmann::json phase_json(const PhaseOutcome& o) {
  if (!o.value) return {{"status", o.status == PhaseStatus::undefined_phase ? "undefined_phase"
                                                                          : "degenerate_weights"},
                        {"message", o.message}};
  return {{"status", "ok"},
          {"arg_re", o.value->raw.real()},
          {"arg_im", o.value->raw.imag()},
          {"factor_re", o.value->unit.real()},
          {"factor_im", o.value->unit.imag()},
          {"phase", o.value->arg}};
}

inline nlohmann::json to_json(const PointResult& r) {
  return {{"params",
           {{"V", r.params.V}, {"muB", r.params.muB}, {"omega", r.params.omega}, {"beta", r.params.beta}}},
          {"lambda1", r.weights.lambda1},
          {"lambda2", r.weights.lambda2},
          {"Omega", r.Omega},
          {"tau", r.tau},
          {"t_final", r.T},
          {"delta1", r.delta1},
          {"delta2", r.delta2},
          {"integrator_error", r.integrator_error},
          {"diagonal", phase_json(r.diag)},
          {"offdiagonal", phase_json(r.offdiag)}};
}

inline void write_phase_line(std::ostream& os, std::string_view label, const PhaseOutcome& o) {
  os << label << ": ";
  if (!o.value) {
    os << "undefined (" << o.message << ")\n";
    return;
  }
  os << "phase=" << format_number(o.value->arg) << " factor=(" << format_number(o.value->unit.real())
     << "," << format_number(o.value->unit.imag()) << ") argument=("
     << format_number(o.value->raw.real()) << "," << format_number(o.value->raw.imag()) << ")\n";
}

inline void write_table(const PointResult& r, std::ostream& os) {
  os << "lambda1: " << format_number(r.weights.lambda1) << "\n"
     << "lambda2: " << format_number(r.weights.lambda2) << "\n"
     << "Omega: " << format_number(r.Omega) << "\n"
     << "tau: " << format_number(r.tau) << "\n"
     << "t_final: " << format_number(r.T) << "\n"
     << "delta1: " << format_number(r.delta1) << "\n"
     << "delta2: " << format_number(r.delta2) << "\n";
  write_phase_line(os, "diagonal", r.diag);
  write_phase_line(os, "offdiagonal", r.offdiag);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Axis { beta, omega, muB, V };

inline const char* to_string(Axis a) {
  switch (a) {
    case Axis::beta: return "beta";
    case Axis::omega: return "omega";
    case Axis::muB: return "muB";
    case Axis::V: return "V";
  }
  return "?";
}

inline std::optional<Axis> parse_axis(std::string_view s) {
  for (auto a : {Axis::beta, Axis::omega, Axis::muB, Axis::V})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

struct SweepSpec {
  Axis axis = Axis::beta;
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = 2;
  ModelParams fixed{};
  PointOptions point{};

  double value(std::size_t i) const {
    if (i + 1 == points) return stop;
    return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
  }

  ModelParams params_at(std::size_t i) const {
    ModelParams p = fixed;
    const double v = value(i);
    switch (axis) {
      case Axis::beta: p.beta = v; break;
      case Axis::omega: p.omega = v; break;
      case Axis::muB: p.muB = v; break;
      case Axis::V: p.V = v; break;
    }
    return p;
  }

  void validate() const {
    if (points < 2) throw InvalidArgument("sweep needs at least 2 points");
    if (!(start < stop)) throw InvalidArgument("sweep needs start < stop");
    if (point.steps < 2) throw InvalidArgument("steps must be >= 2");
    for (std::size_t i = 0; i < points; ++i) params_at(i).validate();
  }
};

struct SweepRow {
  double axis_value = 0.0;
  PointResult result;
};

/// Evaluates every grid point (possibly concurrently) and returns the rows
/// in axis order. Rows with undefined phases are kept; a warning per such
/// row is written to `diagnostics` in axis order.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 1,
                                       std::ostream* diagnostics = nullptr) {
  spec.validate();
  auto rows = ordered_parallel_map(spec.points, threads, [&](std::size_t i) {
    return SweepRow{spec.value(i), evaluate_point(spec.params_at(i), spec.point)};
  });
  if (diagnostics)
    for (const auto& row : rows) {
      for (const auto* o : {&row.result.diag, &row.result.offdiag})
        if (!o->value)
          *diagnostics << "warning: " << to_string(spec.axis) << "="
                       << format_number(row.axis_value) << ": "
                       << (o == &row.result.diag ? "diagonal" : "off-diagonal")
                       << " phase undefined: " << o->message << "\n";
    }
  return rows;
}

inline constexpr std::string_view kCsvHeader =
    "axis,axis_value,lambda1,delta1,diag_arg_re,diag_arg_im,diag_phase,offdiag_arg_re,"
    "offdiag_arg_im,offdiag_phase";

inline void write_csv(Axis axis, const std::vector<SweepRow>& rows, std::ostream& os) {
  os << kCsvHeader << '\n';
  auto phase_fields = [&os](const PhaseOutcome& o) {
    if (!o.value) {
      os << ",,,";
      return;
    }
    os << ',' << format_number(o.value->raw.real()) << ',' << format_number(o.value->raw.imag())
       << ',' << format_number(o.value->arg);
  };
  for (const auto& row : rows) {
    os << to_string(axis) << ',' << format_number(row.axis_value) << ','
       << format_number(row.result.weights.lambda1) << ',' << format_number(row.result.delta1);
    phase_fields(row.result.diag);
    phase_fields(row.result.offdiag);
    os << '\n';
  }
}

inline nlohmann::json to_json(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  auto arr = nlohmann::json::array();
  auto put = [](nlohmann::json& j, const char* prefix, const PhaseOutcome& o) {
    const std::string p = prefix;
    if (o.value) {
      j[p + "_arg_re"] = o.value->raw.real();
      j[p + "_arg_im"] = o.value->raw.imag();
      j[p + "_phase"] = o.value->arg;
    } else {
      j[p + "_arg_re"] = nullptr;
      j[p + "_arg_im"] = nullptr;
      j[p + "_phase"] = nullptr;
    }
  };
  for (const auto& row : rows) {
    nlohmann::json j{{"axis_value", row.axis_value},
                     {"lambda1", row.result.weights.lambda1},
                     {"delta1", row.result.delta1}};
    put(j, "diag", row.result.diag);
    put(j, "offdiag", row.result.offdiag);
    arr.push_back(std::move(j));
  }
  return {{"axis", to_string(spec.axis)},
          {"fixed",
           {{"V", spec.fixed.V}, {"muB", spec.fixed.muB}, {"omega", spec.fixed.omega},
            {"beta", spec.fixed.beta}}},
          {"steps", spec.point.steps},
          {"rows", std::move(arr)}};
}

// ---------------------------------------------------------------------------
// Propagator comparison

struct PropagateResult {
  double t = 0.0;
  std::size_t steps = 0;
  CMatrix<2> numeric;
  CMatrix<2> ode_consistent;
  CMatrix<2> paper_literal;
  double numeric_vs_ode = 0.0;
  double numeric_vs_literal = 0.0;
  double ode_vs_literal = 0.0;
  double integrator_error = 0.0;
};

inline PropagateResult propagate(const ModelParams& p, double t, std::size_t steps) {
  p.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("t must be finite and >= 0");
  const auto H = [&p](double s) { return neutrino::hamiltonian(p, s); };
  const auto trace = integrate_propagator<2>(H, t, steps, computational_basis<2>());
  PropagateResult r;
  r.t = t;
  r.steps = steps;
  r.numeric = trace.final_U();
  r.integrator_error = trace.error_estimate;
  r.ode_consistent =
      neutrino::closed_form_propagator(p, t, neutrino::PropagatorConvention::ode_consistent);
  r.paper_literal =
      neutrino::closed_form_propagator(p, t, neutrino::PropagatorConvention::paper_literal);
  r.numeric_vs_ode = frobenius_distance(r.numeric, r.ode_consistent);
  r.numeric_vs_literal = frobenius_distance(r.numeric, r.paper_literal);
  r.ode_vs_literal = frobenius_distance(r.ode_consistent, r.paper_literal);
  return r;
}

inline nlohmann::json matrix_json(const CMatrix<2>& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < 2; ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json to_json(const PropagateResult& r) {
  return {{"t", r.t},
          {"steps", r.steps},
          {"numeric", matrix_json(r.numeric)},
          {"ode_consistent", matrix_json(r.ode_consistent)},
          {"paper_literal", matrix_json(r.paper_literal)},
          {"distances",
           {{"numeric_vs_ode_consistent", r.numeric_vs_ode},
            {"numeric_vs_paper_literal", r.numeric_vs_literal},
            {"ode_consistent_vs_paper_literal", r.ode_vs_literal}}},
          {"integrator_error", r.integrator_error}};
}

inline void write_table(const PropagateResult& r, std::ostream& os) {
  auto dump = [&os](std::string_view name, const CMatrix<2>& m) {
    os << name << ":\n";
    for (std::size_t i = 0; i < 2; ++i) {
      os << "  ";
      for (std::size_t j = 0; j < 2; ++j)
        os << (j ? "  " : "") << '(' << format_number(m(i, j).real()) << ','
           << format_number(m(i, j).imag()) << ')';
      os << '\n';
    }
  };
  os << "t: " << format_number(r.t) << "\nsteps: " << r.steps << "\n";
  dump("numeric", r.numeric);
  dump("ode-consistent", r.ode_consistent);
  dump("paper-literal", r.paper_literal);
  os << "distance numeric/ode-consistent: " << format_number(r.numeric_vs_ode) << "\n"
     << "distance numeric/paper-literal: " << format_number(r.numeric_vs_literal) << "\n"
     << "distance ode-consistent/paper-literal: " << format_number(r.ode_vs_literal) << "\n";
}

}  // namespace mixphase::sweep
