// mixphase: mixed-state geometric phases of a neutrino spin precessing in a
// rotating magnetic field.
//
// Exit codes: 0 success, 2 usage, 3 degenerate frame/spectrum, 4 undefined
// phase, 5 inconsistent verification, 1 any other failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mixphase/mixphase.hpp"

namespace {

using namespace mixphase;
using neutrino::ModelParams;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitUndefinedPhase = 4;
constexpr int kExitInconsistent = 5;

struct ModelFlags {
  double V = 1.0;
  double muB = 0.5;
  double mu = 0.0;
  double B = 0.0;
  double omega = 0.6;
  double beta = 1.0;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* B_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--V", V, "mass/matter term V")->capture_default_str();
    auto* muB_opt = app->add_option("--mu-B", muB, "product mu_nu*B")->capture_default_str();
    mu_opt = app->add_option("--mu", mu, "neutrino magnetic moment (with --B)");
    B_opt = app->add_option("--B", B, "field magnitude (with --mu)");
    mu_opt->needs(B_opt);
    B_opt->needs(mu_opt);
    muB_opt->excludes(mu_opt);
    muB_opt->excludes(B_opt);
    app->add_option("--omega", omega, "field rotation angular frequency")->capture_default_str();
    app->add_option("--beta", beta, "inverse temperature")->capture_default_str();
  }

  ModelParams params() const {
    ModelParams p{V, muB, omega, beta};
    if (mu_opt && mu_opt->count() > 0) p.muB = mu * B;
    return p;
  }
};

bool check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (format == a) return true;
  std::cerr << "error: --format " << format << " is not supported by this command\n";
  return false;
}

int run_phases(const ModelFlags& model, std::optional<double> t, std::size_t steps,
               const std::string& format) {
  if (!check_format(format, {"table", "json"})) return kExitUsage;
  sweep::PointOptions opt;
  opt.steps = steps;
  opt.t_final = t;
  const auto r = sweep::evaluate_point(model.params(), opt);
  if (format == "json")
    std::cout << sweep::to_json(r).dump(2) << "\n";
  else
    sweep::write_table(r, std::cout);
  for (const auto* o : {&r.diag, &r.offdiag})
    if (o->status == sweep::PhaseStatus::undefined_phase) {
      std::cerr << "error: " << o->message << "\n";
      return kExitUndefinedPhase;
    }
  return kExitOk;
}

int run_sweep(const ModelFlags& model, const std::string& axis_name, double start, double stop,
              std::size_t points, std::optional<double> t, std::size_t steps, unsigned threads,
              const std::string& format) {
  if (!check_format(format, {"csv", "json"})) return kExitUsage;
  const auto axis = sweep::parse_axis(axis_name);
  if (!axis) {
    std::cerr << "error: unknown axis '" << axis_name << "' (beta, omega, muB, V)\n";
    return kExitUsage;
  }
  sweep::SweepSpec spec;
  spec.axis = *axis;
  spec.start = start;
  spec.stop = stop;
  spec.points = points;
  spec.fixed = model.params();
  spec.point.steps = steps;
  spec.point.t_final = t;
  const auto rows = sweep::run_sweep(spec, threads, &std::cerr);
  if (format == "json")
    std::cout << sweep::to_json(spec, rows).dump(2) << "\n";
  else
    sweep::write_csv(spec.axis, rows, std::cout);
  return kExitOk;
}

void emit_reports(const std::vector<verify::VerifyReport>& reports, bool single,
                  const std::string& format, bool consistent) {
  if (format == "json") {
    if (single) {
      std::cout << verify::to_json(reports.front()).dump(2) << "\n";
      return;
    }
    auto arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(verify::to_json(r));
    std::cout << nlohmann::json{{"consistent", consistent}, {"reports", arr}}.dump(2) << "\n";
    return;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) std::cout << "\n";
    verify::write_table(reports[i], std::cout);
  }
}

int run_verify(const ModelFlags& model, std::size_t grid, std::uint64_t seed, std::size_t steps,
               unsigned threads, const std::string& format) {
  if (!check_format(format, {"table", "json"})) return kExitUsage;
  if (grid == 0) {
    const auto report = verify::verify_point(model.params(), steps);
    emit_reports({report}, true, format, true);
    return kExitOk;
  }
  try {
    const auto reports = verify::verify_grid(verify::generic_grid(grid, seed), steps, threads);
    emit_reports(reports, false, format, true);
  } catch (const verify::InconsistentClassification& e) {
    emit_reports(e.reports(), false, format, false);
    std::cerr << "error: " << e.what() << "\n";
    return kExitInconsistent;
  }
  return kExitOk;
}

int run_propagate(const ModelFlags& model, std::optional<double> t, std::size_t steps,
                  const std::string& format) {
  if (!check_format(format, {"table", "json"})) return kExitUsage;
  const auto p = model.params();
  const double time = t ? *t : neutrino::period_tau(p);
  const auto r = sweep::propagate(p, time, steps);
  if (format == "json")
    std::cout << sweep::to_json(r).dump(2) << "\n";
  else
    sweep::write_table(r, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-state geometric phases for a neutrino spin in a rotating magnetic field"};
  app.require_subcommand(1);

  ModelFlags model;
  std::optional<double> t;
  std::size_t steps = sweep::kDefaultSteps;
  // CLI11 writes default_val into the bound variable at registration, so each
  // subcommand gets its own format string
  std::string phases_format, sweep_format, verify_format, propagate_format;
  unsigned threads = 1;

  auto* phases = app.add_subcommand("phases", "diagonal and off-diagonal phases at one point");
  model.attach(phases);
  phases->add_option("--t", t, "final time (default: tau)");
  phases->add_option("--steps", steps, "integrator steps")->capture_default_str();
  phases->add_option("--format", phases_format, "table or json")->default_val("table");

  std::string axis;
  double start = 0.0, stop = 1.0;
  std::size_t points = 2;
  auto* sweep_cmd = app.add_subcommand("sweep", "phases along one parameter axis");
  model.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "beta, omega, muB or V")->required();
  sweep_cmd->add_option("--start", start)->required();
  sweep_cmd->add_option("--stop", stop)->required();
  sweep_cmd->add_option("--points", points)->required();
  sweep_cmd->add_option("--t", t, "final time (default: tau of each point)");
  sweep_cmd->add_option("--steps", steps, "integrator steps")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "worker threads")->capture_default_str();
  sweep_cmd->add_option("--format", sweep_format, "csv or json")->default_val("csv");

  std::size_t grid = 0;
  std::uint64_t seed = 7;
  auto* verify_cmd = app.add_subcommand("verify", "classify the closed forms against the oracle");
  model.attach(verify_cmd);
  verify_cmd->add_option("--grid", grid, "number of random generic points (0: use the flags)")
      ->capture_default_str();
  verify_cmd->add_option("--seed", seed, "grid seed")->capture_default_str();
  verify_cmd->add_option("--steps", steps, "integrator steps")->capture_default_str();
  verify_cmd->add_option("--threads", threads, "worker threads")->capture_default_str();
  verify_cmd->add_option("--format", verify_format, "table or json")->default_val("table");

  auto* propagate_cmd = app.add_subcommand("propagate", "numeric vs closed-form propagators");
  model.attach(propagate_cmd);
  propagate_cmd->add_option("--t", t, "time (default: tau)");
  propagate_cmd->add_option("--steps", steps, "integrator steps")->capture_default_str();
  propagate_cmd->add_option("--format", propagate_format, "table or json")->default_val("table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*phases) return run_phases(model, t, steps, phases_format);
    if (*sweep_cmd)
      return run_sweep(model, axis, start, stop, points, t, steps, threads, sweep_format);
    if (*verify_cmd) return run_verify(model, grid, seed, steps, threads, verify_format);
    if (*propagate_cmd) return run_propagate(model, t, steps, propagate_format);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateFrame& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DegenerateSpectrum& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const UndefinedPhase& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUndefinedPhase;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
