// Acceptance run: prints one PASS/FAIL line per criterion, exits non-zero if
// any criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixphase/mixphase.hpp"

namespace {

using namespace mixphase;
using neutrino::ModelParams;
constexpr double kPi = std::numbers::pi;
const ModelParams kRef{1.0, 0.5, 0.6, 1.0};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double x) { return format_number(x); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double circular(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

auto model_H(const ModelParams& p) {
  return [p](double t) { return neutrino::hamiltonian(p, t); };
}

Basis<2> eigenbasis0(const ModelParams& p) {
  const auto f = neutrino::eigensystem(p, 0.0);
  return {f.psi1, f.psi2};
}

// Counts clusters of values closer than tol on the circle.
std::size_t distinct_angles(const std::vector<double>& v, double tol) {
  std::vector<double> reps;
  for (double x : v) {
    bool seen = false;
    for (double r : reps) seen = seen || circular(x, r) <= tol;
    if (!seen) reps.push_back(x);
  }
  return reps.size();
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double tau = neutrino::period_tau(kRef);
  const std::size_t steps = 8192;
  const auto tr = integrate_propagator<2>(model_H(kRef), tau, steps, eigenbasis0(kRef));
  double sup = 0.0;
  for (std::size_t k = 1; k <= 64; ++k) {
    const std::size_t i = k * steps / 64;
    const auto cf = neutrino::closed_form_propagator(
        kRef, tr.grid[i], neutrino::PropagatorConvention::ode_consistent);
    sup = std::max(sup, frobenius_distance(tr.U[i], cf));
  }
  o.require(sup <= 1e-6, "sup distance " + num(sup));

  const CMatrix<2> H = Complex(3.0) * sigma_x() + Complex(2.0) * sigma_z();
  const auto exact = su2_exponential({3.0, 0.0, 2.0}, 10.0);
  auto err = [&](std::size_t n) {
    return frobenius_distance(
        integrate_propagator<2>([&](double) { return H; }, 10.0, n, computational_basis<2>())
            .final_U(),
        exact);
  };
  const double ratio = err(1024) / err(2048);
  o.require(ratio >= 12.0, "halving ratio " + num(ratio));
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "runtime " + num(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("sup=") + num(sup) +
              " ratio=" + num(ratio) + " time=" + num(secs) + "s";
  return o;
}

Outcome exact_identities() {
  Outcome o;
  double worst_delta = 0.0, worst_structure = 0.0;
  for (const auto& p : verify::generic_grid(50, 2024)) {
    const auto b = eigenbasis0(p);
    const auto tr = integrate_propagator<2>(model_H(p), neutrino::period_tau(p), 8192, b);
    worst_delta = std::max(worst_delta, std::abs(tr.final_delta()[0] + tr.final_delta()[1]));
    const auto M = in_basis(tr.final_U(), b);
    worst_structure = std::max({worst_structure, std::abs(M(1, 1) - std::conj(M(0, 0))),
                                std::abs(M(1, 0) + std::conj(M(0, 1)))});
  }
  o.require(worst_delta <= 1e-9, "delta sum " + num(worst_delta));
  o.require(worst_structure <= 1e-9, "matrix structure " + num(worst_structure));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max|d1+d2|=") + num(worst_delta) +
              " max structure defect=" + num(worst_structure);
  return o;
}

Outcome parallel_transport() {
  Outcome o;
  const auto tr = integrate_propagator<2>(model_H(kRef), neutrino::period_tau(kRef), 4096,
                                          eigenbasis0(kRef));
  const double r = parallel_transport_residual(parallel_transported(tr));
  o.require(r <= 1e-7, "residual " + num(r));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("residual=") + num(r);
  return o;
}

Outcome reality() {
  Outcome o;
  double worst_off = 0.0, worst_diag = 0.0, worst_quant = 0.0;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      const ModelParams p{1.0, 0.5, 0.1 + 0.19 * b, 0.5 * a};
      const auto basis = eigenbasis0(p);
      const auto w = neutrino::thermal_weights(p);
      const auto tr =
          integrate_propagator<2>(model_H(p), neutrino::period_tau(p), 8192, basis);
      const Ensemble<2> rho{basis, {w.lambda1, w.lambda2}};
      std::array<Complex, 2> f{std::polar(1.0, -tr.final_delta()[0]),
                               std::polar(1.0, -tr.final_delta()[1])};
      const auto Upar = tr.final_U() * spectral_sum(basis, f);
      const std::array<std::array<double, 2>, 2> weights{
          {{w.lambda1, w.lambda2}, {w.lambda2, w.lambda1}}};
      const Complex raw = offdiagonal_trace<2>(Upar, basis, weights);
      worst_off = std::max(worst_off, std::abs(raw.imag()) / std::abs(raw));
      const double arg = phase_functional(raw).arg;
      worst_quant = std::max(worst_quant, std::min(circular(arg, 0.0), circular(arg, kPi)));
      if (a == 0) {
        bool refused = false;
        try {
          shift_ensembles(rho);
        } catch (const DegenerateWeights&) {
          refused = true;
        }
        o.require(refused, "beta=0 weights not refused");
        const auto g = diagonal_mixed_phase(tr, rho);
        worst_diag = std::max(worst_diag, std::abs(g.raw.imag()) / std::abs(g.raw));
      } else {
        const auto g = offdiagonal_mixed_phase<2>(tr, shift_ensembles(rho), 2);
        o.require(std::abs(g.raw - raw) <= 1e-14, "guarded and raw traces differ");
      }
    }
  o.require(worst_off <= 1e-8, "off-diagonal |Im|/|raw| " + num(worst_off));
  o.require(worst_quant <= 1e-6, "off-diagonal phase off {0, pi} by " + num(worst_quant));
  o.require(worst_diag <= 1e-8, "diagonal |Im|/|raw| at beta=0 " + num(worst_diag));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("offdiag Im/|raw|<=") +
              num(worst_off) + " quantisation<=" + num(worst_quant) +
              " diag(beta=0) Im/|raw|<=" + num(worst_diag);
  return o;
}

Outcome temperature_contrast() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  sweep::SweepSpec spec;
  spec.axis = sweep::Axis::beta;
  spec.start = 0.0;
  spec.stop = 5.0;
  spec.points = 101;
  spec.fixed = kRef;
  const auto rows = sweep::run_sweep(spec, 1);
  std::vector<double> off, diag;
  for (const auto& r : rows) {
    if (r.result.offdiag.value) off.push_back(r.result.offdiag.value->arg);
    if (r.result.diag.value) diag.push_back(r.result.diag.value->arg);
  }
  double variation = 0.0;
  for (std::size_t i = 1; i < diag.size(); ++i) variation += circular(diag[i], diag[i - 1]);
  const std::size_t n_off = distinct_angles(off, 1e-6);
  const std::size_t n_diag = distinct_angles(diag, 1e-6);
  const double secs = seconds_since(t0);
  o.require(n_off <= 2, "off-diagonal distinct values " + std::to_string(n_off));
  o.require(n_diag >= 10, "diagonal distinct values " + std::to_string(n_diag));
  o.require(variation > 0.1, "diagonal total variation " + num(variation));
  o.require(secs < 5.0, "runtime " + num(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("offdiag distinct=") +
              std::to_string(n_off) + " diag distinct=" + std::to_string(n_diag) +
              " TV=" + num(variation) + " time=" + num(secs) + "s";
  return o;
}

Outcome verification_ledger() {
  Outcome o;
  std::ifstream in(std::string(MIXPHASE_FIXTURES) + "/grid25_seed7.json");
  const auto golden = nlohmann::json::parse(in);
  const auto grid = verify::generic_grid(25, 7);
  const auto a = verify::verify_grid(grid, 8192, 4);
  const auto b = verify::verify_grid(grid, 16384, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    o.require(!a[i].error && !b[i].error, "point " + std::to_string(i) + " errored");
    if (a[i].error || b[i].error) continue;
    for (std::size_t k = 0; k < a[i].items.size(); ++k) {
      const auto& x = a[i].items[k];
      const std::string id = verify::to_string(x.equation_id);
      o.require(x.classification == b[i].items[k].classification,
                id + " changes with steps at point " + std::to_string(i));
      o.require(golden["classifications"][id] == verify::to_string(x.classification),
                id + " differs from fixture at point " + std::to_string(i));
    }
    o.require(a[i].item(verify::EquationId::propagator_Eq14_ode).classification ==
                  verify::Classification::match,
              "ode propagator not match");
    o.require(a[i].item(verify::EquationId::delta2_Eq18).classification ==
                  verify::Classification::match,
              "delta2 not match");
  }
  std::string summary;
  for (const auto& [c, n] : a[0].summary)
    summary += std::string(summary.empty() ? "" : " ") + verify::to_string(c) + "=" +
               std::to_string(n);
  o.detail += (o.detail.empty() ? "" : "; ") + summary;
  return o;
}

template <std::size_t N>
struct Path {
  CMatrix<N> H0, H1;
  double a = 0.0, c = 0.0, k = 1.0;  // identity shift a + c sin(k t)
  bool shifted = false;
  CMatrix<N> operator()(double t) const {
    CMatrix<N> H = H0 + Complex(std::sin(1.1 * t)) * H1;
    if (shifted) H += Complex(a + c * std::sin(k * t)) * CMatrix<N>::identity();
    return H;
  }
};

template <std::size_t N>
std::pair<double, double> both_phases(const Path<N>& H, const Basis<N>& b,
                                      const std::array<double, N>& w) {
  const auto tr = integrate_propagator<N>(H, 2.5, 2048, b);
  const Ensemble<N> e{b, w};
  const auto s = shift_ensembles(e);
  const std::vector<Ensemble<N>> pair(s.begin(), s.begin() + 2);
  return {diagonal_mixed_phase(tr, e).arg, offdiagonal_mixed_phase<N>(tr, pair, 2).arg};
}

template <std::size_t N>
double invariance_defect(std::mt19937_64& rng, bool gauge) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto herm = [&] {
    CMatrix<N> m;
    for (std::size_t i = 0; i < N; ++i) {
      m(i, i) = u(rng);
      for (std::size_t j = i + 1; j < N; ++j) {
        m(i, j) = Complex(u(rng), u(rng));
        m(j, i) = std::conj(m(i, j));
      }
    }
    return m;
  };
  Path<N> path{herm(), herm()};
  const auto U = expm(Complex(0.0, -2.0) * herm());
  Basis<N> b;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < N; ++i) b[k][i] = U(i, k);
  std::array<double, N> w;
  double sum = 0.0;
  for (auto& x : w) sum += (x = 0.1 + std::abs(u(rng)));
  for (auto& x : w) x /= sum;

  const auto [d0, o0] = both_phases<N>(path, b, w);
  if (gauge) {
    for (auto& v : b) v = std::polar(1.0, kPi * u(rng)) * v;
  } else {
    path.shifted = true;
    path.a = 2.0 * u(rng);
    path.c = 2.0 * u(rng);
    path.k = 2.0 + u(rng);
  }
  const auto [d1, o1] = both_phases<N>(path, b, w);
  return std::max(circular(d0, d1), circular(o0, o1));
}

Outcome invariance() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst_gauge = 0.0, worst_shift = 0.0;
  for (int i = 0; i < 100; ++i) {
    worst_gauge = std::max({worst_gauge, invariance_defect<2>(rng, true),
                            invariance_defect<3>(rng, true)});
    worst_shift = std::max({worst_shift, invariance_defect<2>(rng, false),
                            invariance_defect<3>(rng, false)});
  }
  o.require(worst_gauge <= 1e-8, "gauge defect " + num(worst_gauge));
  o.require(worst_shift <= 1e-8, "identity-shift defect " + num(worst_shift));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("gauge<=") + num(worst_gauge) +
              " shift<=" + num(worst_shift);
  return o;
}

std::string capture(const std::string& args, int& code) {
  const std::string cmd = std::string(MIXPHASE_CLI) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Outcome determinism() {
  Outcome o;
  const std::string args = "sweep --axis beta --start 0 --stop 5 --points 101";
  int c1 = 0, c2 = 0, c3 = 0;
  const auto first = capture(args, c1);
  const auto second = capture(args, c2);
  const auto parallel = capture(args + " --threads 8", c3);
  o.require(c1 == 0 && c2 == 0 && c3 == 0, "sweep exit codes");
  o.require(!first.empty(), "empty output");
  o.require(first == second, "repeated runs differ");
  o.require(first == parallel, "serial and parallel differ");

  sweep::SweepSpec spec;
  spec.axis = sweep::Axis::omega;
  spec.start = 0.1;
  spec.stop = 2.0;
  spec.points = 33;
  spec.fixed = kRef;
  std::ostringstream s1, s2;
  sweep::write_csv(spec.axis, sweep::run_sweep(spec, 1), s1);
  sweep::write_csv(spec.axis, sweep::run_sweep(spec, 6), s2);
  o.require(s1.str() == s2.str(), "in-process serial and parallel differ");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(first.size()) +
              " bytes identical across 3 runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"exact identities", exact_identities},
      {"parallel transport", parallel_transport},
      {"reality and quantisation", reality},
      {"temperature sensitivity contrast", temperature_contrast},
      {"verification ledger", verification_ledger},
      {"gauge and identity-shift invariance", invariance},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
