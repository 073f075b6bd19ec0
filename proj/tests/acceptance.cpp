#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "gis/verify.hpp"

using namespace gis;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string summary(const verify::SuiteReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/%zu cases, max error %.3g", r.passed(), r.cases.size(), r.max_error());
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome traces() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = verify::suite_traces(1e-9);
  const double secs = seconds_since(t0);
  return {r.pass() && r.cases.size() == 200 && secs < 5.0, summary(r)};
}

Outcome hilbert_schmidt() {
  const auto r = verify::suite_hs(1e-9);
  return {r.pass() && !r.cases.empty(), summary(r)};
}

Outcome galerkin() {
  const auto t0 = std::chrono::steady_clock::now();
  const oracle::PointMassProblem p{ExtendedLength::infinite(),
                                   {{0.6, 1.3, 0.0}, {1.4, -0.8, 0.0}, {2.1, 0.5, 0.0}, {3.3, -1.1, 0.0}, {4.0, 0.9, 0.0}}};
  const GIString s = oracle::to_string(p);
  const auto ref = detail::leading(oracle::oracle_spectrum(p), 5);
  const auto got = detail::leading(solve_spectrum(s, default_nodes(s, 64)).eigenvalues, 5);
  double worst = got.size() == ref.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(got.size(), ref.size()); ++i) worst = std::max(worst, verify::rel_err(got[i], ref[i]));

  MeasureRepr leb;
  leb.density_grid = {0.0, 1.0};
  leb.density = {{1.0}};
  GIString unit;
  unit.length = ExtendedLength::finite(1.0);
  unit.w = anti_derivative_of_measure(leb, unit.length);
  const auto ev = solve_spectrum(unit, default_nodes(unit, 2048)).eigenvalues;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double lam1 = ev.empty() ? NAN : ev.front();
  const double dev = std::abs(lam1 - pi2) / pi2;
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "5-atom max rel err %.3g; lambda_1 = %.8f (rel dev %.3g from pi^2)", worst, lam1, dev);
  return {worst <= 1e-10 && dev <= 1e-3 && secs < 30.0, buf};
}

Outcome solver_crosscheck() {
  std::mt19937_64 rng(777);
  double worst = 0.0;
  int mismatched = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = verify::random_point_mass(rng, trial % 2 == 0);
    const GalerkinModel g = build_galerkin(oracle::to_string(p), oracle::positions(p));
    const auto a = solve_model(g).eigenvalues;
    const auto b = solve_pencil_qep(g).eigenvalues;
    if (a.size() != b.size()) {
      ++mismatched;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, verify::rel_err(b[i], a[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "50 instances, max rel dev %.3g, count mismatches %d", worst, mismatched);
  return {mismatched == 0 && worst <= 1e-8, buf};
}

Outcome calibration() {
  const auto r = verify::suite_calibration();
  return {r.pass() && r.cases.size() >= 12, summary(r)};
}

Outcome dp_trio() {
  const auto r = verify::suite_dp_calibration();
  return {r.pass() && r.cases.size() == 3, summary(r)};
}

Outcome crossval() {
  const auto r = verify::suite_crossval();
  return {r.pass(), summary(r)};
}

Outcome camassa_holm() {
  const auto r = verify::suite_ch_consistency();
  return {r.pass() && r.cases.size() >= 5, summary(r)};
}

Outcome consistency_gates() {
  int checked = 0, chain_failures = 0, gate_failures = 0;
  auto chain = [&](const Classification& c) {
    ++checked;
    try {
      check_consistency(c);
    } catch (const InvariantViolation&) {
      ++chain_failures;
    }
  };
  for (const auto& c : verify::calibration_suite()) {
    const auto r = verify::classify_case(c);
    chain(r);
    if (!verify::gate_consistent(c, r)) ++gate_failures;
  }
  for (const auto& p : verify::trace_corpus()) chain(classify(oracle::to_string(p), {1.5, 2.0, 4.0}));
  for (const auto& p : verify::ch_corpus()) {
    chain(ch::ch_classify(p, {1.5, 2.0}));
    chain(classify(ch::ch_to_string(p), {1.5, 2.0}));
  }
  for (const auto& d : verify::dp_calibration_cases()) chain(dprime::dp_classify({d.generator}));
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d classifications, %d chain violations, %d gate contradictions", checked,
                chain_failures, gate_failures);
  return {chain_failures == 0 && gate_failures == 0, buf};
}

}  // namespace

int main() {
  run(1, "trace identities on 200 point-mass instances", traces);
  run(2, "Hilbert-Schmidt identity on the half-line corpus", hilbert_schmidt);
  run(3, "Galerkin exact subspace and Lebesgue convergence", galerkin);
  run(4, "symmetric solver vs quadratic pencil", solver_crosscheck);
  run(5, "classifier calibration suite", calibration);
  run(6, "delta-prime calibration trio", dp_trio);
  run(7, "integral operator cross-validation", crossval);
  run(8, "Camassa-Holm transform consistency", camassa_holm);
  run(9, "implication chain and singularity gate", consistency_gates);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
