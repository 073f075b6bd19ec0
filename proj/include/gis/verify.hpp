#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gis/camassa_holm.hpp"
#include "gis/criteria.hpp"
#include "gis/delta_prime.hpp"
#include "gis/integral_ops.hpp"
#include "gis/oracle.hpp"
#include "gis/pencil_solver.hpp"

/// Self-checks against the point-mass oracle, closed forms and cross-path identities.
namespace gis::verify {

struct CaseResult {
  std::string name;
  bool pass = false;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CaseResult> cases;

  bool pass() const {
    return std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.pass; });
  }
  int passed() const {
    return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.pass; }));
  }
  double max_error() const {
    double m = 0.0;
    for (const auto& c : cases) m = std::max(m, c.error);
    return m;
  }
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Random point-mass string: N <= max_n masses, mixed-sign ω weights, some υ weights.
inline oracle::PointMassProblem random_point_mass(std::mt19937_64& rng, bool finite, int max_n = 12) {
  std::uniform_int_distribution<int> count(1, max_n);
  std::uniform_real_distribution<double> gap(0.2, 1.5), weight(0.2, 2.0), coin(0.0, 1.0);
  oracle::PointMassProblem p;
  const int n = count(rng);
  double x = 0.0;
  for (int k = 0; k < n; ++k) {
    x += gap(rng);
    oracle::PointMass m{x, 0.0, 0.0};
    m.omega_weight = (coin(rng) < 0.5 ? -1.0 : 1.0) * weight(rng);
    if (coin(rng) < 0.4) m.upsilon_weight = weight(rng);
    p.masses.push_back(m);
  }
  p.length = finite ? ExtendedLength::finite(x + gap(rng)) : ExtendedLength::infinite();
  return p;
}

inline std::vector<oracle::PointMassProblem> trace_corpus(std::uint64_t seed = 20240601, int count = 200) {
  std::mt19937_64 rng(seed);
  std::vector<oracle::PointMassProblem> out;
  for (int i = 0; i < count; ++i) out.push_back(random_point_mass(rng, i % 2 == 0));
  return out;
}

/// Expected verdicts derived by hand for a calibration instance.
struct CalibrationCase {
  std::string name;
  std::variant<GIString, KreinString> problem;
  std::vector<double> p_list;
  Tri zero_not_in_spectrum;
  Tri discrete;
  Tri schatten;  // expected for every p in p_list
  std::optional<double> trace;
};

namespace detail {

inline GIString half_line(AntiDerivative w, MeasureRepr u = {}) {
  GIString s;
  s.w = std::move(w);
  s.upsilon = std::move(u);
  return s;
}

inline AntiDerivative tail_only(WTail t) {
  AntiDerivative w;
  w.tail = std::move(t);
  return w;
}

inline MeasureRepr density_tail(DensityTail t) {
  MeasureRepr m;
  m.tail = std::move(t);
  return m;
}

}  // namespace detail

inline std::vector<CalibrationCase> calibration_suite() {
  using detail::density_tail;
  using detail::half_line;
  using detail::tail_only;
  const auto inf = ExtendedLength::infinite();
  const auto unit = ExtendedLength::finite(1.0);
  std::vector<CalibrationCase> cs;

  cs.push_back({"zero string", half_line(tail_only(ConstantTail{0.0})), {1.5, 2.0}, Tri::Yes, Tri::Yes, Tri::Yes, 0.0});
  cs.push_back({"w = x (Lebesgue omega)", half_line(tail_only(PolynomialTail{{0.0, 1.0}})), {2.0}, Tri::No, Tri::No, Tri::No,
                std::nullopt});
  cs.push_back({"Krein Lebesgue omega", KreinString{inf, density_tail(PowerDensity{1.0, 0.0, 1.0})}, {2.0}, Tri::No,
                Tri::No, Tri::No, std::nullopt});
  cs.push_back({"Krein (1+x)^-4 density", KreinString{inf, density_tail(PowerDensity{1.0, 4.0, 1.0})}, {0.6, 1.0, 2.0},
                Tri::Yes, Tri::Yes, Tri::Yes, 1.0 / 6.0});
  {
    MeasureRepr m;
    m.atoms = {{1.0, 1.0}};
    cs.push_back({"Krein single mass", KreinString{inf, m}, {0.75, 1.0}, Tri::Yes, Tri::Yes, Tri::Yes, 1.0});
  }
  {
    GIString s;
    s.length = unit;
    s.w = tail_only(EndpointTail{0.0, 1.0, 1.0, 1.0});
    cs.push_back({"L = 1, w = 1/(1-x)", s, {2.0}, Tri::Yes, Tri::No, Tri::No, std::nullopt});
  }
  cs.push_back({"w = 1 + (1+x)^-1", half_line(tail_only(PowerTail{1.0, 1.0, 1.0, 1.0})), {2.0}, Tri::Yes, Tri::No, Tri::No,
                std::nullopt});
  cs.push_back({"w = (1+x)^-2", half_line(tail_only(PowerTail{0.0, 1.0, 2.0, 1.0})), {1.5, 4.0}, Tri::Yes, Tri::Yes,
                Tri::Yes, std::nullopt});
  cs.push_back({"w = (1+x)^-1/2", half_line(tail_only(PowerTail{0.0, 1.0, 0.5, 1.0})), {2.0}, Tri::No, Tri::No, Tri::No,
                std::nullopt});
  cs.push_back({"upsilon density (1+x)^-2", half_line(tail_only(ConstantTail{0.0}), density_tail(PowerDensity{1.0, 2.0, 1.0})),
                {2.0}, Tri::Yes, Tri::No, Tri::No, std::nullopt});
  cs.push_back({"upsilon density (1+x)^-3", half_line(tail_only(ConstantTail{0.0}), density_tail(PowerDensity{1.0, 3.0, 1.0})),
                {1.5, 2.0}, Tri::Yes, Tri::Yes, Tri::Yes, std::nullopt});
  cs.push_back({"constant upsilon density", half_line(tail_only(ConstantTail{0.0}), density_tail(PowerDensity{1.0, 0.0, 1.0})),
                {2.0}, Tri::No, Tri::No, Tri::No, std::nullopt});
  {
    GIString s;
    s.length = unit;
    s.w = tail_only(EndpointTail{0.0, 1.0, 0.25, 1.0});
    cs.push_back({"L = 1, w = (1-x)^-1/4", s, {2.0}, Tri::Yes, Tri::Yes, Tri::Yes, std::nullopt});
  }
  {
    GIString s;
    s.length = unit;
    s.w = tail_only(EndpointTail{0.0, 1.0, 0.75, 1.0});
    cs.push_back({"L = 1, w = (1-x)^-3/4", s, {1.5, 2.0}, Tri::Yes, Tri::Yes, Tri::Yes, std::nullopt});
  }
  {
    GIString s;
    s.length = unit;
    s.w.grid = {0.0, 1.0};
    s.w.segments = {{0.0}};
    s.w.tail = NoTail{};
    s.upsilon.tail = EndpointDensity{1.0, 2.0, 1.0};
    cs.push_back({"L = 1, upsilon density (1-x)^-2", s, {2.0}, Tri::Yes, Tri::No, Tri::No, std::nullopt});
  }
  {
    MeasureRepr m;
    m.tail = EndpointDensity{1.0, 0.5, 1.0};
    cs.push_back({"Krein L = 1, density (1-x)^-1/2", KreinString{unit, m}, {0.75, 2.0}, Tri::Yes, Tri::Yes, Tri::Yes,
                  std::nullopt});
  }
  {
    oracle::PointMassProblem p{ExtendedLength::finite(4.0), {{1.0, 1.0, 0.5}, {2.0, -2.0, 0.0}, {3.0, 0.5, 1.0}}};
    cs.push_back({"L = 4, three point masses", oracle::to_string(p), {1.5, 2.0}, Tri::Yes, Tri::Yes, Tri::Yes,
                  oracle::oracle_trace_sums(p).inverse_sum});
  }
  return cs;
}

inline Classification classify_case(const CalibrationCase& c) {
  if (auto k = std::get_if<KreinString>(&c.problem)) return classify_krein(*k, c.p_list);
  return classify(std::get<GIString>(c.problem), c.p_list);
}

/// The gate must agree with every trace-class claim made by a classification.
inline bool gate_consistent(const CalibrationCase& c, const Classification& r) {
  if (auto s = std::get_if<GIString>(&c.problem)) {
    if (r.trace_sum) return singularity_gate(*s, SingularityClaim::GisTraceClass).value == Tri::Yes;
    return true;
  }
  const auto& k = std::get<KreinString>(c.problem);
  for (const auto& sp : r.schatten)
    if (sp.p <= 0.5 && sp.verdict.value == Tri::Yes)
      return singularity_gate(k.to_gis(), SingularityClaim::KreinHalfClass).value == Tri::Yes;
  return true;
}

inline SuiteReport suite_calibration() {
  SuiteReport rep{"calibration", {}};
  for (const auto& c : calibration_suite()) {
    CaseResult r{c.name, true, 0.0, 1e-12, ""};
    try {
      const Classification cl = classify_case(c);
      check_consistency(cl);
      bool ok = cl.zero_not_in_spectrum.value == c.zero_not_in_spectrum && cl.discrete.value == c.discrete;
      for (const auto& sp : cl.schatten) ok = ok && sp.verdict.value == c.schatten;
      if (c.trace) {
        ok = ok && cl.trace_sum.has_value();
        if (cl.trace_sum) {
          r.error = rel_err(cl.trace_sum->value, *c.trace);
          ok = ok && r.error <= r.tolerance * 1e3;
        }
      }
      ok = ok && gate_consistent(c, cl);
      r.pass = ok;
      r.detail = std::string("0 not in spectrum: ") + to_string(cl.zero_not_in_spectrum.value) +
                 ", discrete: " + to_string(cl.discrete.value);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = e.what();
    }
    rep.cases.push_back(std::move(r));
  }
  return rep;
}

inline SuiteReport suite_traces(double tol = 1e-9) {
  SuiteReport rep{"traces", {}};
  int i = 0;
  for (const auto& p : trace_corpus()) {
    const auto t = oracle::oracle_trace_sums(p);
    const auto c = classify(oracle::to_string(p), {2.0});
    CaseResult r{"instance " + std::to_string(i++), false, 0.0, tol, ""};
    if (c.trace_sum) {
      r.error = rel_err(c.trace_sum->value, t.inverse_sum);
      r.pass = r.error <= tol;
    } else {
      r.detail = "no trace reported";
    }
    rep.cases.push_back(std::move(r));
  }
  return rep;
}

inline SuiteReport suite_hs(double tol = 1e-9) {
  SuiteReport rep{"hs", {}};
  int i = 0;
  for (const auto& p : trace_corpus()) {
    ++i;
    if (p.length.is_finite()) continue;
    const auto t = oracle::oracle_trace_sums(p);
    const auto c = classify(oracle::to_string(p), {2.0});
    CaseResult r{"instance " + std::to_string(i - 1), false, 0.0, tol, ""};
    if (c.hs_sum && c.hs_sum->kind == SumKind::Exact) {
      r.error = rel_err(c.hs_sum->value, t.inverse_square_sum);
      r.pass = r.error <= tol;
    } else {
      r.detail = "no exact Hilbert-Schmidt sum reported";
    }
    rep.cases.push_back(std::move(r));
  }
  return rep;
}

inline SuiteReport suite_crossval() {
  SuiteReport rep{"crossval", {}};
  auto add = [&](const std::string& name, const MeasureRepr& chi, const ExtendedLength& L, int n, double tol) {
    const auto x = intops::crossvalidate(chi, L, {n}, tol);
    const auto& lvl = x.levels.back();
    rep.cases.push_back({name + ": singular values", x.pass, lvl.max_rel_dev, tol, ""});
    const double hs = rel_err(lvl.frobenius_sq, x.hs_closed_form);
    rep.cases.push_back({name + ": Frobenius norm", hs <= 1e-3, hs, 1e-3, ""});
  };
  MeasureRepr d1;
  d1.atoms = {{1.0, 1.0}};
  add("delta at 1", d1, ExtendedLength::infinite(), 64, 1e-8);
  MeasureRepr d2;
  d2.atoms = {{1.0, 2.0}, {3.0, 1.0}};
  add("2 delta_1 + delta_3", d2, ExtendedLength::infinite(), 1024, 1e-6);
  MeasureRepr leb;
  leb.density_grid = {0.0, 1.0};
  leb.density = {{1.0}};
  add("Lebesgue on [0, 1)", leb, ExtendedLength::finite(1.0), 2048, 1e-4);
  return rep;
}

/// Small CH instances covering every verdict branch.
inline std::vector<ch::CHProblem> ch_corpus() {
  std::vector<ch::CHProblem> out;
  ch::CHProblem zero;
  zero.u.grid = {0.0};
  out.push_back(zero);

  ch::CHProblem constant = zero;
  constant.u.tail = ConstantTail{1.0};
  out.push_back(constant);

  // smooth bump: u = 3s² - 2s³ on [0, 1], 1 - 3(s-1)² + 2(s-1)³ on [1, 2], then 0
  ch::CHProblem bump;
  bump.u.grid = {0.0, 1.0, 2.0};
  bump.u.segments = {{0.0, 0.0, 3.0, -2.0}, {1.0, 0.0, -3.0, 2.0}};
  bump.u.tail = ConstantTail{0.0};
  bump.upsilon.atoms = {{0.5, 2.0}, {1.5, 1.0}};
  out.push_back(bump);

  ch::CHProblem decaying = bump;
  decaying.upsilon.density_grid = {0.0, 1.0, 3.0};
  decaying.upsilon.density = {0.5, 1.0};
  decaying.upsilon.tail = ch::ExpTail{1.0, -0.5};
  out.push_back(decaying);

  ch::CHProblem flat = zero;
  flat.upsilon.tail = ch::ExpTail{2.0, 0.0};
  out.push_back(flat);

  ch::CHProblem growing = zero;
  growing.upsilon.atoms = {{0.0, 1.0}};
  growing.upsilon.tail = ch::ExpTail{1.0, 0.5};
  out.push_back(growing);

  ch::CHProblem atoms_only = zero;
  atoms_only.upsilon.atoms = {{0.25, 1.0}, {1.0, 3.0}, {2.0, 0.5}};
  out.push_back(atoms_only);
  return out;
}

inline SuiteReport suite_ch_consistency() {
  SuiteReport rep{"ch-consistency", {}};
  const std::vector<double> ps{1.5, 2.0, 3.0};
  int i = 0;
  for (const auto& p : ch_corpus()) {
    CaseResult r{"ch instance " + std::to_string(i++), true, 0.0, 0.0, ""};
    const auto direct = ch::ch_classify(p, ps);
    const auto s = ch::ch_to_string(p);
    const auto via = classify(s, ps);
    bool ok = direct.zero_not_in_spectrum.value == via.zero_not_in_spectrum.value &&
              direct.discrete.value == via.discrete.value && direct.schatten.size() == via.schatten.size();
    for (std::size_t k = 0; ok && k < direct.schatten.size(); ++k)
      ok = direct.schatten[k].verdict.value == via.schatten[k].verdict.value;
    // atoms map exactly: position e^s - 1, weight e^-s w
    ok = ok && s.upsilon.atoms.size() == p.upsilon.atoms.size();
    for (std::size_t k = 0; ok && k < p.upsilon.atoms.size(); ++k) {
      const auto& a = p.upsilon.atoms[k];
      ok = s.upsilon.atoms[k].position == std::expm1(a.position) &&
           s.upsilon.atoms[k].weight == std::exp(-a.position) * a.weight;
    }
    r.pass = ok;
    r.detail = std::string("direct discrete: ") + to_string(direct.discrete.value) + ", via string: " +
               to_string(via.discrete.value);
    rep.cases.push_back(std::move(r));
  }
  return rep;
}

struct DpCalibration {
  std::string name;
  dprime::Generator generator;
  Tri zero_not_in_spectrum;
  Tri discrete;
};

inline std::vector<DpCalibration> dp_calibration_cases() {
  using dprime::Generator;
  using dprime::MinusGap;
  return {{"x_k = k", Generator{1.0, 1.0, dprime::ConstantStrength{0.5}}, Tri::No, Tri::No},
          {"x_k = k^(1/2), beta_k = -gap", Generator{1.0, 0.5, MinusGap{}}, Tri::Yes, Tri::No},
          {"x_k = k^(1/3), beta_k = -gap", Generator{1.0, 1.0 / 3.0, MinusGap{}}, Tri::Yes, Tri::Yes}};
}

inline SuiteReport suite_dp_calibration() {
  SuiteReport rep{"dp-calibration", {}};
  for (const auto& c : dp_calibration_cases()) {
    const auto r = dprime::dp_classify({c.generator});
    const bool ok = r.zero_not_in_spectrum.value == c.zero_not_in_spectrum && r.discrete.value == c.discrete;
    rep.cases.push_back({c.name, ok, 0.0, 0.0,
                         std::string("0 not in spectrum: ") + to_string(r.zero_not_in_spectrum.value) +
                             ", discrete: " + to_string(r.discrete.value)});
  }
  return rep;
}

inline std::vector<std::string> suite_names() {
  return {"traces", "hs", "crossval", "ch-consistency", "dp-calibration", "calibration"};
}

inline SuiteReport run_suite(const std::string& name) {
  if (name == "traces") return suite_traces();
  if (name == "hs") return suite_hs();
  if (name == "crossval") return suite_crossval();
  if (name == "ch-consistency") return suite_ch_consistency();
  if (name == "dp-calibration") return suite_dp_calibration();
  if (name == "calibration") return suite_calibration();
  throw UsageError("unknown suite '" + name + "'");
}

}  // namespace gis::verify
