#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gis/camassa_holm.hpp"
#include "gis/criteria.hpp"
#include "gis/delta_prime.hpp"
#include "gis/pencil_solver.hpp"

namespace gis {

using json = nlohmann::json;

namespace io_detail {

template <class T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

inline std::string type_of(const json& j) { return get<std::string>(j, "type"); }

/// Non-finite values are written as strings so that they survive a round trip.
inline json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError("expected a number");
}

}  // namespace io_detail

inline void to_json(json& j, const ExtendedLength& L) {
  if (L.is_finite())
    j = json{{"finite", L.value()}};
  else
    j = "infinite";
}
inline void from_json(const json& j, ExtendedLength& L) {
  if (j.is_string() && j.get<std::string>() == "infinite") {
    L = ExtendedLength::infinite();
    return;
  }
  const double v = io_detail::get<double>(j, "finite");
  if (!(v > 0.0) || !std::isfinite(v)) throw ParseError("finite length must be positive");
  L = ExtendedLength::finite(v);
}

inline void to_json(json& j, const WTail& t) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NoTail>) j = {{"type", "none"}};
        else if constexpr (std::is_same_v<T, ConstantTail>) j = {{"type", "constant"}, {"c", v.c}};
        else if constexpr (std::is_same_v<T, PowerTail>)
          j = {{"type", "power"}, {"c", v.c}, {"A", v.A}, {"alpha", v.alpha}, {"shift", v.shift}};
        else if constexpr (std::is_same_v<T, PolynomialTail>) j = {{"type", "polynomial"}, {"coeffs", v.coeffs}};
        else j = {{"type", "endpoint"}, {"c", v.c}, {"A", v.A}, {"alpha", v.alpha}, {"end", v.end}};
      },
      t);
}
inline void from_json(const json& j, WTail& t) {
  using io_detail::get;
  const auto type = io_detail::type_of(j);
  if (type == "none") t = NoTail{};
  else if (type == "constant") t = ConstantTail{get<double>(j, "c")};
  else if (type == "power")
    t = PowerTail{get<double>(j, "c"), get<double>(j, "A"), get<double>(j, "alpha"), io_detail::get_or(j, "shift", 0.0)};
  else if (type == "polynomial") t = PolynomialTail{get<Coeffs>(j, "coeffs")};
  else if (type == "endpoint")
    t = EndpointTail{get<double>(j, "c"), get<double>(j, "A"), get<double>(j, "alpha"), get<double>(j, "end")};
  else throw ParseError("unknown w tail type '" + type + "'");
}

inline void to_json(json& j, const AntiDerivative& w) {
  json tail;
  to_json(tail, w.tail);
  j = {{"grid", w.grid}, {"segments", w.segments}, {"tail", tail}};
}
inline void from_json(const json& j, AntiDerivative& w) {
  w.grid = io_detail::get<std::vector<double>>(j, "grid");
  w.segments = io_detail::get<std::vector<Coeffs>>(j, "segments");
  if (j.contains("tail")) from_json(j.at("tail"), w.tail);
  else w.tail = ConstantTail{};
}

inline void to_json(json& j, const DensityTail& t) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ZeroDensity>) j = {{"type", "zero"}};
        else if constexpr (std::is_same_v<T, PowerDensity>)
          j = {{"type", "power"}, {"B", v.B}, {"beta", v.beta}, {"shift", v.shift}};
        else j = {{"type", "endpoint"}, {"B", v.B}, {"beta", v.beta}, {"end", v.end}};
      },
      t);
}
inline void from_json(const json& j, DensityTail& t) {
  using io_detail::get;
  const auto type = io_detail::type_of(j);
  if (type == "zero") t = ZeroDensity{};
  else if (type == "power") t = PowerDensity{get<double>(j, "B"), get<double>(j, "beta"), io_detail::get_or(j, "shift", 0.0)};
  else if (type == "endpoint") t = EndpointDensity{get<double>(j, "B"), get<double>(j, "beta"), get<double>(j, "end")};
  else throw ParseError("unknown density tail type '" + type + "'");
}

namespace io_detail {

inline json atoms_json(const std::vector<Atom>& atoms) {
  json a = json::array();
  for (const auto& at : atoms) a.push_back({at.position, at.weight});
  return a;
}

inline std::vector<Atom> read_atoms(const json& j) {
  std::vector<Atom> out;
  if (!j.is_array()) throw ParseError("atoms must be an array of [x, weight] pairs");
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw ParseError("atoms must be [x, weight] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

}  // namespace io_detail

inline void to_json(json& j, const MeasureRepr& m) {
  json tail;
  to_json(tail, m.tail);
  j = {{"atoms", io_detail::atoms_json(m.atoms)},
       {"density", {{"grid", m.density_grid}, {"pieces", m.density}, {"tail", tail}}},
       {"sign", m.sign == Sign::NonNegative ? "nonnegative" : "signed"}};
}
inline void from_json(const json& j, MeasureRepr& m) {
  if (!j.is_object()) throw ParseError("measure must be an object");
  m = MeasureRepr{};
  if (j.contains("atoms")) m.atoms = io_detail::read_atoms(j.at("atoms"));
  if (j.contains("density")) {
    const auto& d = j.at("density");
    m.density_grid = io_detail::get_or(d, "grid", std::vector<double>{0.0});
    m.density = io_detail::get_or(d, "pieces", std::vector<Coeffs>{});
    if (d.contains("tail")) from_json(d.at("tail"), m.tail);
  }
  const auto sign = io_detail::get_or<std::string>(j, "sign", "nonnegative");
  if (sign == "nonnegative") m.sign = Sign::NonNegative;
  else if (sign == "signed") m.sign = Sign::Signed;
  else throw ParseError("sign must be 'nonnegative' or 'signed'");
}

inline void to_json(json& j, const GIString& s) {
  j = {{"L", s.length}, {"w", s.w}, {"upsilon", s.upsilon}};
  if (s.omega) j["omega"] = *s.omega;
}
inline void from_json(const json& j, GIString& s) {
  s = GIString{};
  s.length = io_detail::get<ExtendedLength>(j, "L");
  s.w = io_detail::get<AntiDerivative>(j, "w");
  if (j.contains("upsilon")) s.upsilon = j.at("upsilon").get<MeasureRepr>();
  if (j.contains("omega")) s.omega = j.at("omega").get<MeasureRepr>();
}

inline void to_json(json& j, const KreinString& k) { j = {{"L", k.length}, {"omega", k.omega}}; }
inline void from_json(const json& j, KreinString& k) {
  k.length = io_detail::get<ExtendedLength>(j, "L");
  k.omega = io_detail::get<MeasureRepr>(j, "omega");
}

inline void to_json(json& j, const SpectralSum& s) {
  j = {{"value", io_detail::number(s.value)}, {"kind", s.kind == SumKind::Exact ? "exact" : "upper_bound"}};
}
inline void from_json(const json& j, SpectralSum& s) {
  s.value = io_detail::read_number(j.at("value"));
  s.kind = io_detail::get<std::string>(j, "kind") == "exact" ? SumKind::Exact : SumKind::UpperBound;
}

namespace io_detail {

inline Tri read_tri(const std::string& s) {
  if (s == "Yes") return Tri::Yes;
  if (s == "No") return Tri::No;
  if (s == "Inconclusive") return Tri::Inconclusive;
  throw ParseError("unknown verdict '" + s + "'");
}

inline const char* provenance_name(CProvenance p) {
  switch (p) {
    case CProvenance::ClosedForm: return "closed_form";
    case CProvenance::Absent: return "absent";
    case CProvenance::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

}  // namespace io_detail

inline void to_json(json& j, const Classification& c) {
  j = json::object();
  j["c"] = c.c ? json(*c.c) : json(nullptr);
  j["c_provenance"] = io_detail::provenance_name(c.c_provenance);
  j["zero_not_in_spectrum"] = to_string(c.zero_not_in_spectrum.value);
  j["discrete"] = to_string(c.discrete.value);
  json sp = json::array();
  for (const auto& s : c.schatten)
    sp.push_back({{"p", s.p}, {"verdict", to_string(s.verdict.value)}, {"evidence", s.verdict.evidence}});
  j["schatten"] = sp;
  j["trace"] = c.trace_sum ? io_detail::number(c.trace_sum->value) : json(nullptr);
  if (c.trace_sum) j["trace_sum"] = *c.trace_sum;
  if (c.hs_sum) j["hs_sum"] = *c.hs_sum;
  j["evidence"] = {{"zero_not_in_spectrum", c.zero_not_in_spectrum.evidence}, {"discrete", c.discrete.evidence}};
  j["warnings"] = c.warnings;
}
inline void from_json(const json& j, Classification& c) {
  using io_detail::get;
  c = Classification{};
  if (!j.at("c").is_null()) c.c = j.at("c").get<double>();
  const auto prov = get<std::string>(j, "c_provenance");
  c.c_provenance = prov == "closed_form" ? CProvenance::ClosedForm
                   : prov == "absent"    ? CProvenance::Absent
                                         : CProvenance::NotApplicable;
  const auto& ev = j.at("evidence");
  c.zero_not_in_spectrum = {io_detail::read_tri(get<std::string>(j, "zero_not_in_spectrum")),
                            get<std::string>(ev, "zero_not_in_spectrum")};
  c.discrete = {io_detail::read_tri(get<std::string>(j, "discrete")), get<std::string>(ev, "discrete")};
  for (const auto& s : j.at("schatten"))
    c.schatten.push_back({get<double>(s, "p"), {io_detail::read_tri(get<std::string>(s, "verdict")), get<std::string>(s, "evidence")}});
  if (j.contains("trace_sum")) c.trace_sum = j.at("trace_sum").get<SpectralSum>();
  if (j.contains("hs_sum")) c.hs_sum = j.at("hs_sum").get<SpectralSum>();
  c.warnings = get<std::vector<std::string>>(j, "warnings");
}

inline void to_json(json& j, const Spectrum& s) {
  j = {{"eigenvalues", s.eigenvalues}, {"mu_cut", s.mu_cut},       {"model_size", s.model_size},
       {"converged", s.converged},     {"grid_sizes", s.grid_sizes}, {"deltas", s.deltas},
       {"notes", s.notes}};
}
inline void from_json(const json& j, Spectrum& s) {
  using io_detail::get;
  s.eigenvalues = get<std::vector<double>>(j, "eigenvalues");
  s.mu_cut = get<double>(j, "mu_cut");
  s.model_size = get<int>(j, "model_size");
  s.converged = get<bool>(j, "converged");
  s.grid_sizes = get<std::vector<int>>(j, "grid_sizes");
  s.deltas = get<std::vector<double>>(j, "deltas");
  s.notes = get<std::vector<std::string>>(j, "notes");
}

namespace ch {

inline void to_json(json& j, const CHMeasure& m) {
  json tail = {{"type", "zero"}};
  if (auto e = std::get_if<ExpTail>(&m.tail)) tail = {{"type", "exp"}, {"B", e->B}, {"gamma", e->gamma}};
  j = {{"atoms", io_detail::atoms_json(m.atoms)},
       {"density", {{"grid", m.density_grid}, {"values", m.density}, {"tail", tail}}}};
}
inline void from_json(const json& j, CHMeasure& m) {
  m = CHMeasure{};
  if (j.contains("atoms")) m.atoms = io_detail::read_atoms(j.at("atoms"));
  if (j.contains("density")) {
    const auto& d = j.at("density");
    m.density_grid = io_detail::get_or(d, "grid", std::vector<double>{0.0});
    m.density = io_detail::get_or(d, "values", std::vector<double>{});
    if (d.contains("tail")) {
      const auto type = io_detail::type_of(d.at("tail"));
      if (type == "exp")
        m.tail = ExpTail{io_detail::get<double>(d.at("tail"), "B"), io_detail::get<double>(d.at("tail"), "gamma")};
      else if (type != "zero")
        throw ParseError("unknown upsilon tail type '" + type + "'");
    }
  }
}

inline void to_json(json& j, const CHProblem& p) { j = {{"u", p.u}, {"upsilon", p.upsilon}}; }
inline void from_json(const json& j, CHProblem& p) {
  p.u = io_detail::get<AntiDerivative>(j, "u");
  p.upsilon = j.contains("upsilon") ? j.at("upsilon").get<CHMeasure>() : CHMeasure{};
}

}  // namespace ch

namespace dprime {

inline void to_json(json& j, const DeltaPrimeProblem& p) {
  if (auto e = std::get_if<ExplicitSupport>(&p.support)) {
    j = {{"support", {{"points", io_detail::atoms_json(e->points)}}}};
    return;
  }
  const auto& g = std::get<Generator>(p.support);
  json beta;
  if (auto c = std::get_if<ConstantStrength>(&g.beta)) {
    beta = {{"type", "constant"}, {"b", c->b}};
  } else {
    const auto& mg = std::get<MinusGap>(g.beta);
    json delta = {{"type", "none"}};
    if (auto pp = std::get_if<PowerPerturbation>(&mg.delta)) delta = {{"type", "power"}, {"c0", pp->c0}, {"rho", pp->rho}};
    beta = {{"type", "minus_gap"}, {"delta", delta}};
  }
  j = {{"support", {{"generator", {{"a", g.a}, {"gamma", g.gamma}, {"beta", beta}}}}}};
}
inline void from_json(const json& j, DeltaPrimeProblem& p) {
  using io_detail::get;
  const auto& s = j.at("support");
  if (s.contains("points")) {
    p.support = ExplicitSupport{io_detail::read_atoms(s.at("points"))};
    return;
  }
  if (!s.contains("generator")) throw ParseError("support needs 'points' or 'generator'");
  const auto& g = s.at("generator");
  Generator gen{get<double>(g, "a"), get<double>(g, "gamma"), MinusGap{}};
  if (g.contains("beta")) {
    const auto& b = g.at("beta");
    const auto type = io_detail::type_of(b);
    if (type == "constant") {
      gen.beta = ConstantStrength{get<double>(b, "b")};
    } else if (type == "minus_gap") {
      MinusGap mg;
      if (b.contains("delta")) {
        const auto dt = io_detail::type_of(b.at("delta"));
        if (dt == "power") mg.delta = PowerPerturbation{get<double>(b.at("delta"), "c0"), get<double>(b.at("delta"), "rho")};
        else if (dt != "none") throw ParseError("unknown perturbation type '" + dt + "'");
      }
      gen.beta = mg;
    } else {
      throw ParseError("unknown strength rule '" + type + "'");
    }
  }
  p.support = gen;
}

}  // namespace dprime

/// One input document: the problem plus optional request parameters.
struct ProblemDoc {
  std::variant<GIString, KreinString, ch::CHProblem, dprime::DeltaPrimeProblem> problem;
  std::vector<double> p_list;
  std::optional<int> grid_n;
  std::optional<double> tol;
  std::optional<double> truncation;  // delta_prime spectra
  bool operator==(const ProblemDoc&) const = default;

  std::string kind() const {
    static const char* names[] = {"gis", "krein", "ch", "delta_prime"};
    return names[problem.index()];
  }
};

inline void to_json(json& j, const ProblemDoc& d) {
  std::visit([&](const auto& p) { j = p; }, d.problem);
  j["kind"] = d.kind();
  json req = json::object();
  if (!d.p_list.empty()) req["p"] = d.p_list;
  if (d.grid_n) req["grid_n"] = *d.grid_n;
  if (d.tol) req["tol"] = *d.tol;
  if (d.truncation) req["truncation"] = *d.truncation;
  if (!req.empty()) j["request"] = req;
}

inline void from_json(const json& j, ProblemDoc& d) {
  d = ProblemDoc{};
  const auto kind = io_detail::get<std::string>(j, "kind");
  try {
    if (kind == "gis") d.problem = j.get<GIString>();
    else if (kind == "krein") d.problem = j.get<KreinString>();
    else if (kind == "ch") d.problem = j.get<ch::CHProblem>();
    else if (kind == "delta_prime") d.problem = j.get<dprime::DeltaPrimeProblem>();
    else throw ParseError("unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  if (j.contains("request")) {
    const auto& r = j.at("request");
    d.p_list = io_detail::get_or(r, "p", std::vector<double>{});
    if (r.contains("grid_n")) d.grid_n = io_detail::get<int>(r, "grid_n");
    if (r.contains("tol")) d.tol = io_detail::get<double>(r, "tol");
    if (r.contains("truncation")) d.truncation = io_detail::get<double>(r, "truncation");
  }
}

/// Parses and validates; schema or model-class violations surface as ParseError/DomainError.
inline ProblemDoc parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  ProblemDoc d = j.get<ProblemDoc>();
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GIString>) validate(p);
        else if constexpr (std::is_same_v<T, KreinString>) validate(p.omega, p.length);
        else validate(p);
      },
      d.problem);
  return d;
}

}  // namespace gis
