#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gis/coefficients.hpp"

namespace gis {

enum class Tri { Yes, No, Inconclusive };

inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::Yes: return "Yes";
    case Tri::No: return "No";
    case Tri::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct Verdict {
  Tri value = Tri::Inconclusive;
  std::string evidence;
  bool operator==(const Verdict&) const = default;
};

struct SchattenVerdict {
  double p = 2.0;
  Verdict verdict;
  bool operator==(const SchattenVerdict&) const = default;
};

enum class SumKind { Exact, UpperBound };

struct SpectralSum {
  double value = 0.0;
  SumKind kind = SumKind::Exact;
  bool operator==(const SpectralSum&) const = default;
};

enum class CProvenance { ClosedForm, Absent, NotApplicable };

struct Classification {
  std::optional<double> c;
  CProvenance c_provenance = CProvenance::NotApplicable;
  Verdict zero_not_in_spectrum;
  Verdict discrete;
  std::vector<SchattenVerdict> schatten;
  std::optional<SpectralSum> trace_sum;  // Σ 1/λ
  std::optional<SpectralSum> hs_sum;     // Σ 1/λ²
  std::vector<std::string> warnings;
  bool operator==(const Classification&) const = default;
};

/// Krein string: ω given as a nonnegative measure, υ = 0.
struct KreinString {
  ExtendedLength length = ExtendedLength::infinite();
  MeasureRepr omega;

  GIString to_gis() const {
    GIString s;
    s.length = length;
    s.w = anti_derivative_of_measure(omega, length);
    s.omega = omega;
    return s;
  }
  bool operator==(const KreinString&) const = default;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Asymptotics of a tail functional F ~ coefficient * ξ^exponent with ξ → ∞
/// (ξ = x on the half line, ξ = 1/(L - x) on a finite interval).
struct TailGrowth {
  bool infinite = false;
  double exponent = -std::numeric_limits<double>::infinity();
  double coefficient = 0.0;
  std::vector<std::string> reasons;

  void include(double e, double k, const std::string& why) {
    if (std::abs(e) < 1e-12) e = 0.0;
    if (e > exponent) {
      exponent = e;
      coefficient = k;
    } else if (e == exponent) {
      coefficient += k;
    }
    reasons.push_back(why);
  }
  void diverge(const std::string& why) {
    infinite = true;
    reasons.push_back(why);
  }
  std::string describe() const {
    std::string s;
    for (const auto& r : reasons) s += (s.empty() ? "" : "; ") + r;
    if (s.empty()) s = "tail functional vanishes beyond the last breakpoint";
    return s;
  }
};

inline void apply_growth(const TailGrowth& g, const std::vector<double>& p_list, Classification& out) {
  const std::string why = g.describe();
  if (g.infinite || g.exponent > 0.0) {
    out.zero_not_in_spectrum = {Tri::No, "tail functional unbounded: " + why};
    out.discrete = {Tri::No, "tail functional unbounded"};
    for (double p : p_list) out.schatten.push_back({p, {Tri::No, "not discrete"}});
  } else if (g.exponent == 0.0) {
    out.zero_not_in_spectrum = {Tri::Yes, "tail functional bounded: " + why};
    out.discrete = {Tri::No, "tail functional tends to " + fmt(g.coefficient) + " > 0"};
    for (double p : p_list) out.schatten.push_back({p, {Tri::No, "not discrete"}});
  } else {
    out.zero_not_in_spectrum = {Tri::Yes, "tail functional bounded: " + why};
    out.discrete = {Tri::Yes, "tail functional tends to 0"};
    const std::string rate = std::isinf(g.exponent) ? "vanishes eventually" : "decays like a power of order " + fmt(g.exponent);
    for (double p : p_list)
      out.schatten.push_back({p, {Tri::Yes, "Schatten integral converges: tail functional " + rate}});
  }
}

inline void all_yes(const std::vector<double>& p_list, Classification& out, const std::string& why) {
  out.zero_not_in_spectrum = {Tri::Yes, why};
  out.discrete = {Tri::Yes, why};
  for (double p : p_list) out.schatten.push_back({p, {Tri::Yes, why}});
}

inline bool constant_pieces(const std::vector<Coeffs>& segs) {
  for (const auto& s : segs)
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k] != 0.0) return false;
  return true;
}

/// ω piecewise constant with finitely many jumps and υ purely atomic: finite rank.
inline bool finite_rank(const GIString& s) {
  if (!constant_pieces(s.w.segments) || has_density(s.upsilon)) return false;
  if (s.length.is_finite()) return std::holds_alternative<NoTail>(s.w.tail);
  if (std::holds_alternative<ConstantTail>(s.w.tail)) return true;
  if (auto t = std::get_if<PolynomialTail>(&s.w.tail)) return constant_pieces({t->coeffs});
  return false;
}

inline TailGrowth measure_growth(const MeasureRepr& m, const ExtendedLength& L, const std::string& name) {
  TailGrowth g;
  if (!L.is_finite()) {
    if (auto p = std::get_if<PowerDensity>(&m.tail); p && p->B > 0.0) {
      if (p->beta == 0.0)
        g.diverge(name + " has infinite tail mass");
      else
        g.include(2.0 - p->beta, p->B / (p->beta - 1.0), name + " tail mass decays with exponent " + fmt(p->beta - 1.0));
    }
  } else {
    if (auto e = std::get_if<EndpointDensity>(&m.tail); e && e->B > 0.0 && e->beta > 1.0) {
      g.include(e->beta - 2.0, e->B / (e->beta - 1.0), name + " mass near L grows with exponent " + fmt(e->beta - 1.0));
    } else {
      g.include(-1.0, 0.0, name + " has finite mass near L");
    }
  }
  return g;
}

inline TailGrowth w_growth(const GIString& s) {
  TailGrowth g;
  if (!s.length.is_finite()) {
    if (auto p = std::get_if<PowerTail>(&s.w.tail); p && p->A != 0.0) {
      if (2.0 * p->alpha <= 1.0)
        g.diverge("(w - c)^2 is not integrable at infinity");
      else
        g.include(2.0 - 2.0 * p->alpha, p->A * p->A / (2.0 * p->alpha - 1.0),
                  "w - c decays with exponent " + fmt(p->alpha));
    }
  } else {
    if (auto e = std::get_if<EndpointTail>(&s.w.tail); e && e->A != 0.0 && 2.0 * e->alpha > 1.0) {
      g.include(2.0 * e->alpha - 2.0, e->A * e->A / (2.0 * e->alpha - 1.0),
                "w grows near L with exponent " + fmt(e->alpha));
    } else {
      g.include(-1.0, 0.0, "w is square integrable near L");
    }
  }
  return g;
}

inline TailGrowth merge(TailGrowth a, const TailGrowth& b) {
  if (b.infinite) a.infinite = true;
  if (b.exponent > a.exponent) {
    a.exponent = b.exponent;
    a.coefficient = b.coefficient;
  } else if (b.exponent == a.exponent && std::isfinite(b.exponent)) {
    a.coefficient += b.coefficient;
  }
  a.reasons.insert(a.reasons.end(), b.reasons.begin(), b.reasons.end());
  return a;
}

inline void require_p(const std::vector<double>& p_list, double bound, const char* who) {
  for (double p : p_list)
    if (!(p > bound)) throw UsageError(std::string(who) + ": every p must exceed " + fmt(bound));
}

}  // namespace detail

/// Implication chain S_p ⇒ S_p' (p' ≥ p) ⇒ discrete ⇒ 0 ∉ σ; throws on violation.
inline void check_consistency(const Classification& c) {
  auto sorted = c.schatten;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
  bool yes_seen = false;
  for (const auto& s : sorted) {
    if (yes_seen && s.verdict.value != Tri::Yes) throw InvariantViolation("Schatten verdicts are not monotone in p");
    if (s.verdict.value == Tri::Yes) {
      yes_seen = true;
      if (c.discrete.value != Tri::Yes) throw InvariantViolation("Schatten class claimed for a non-discrete spectrum");
    }
  }
  if (c.discrete.value == Tri::Yes && c.zero_not_in_spectrum.value != Tri::Yes)
    throw InvariantViolation("discrete spectrum claimed while 0 is in the spectrum");
}

enum class SingularityClaim { GisTraceClass, KreinHalfClass };

/// Necessary condition for the claimed class: the relevant measure has no density part.
inline Verdict singularity_gate(const GIString& s, SingularityClaim claim) {
  if (claim == SingularityClaim::GisTraceClass) {
    if (has_density(s.upsilon)) return {Tri::No, "trace class claimed but upsilon has a density component"};
    return {Tri::Yes, "upsilon has no density component"};
  }
  bool dense = false;
  if (s.omega) {
    dense = has_density(*s.omega);
  } else {
    dense = !detail::constant_pieces(s.w.segments) || !(std::holds_alternative<ConstantTail>(s.w.tail) ||
                                                         std::holds_alternative<NoTail>(s.w.tail));
  }
  if (dense) return {Tri::No, "S_1/2 claimed but omega has a density component"};
  return {Tri::Yes, "omega has no density component"};
}

/// x ∫_x^∞ (w - c)² + x υ([x,∞)) on the half line, (L - x)[∫_0^x w² + υ([0,x))] otherwise.
inline double tail_functional(const GIString& s, double x) {
  if (!s.length.is_finite()) {
    if (x == 0.0) return 0.0;
    const auto c = cesaro_mean_limit(s.w, s.length);
    if (!c) return std::numeric_limits<double>::infinity();
    return x * (integrate_w_to_infinity(s.w, WForm::CenteredSquare, *c, x, 0) +
                measure_moment_to_infinity(s.upsilon, x, 0));
  }
  const double L = s.length.value();
  const double inner = integrate_w(s.w, WForm::Square, 0.0, 0.0, x, [](double) { return 1.0; }) + mass(s.upsilon, 0.0, x);
  return (L - x) * inner;
}

inline double krein_tail_functional(const KreinString& k, double x) {
  if (!k.length.is_finite()) return x == 0.0 ? 0.0 : x * measure_moment_to_infinity(k.omega, x, 0);
  return (k.length.value() - x) * mass(k.omega, 0.0, x);
}

/// Trace formula value ∫(c - w) (half line) or ∫(2x/L - 1) w (finite).
inline double trace_formula(const GIString& s) {
  if (!s.length.is_finite()) {
    const auto c = cesaro_mean_limit(s.w, s.length);
    if (!c) return std::numeric_limits<double>::quiet_NaN();
    return 0.0 - integrate_w_to_infinity(s.w, WForm::Centered, *c, 0.0, 0);
  }
  const double L = s.length.value();
  return integrate_w(s.w, WForm::Value, 0.0, 0.0, L, [L](double x) { return 2.0 * x / L - 1.0; });
}

/// 2∫x(w - c)² + 2∫x dυ on the half line (identity); on a finite interval the
/// bound 2∫(L - x)w² + 2∫x(1 - x/L) dυ.
inline double hs_formula(const GIString& s) {
  if (!s.length.is_finite()) {
    const auto c = cesaro_mean_limit(s.w, s.length);
    if (!c) return std::numeric_limits<double>::infinity();
    return 2.0 * integrate_w_to_infinity(s.w, WForm::CenteredSquare, *c, 0.0, 1) +
           2.0 * measure_moment_to_infinity(s.upsilon, 0.0, 1);
  }
  const double L = s.length.value();
  return 2.0 * integrate_w(s.w, WForm::Square, 0.0, 0.0, L, [L](double x) { return L - x; }) +
         2.0 * integrate_measure(s.upsilon, 0.0, L, [L](double x) { return x * (1.0 - x / L); });
}

inline Classification classify(const GIString& s, std::vector<double> p_list) {
  validate(s);
  detail::require_p(p_list, 1.0, "classify");
  std::sort(p_list.begin(), p_list.end());
  Classification out;
  out.warnings = warnings(s);
  if (!s.length.is_finite()) {
    out.c = cesaro_mean_limit(s.w, s.length);
    out.c_provenance = out.c ? CProvenance::ClosedForm : CProvenance::Absent;
  }
  if (!s.length.is_finite() && !out.c) {
    out.zero_not_in_spectrum = {Tri::No, "Cesaro mean of w diverges, so no constant c bounds the tail functional"};
    out.discrete = {Tri::No, "0 is in the spectrum"};
    for (double p : p_list) out.schatten.push_back({p, {Tri::No, "0 is in the spectrum"}});
    check_consistency(out);
    return out;
  }

  if (detail::finite_rank(s)) {
    detail::all_yes(p_list, out, "piecewise constant w and atomic upsilon: finitely many eigenvalues");
    const Verdict gate = singularity_gate(s, SingularityClaim::GisTraceClass);
    if (gate.value != Tri::Yes) throw InvariantViolation(gate.evidence);
    out.trace_sum = SpectralSum{trace_formula(s), SumKind::Exact};
    out.hs_sum = SpectralSum{hs_formula(s), s.length.is_finite() ? SumKind::UpperBound : SumKind::Exact};
    check_consistency(out);
    return out;
  }

  const detail::TailGrowth wg = detail::w_growth(s);
  const detail::TailGrowth g = detail::merge(wg, detail::measure_growth(s.upsilon, s.length, "upsilon"));
  detail::apply_growth(g, p_list, out);
  if (out.discrete.value == Tri::Yes) {
    out.hs_sum = SpectralSum{hs_formula(s), s.length.is_finite() ? SumKind::UpperBound : SumKind::Exact};
  }
  // necessary trace-class conditions, reported only
  const bool sqrt_ok = !wg.infinite && wg.exponent < 0.0;
  out.warnings.push_back(std::string("trace class undecided; necessary square-root integral condition ") +
                         (sqrt_ok ? "holds" : "fails"));
  if (!s.length.is_finite()) {
    bool integrable = true;
    if (auto p = std::get_if<PowerTail>(&s.w.tail); p && p->A != 0.0) integrable = p->alpha > 1.0;
    out.warnings.push_back(std::string("necessary condition 'w - c integrable' ") + (integrable ? "holds" : "fails"));
  }
  if (has_density(s.upsilon)) out.warnings.push_back("upsilon has a density component, so the spectrum is not trace class");
  check_consistency(out);
  return out;
}

inline Classification classify_krein(const KreinString& k, std::vector<double> p_list) {
  if (k.omega.sign != Sign::NonNegative) throw UsageError("classify_krein needs a nonnegative measure; use classify");
  validate(k.omega, k.length);
  detail::require_p(p_list, 0.5, "classify_krein");
  std::sort(p_list.begin(), p_list.end());
  Classification out;
  if (!k.omega.atoms.empty() && k.omega.atoms.front().position == 0.0)
    out.warnings.push_back("omega has an atom at 0; it is invisible to the energy space");
  if (!k.length.is_finite()) {
    const double total = total_mass(k.omega, k.length);
    if (std::isfinite(total)) out.c = total;
    out.c_provenance = out.c ? CProvenance::ClosedForm : CProvenance::Absent;
  }
  const detail::TailGrowth g = detail::measure_growth(k.omega, k.length, "omega");
  detail::apply_growth(g, p_list, out);
  if (out.discrete.value == Tri::Yes) {
    double t = 0.0;
    if (!k.length.is_finite()) {
      t = measure_moment_to_infinity(k.omega, 0.0, 1);
    } else {
      const double L = k.length.value();
      t = integrate_measure(k.omega, 0.0, L, [L](double x) { return x * (1.0 - x / L); });
    }
    out.trace_sum = SpectralSum{t, SumKind::Exact};
  }
  check_consistency(out);
  return out;
}

}  // namespace gis
