#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "gis/criteria.hpp"
#include "gis/pencil_solver.hpp"

/// Schrödinger operators with δ′-interactions χ = Σ β_k δ_{x_k} and their strings (∞, χ + dx, 0).
namespace gis::dprime {

/// Finite list of interactions (x_k, β_k), 0 < x_1 < x_2 < ...
struct ExplicitSupport {
  std::vector<Atom> points;
  bool operator==(const ExplicitSupport&) const = default;
};

struct NoPerturbation {
  bool operator==(const NoPerturbation&) const = default;
};
/// δ_k = c0 k^(-rho)
struct PowerPerturbation {
  double c0 = 0.0, rho = 2.0;
  bool operator==(const PowerPerturbation&) const = default;
};
using Perturbation = std::variant<NoPerturbation, PowerPerturbation>;

/// β_k = -(x_k - x_{k-1}) + δ_k with x_0 = 0.
struct MinusGap {
  Perturbation delta = NoPerturbation{};
  bool operator==(const MinusGap&) const = default;
};
/// β_k = b
struct ConstantStrength {
  double b = 0.0;
  bool operator==(const ConstantStrength&) const = default;
};
using StrengthRule = std::variant<MinusGap, ConstantStrength>;

/// x_k = a k^gamma, k = 1, 2, ...
struct Generator {
  double a = 1.0, gamma = 1.0;
  StrengthRule beta = MinusGap{};

  double position(double k) const { return a * std::pow(k, gamma); }
  double strength(int k) const {
    if (auto c = std::get_if<ConstantStrength>(&beta)) return c->b;
    const auto& mg = std::get<MinusGap>(beta);
    double d = 0.0;
    if (auto p = std::get_if<PowerPerturbation>(&mg.delta)) d = p->c0 * std::pow(static_cast<double>(k), -p->rho);
    return -(position(k) - position(k - 1)) + d;
  }
  bool operator==(const Generator&) const = default;
};

struct DeltaPrimeProblem {
  std::variant<ExplicitSupport, Generator> support;
  bool operator==(const DeltaPrimeProblem&) const = default;
};

inline void validate(const DeltaPrimeProblem& p) {
  if (auto e = std::get_if<ExplicitSupport>(&p.support)) {
    double prev = 0.0;
    for (const auto& a : e->points) {
      if (a.position == 0.0) throw DomainError("the interaction measure must not have mass at 0");
      if (!(a.position > prev) || !std::isfinite(a.position)) throw DomainError("positions must be positive and increasing");
      if (!std::isfinite(a.weight)) throw DomainError("strengths must be finite");
      prev = a.position;
    }
  } else {
    const auto& g = std::get<Generator>(p.support);
    if (!(g.a > 0.0) || !(g.gamma > 0.0) || !std::isfinite(g.a) || !std::isfinite(g.gamma))
      throw DomainError("generator needs a > 0 and gamma > 0");
  }
}

/// Interactions with x_k <= truncation (explicit lists are returned whole).
inline std::vector<Atom> points(const DeltaPrimeProblem& p, double truncation) {
  validate(p);
  if (auto e = std::get_if<ExplicitSupport>(&p.support)) return e->points;
  const auto& g = std::get<Generator>(p.support);
  std::vector<Atom> out;
  for (int k = 1; g.position(k) <= truncation; ++k) {
    if (k > 10'000'000) throw UsageError("truncation admits too many interactions");
    out.push_back({g.position(k), g.strength(k)});
  }
  return out;
}

namespace detail {

/// w = x + q on [0, end): grid at the interactions, linear pieces.
inline void fill_w(const std::vector<Atom>& pts, double end, AntiDerivative& w) {
  w.grid = {0.0};
  w.segments.clear();
  double q = 0.0, left = 0.0;
  for (const auto& a : pts) {
    if (!(a.position < end)) break;
    w.segments.push_back({left + q, 1.0});
    w.grid.push_back(a.position);
    q += a.weight;
    left = a.position;
  }
  w.segments.push_back({left + q, 1.0});
}

inline MeasureRepr omega_of(const std::vector<Atom>& pts, double end) {
  MeasureRepr m;
  m.sign = Sign::Signed;
  for (const auto& a : pts)
    if (a.position < end) m.atoms.push_back(a);
  return m;
}

}  // namespace detail

/// Half-line string of the (possibly truncated) support: w(x) = x + Σ_{x_k < x} β_k.
inline GIString dp_string(const DeltaPrimeProblem& p, double truncation = std::numeric_limits<double>::infinity()) {
  const auto pts = points(p, truncation);
  GIString s;
  s.length = ExtendedLength::infinite();
  detail::fill_w(pts, std::numeric_limits<double>::infinity(), s.w);
  const Coeffs last = s.w.segments.back();
  s.w.segments.pop_back();
  s.w.tail = PolynomialTail{last};
  s.omega = detail::omega_of(pts, std::numeric_limits<double>::infinity());
  s.omega->tail = PowerDensity{1.0, 0.0, 1.0};
  return s;
}

/// String on [0, truncation) with a Dirichlet end, used for spectra.
inline GIString dp_truncated_string(const DeltaPrimeProblem& p, double truncation) {
  if (!(truncation > 0.0) || !std::isfinite(truncation)) throw UsageError("truncation must be positive and finite");
  const auto pts = points(p, truncation);
  GIString s;
  s.length = ExtendedLength::finite(truncation);
  detail::fill_w(pts, truncation, s.w);
  s.w.grid.push_back(truncation);
  s.w.tail = NoTail{};
  s.omega = detail::omega_of(pts, truncation);
  s.omega->density_grid = {0.0, truncation};
  s.omega->density = {{1.0}};
  return s;
}

namespace detail {

using gis::detail::fmt;

inline Classification from_exponent(double e, double coefficient, const std::string& why) {
  Classification out;
  if (e > 0.0) {
    out.zero_not_in_spectrum = {Tri::No, why + ": unbounded"};
    out.discrete = {Tri::No, "0 is in the essential spectrum"};
  } else if (e == 0.0) {
    out.zero_not_in_spectrum = {Tri::Yes, why + ": bounded"};
    out.discrete = {Tri::No, "limit " + fmt(coefficient) + " > 0"};
  } else {
    out.zero_not_in_spectrum = {Tri::Yes, why + ": bounded"};
    out.discrete = {Tri::Yes, why + ": tends to 0"};
  }
  return out;
}

inline Classification all_no(const std::string& why) {
  Classification out;
  out.zero_not_in_spectrum = {Tri::No, why};
  out.discrete = {Tri::No, "0 is in the essential spectrum"};
  return out;
}

inline Classification generator_classify(const Generator& g) {
  if (!(g.gamma > 0.0 && g.gamma <= 1.0)) {
    Classification out;
    out.zero_not_in_spectrum = {Tri::Inconclusive, "generator exponent outside (0, 1]"};
    out.discrete = {Tri::Inconclusive, "generator exponent outside (0, 1]"};
    return out;
  }
  const double a = g.a, gm = g.gamma;
  if (auto cs = std::get_if<ConstantStrength>(&g.beta)) {
    if (gm == 1.0) return all_no("first sum x_n sum (x_{k+1} - x_k)^3 diverges for equally spaced points");
    return all_no("w(x) = x + q(x) grows like x^" + fmt(cs->b == 0.0 ? 1.0 : 1.0 / gm) +
                  ", so its Cesaro mean diverges");
  }
  const auto& mg = std::get<MinusGap>(g.beta);
  if (gm == 1.0) {
    auto out = all_no("first sum x_n sum a^3 diverges for equally spaced points");
    if (!std::holds_alternative<PowerPerturbation>(mg.delta) ||
        std::get<PowerPerturbation>(mg.delta).c0 == 0.0 || std::get<PowerPerturbation>(mg.delta).rho > 1.0) {
      double dinf = 0.0;
      if (auto pp = std::get_if<PowerPerturbation>(&mg.delta)) dinf = pp->c0 * std::riemann_zeta(pp->rho);
      out.c = a / 2.0 + dinf;
      out.c_provenance = CProvenance::ClosedForm;
    } else {
      out.c_provenance = CProvenance::Absent;
    }
    return out;
  }

  // first sum: x_n sum_{k>=n} Δx_k^3 ~ a^4 γ^3 / (2 - 3γ) n^(4γ - 2)
  double e = 4.0 * gm - 2.0;
  double coefficient = gm < 2.0 / 3.0 ? std::pow(a, 4) * std::pow(gm, 3) / (2.0 - 3.0 * gm) : 0.0;
  std::string why = "first sum ~ n^" + fmt(e);
  double dinf = 0.0;
  if (auto pp = std::get_if<PowerPerturbation>(&mg.delta); pp && pp->c0 != 0.0) {
    if (!(pp->rho > 1.0)) {
      auto out = all_no("partial sums of the perturbation diverge, so the Cesaro mean of w does not exist");
      out.c_provenance = CProvenance::Absent;
      return out;
    }
    dinf = pp->c0 * std::riemann_zeta(pp->rho);
    // second sum: x_n sum Δx_k (D_k - D_∞)^2 ~ n^(2γ + 2 - 2ρ)
    const double e2 = 2.0 * gm + 2.0 - 2.0 * pp->rho;
    const double k2 = (2.0 * pp->rho - 2.0 - gm) > 0.0
                          ? a * a * gm * pp->c0 * pp->c0 / ((pp->rho - 1.0) * (pp->rho - 1.0) * (2.0 * pp->rho - 2.0 - gm))
                          : 0.0;
    why += ", second sum ~ n^" + fmt(e2);
    if (std::abs(e2 - e) < 1e-12) {
      coefficient += k2;
    } else if (e2 > e) {
      e = e2;
      coefficient = k2;
    }
  } else {
    why += ", second sum vanishes";
  }
  if (std::abs(e) < 1e-12) e = 0.0;
  auto out = from_exponent(e, coefficient, why);
  out.c = dinf;
  out.c_provenance = CProvenance::ClosedForm;
  return out;
}

}  // namespace detail

/// Verdicts for 0 ∉ σ and discreteness; explicit lists go through the string criteria.
inline Classification dp_classify(const DeltaPrimeProblem& p, const std::vector<double>& p_list = {}) {
  validate(p);
  Classification out;
  if (std::holds_alternative<ExplicitSupport>(p.support)) {
    out = classify(dp_string(p), p_list);
  } else {
    out = detail::generator_classify(std::get<Generator>(p.support));
    if (!p_list.empty()) out.warnings.push_back("Schatten verdicts are not evaluated for generated supports");
  }
  check_consistency(out);
  return out;
}

/// Spectrum of the string cut at `truncation`; approximates σ(H_χ).
inline Spectrum dp_spectrum(const DeltaPrimeProblem& p, double truncation, const RefineOptions& opt = {}) {
  Spectrum out = refine_until(dp_truncated_string(p, truncation), opt);
  out.notes.push_back("support truncated at x = " + gis::detail::fmt(truncation) + " with a Dirichlet end");
  return out;
}

}  // namespace gis::dprime
