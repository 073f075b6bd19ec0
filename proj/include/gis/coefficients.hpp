#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gis/errors.hpp"
#include "gis/quadrature.hpp"

namespace gis {

/// Length of the string interval, finite or infinite.
class ExtendedLength {
 public:
  static ExtendedLength infinite() { return ExtendedLength{}; }
  static ExtendedLength finite(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("length must be positive and finite");
    ExtendedLength l;
    l.value_ = value;
    return l;
  }
  bool is_finite() const { return value_.has_value(); }
  double value() const {
    if (!value_) throw UsageError("length is infinite");
    return *value_;
  }
  /// Upper end of the interval as a double (+inf when infinite).
  double end() const { return value_ ? *value_ : std::numeric_limits<double>::infinity(); }
  bool operator==(const ExtendedLength&) const = default;

 private:
  std::optional<double> value_;
};

/// Local monomial coefficients: p(x) = sum c[k] (x - origin)^k.
using Coeffs = std::vector<double>;

inline double horner(const Coeffs& c, double t) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
  return s;
}

inline Coeffs derivative(const Coeffs& c) {
  if (c.size() <= 1) return {0.0};
  Coeffs d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
  return d;
}

/// Coefficients of t -> p(t + delta).
inline Coeffs shifted(const Coeffs& c, double delta) {
  Coeffs out(c.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double binom = 1.0;  // C(k, j)
    for (std::size_t j = 0; j <= k; ++j) {
      out[j] += c[k] * binom * std::pow(delta, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return out;
}

// Tails of an anti-derivative beyond its last grid point.
struct NoTail {
  bool operator==(const NoTail&) const = default;
};
struct ConstantTail {
  double c = 0.0;
  bool operator==(const ConstantTail&) const = default;
};
/// w(x) = c + A (x + shift)^(-alpha)
struct PowerTail {
  double c = 0.0, A = 0.0, alpha = 1.0, shift = 0.0;
  bool operator==(const PowerTail&) const = default;
};
/// w(x) = sum coeffs[k] (x - x_tail)^k; non-constant ones have no Cesaro mean.
struct PolynomialTail {
  Coeffs coeffs{0.0};
  bool operator==(const PolynomialTail&) const = default;
};
/// w(x) = c + A (end - x)^(-alpha), finite length only.
struct EndpointTail {
  double c = 0.0, A = 0.0, alpha = 1.0, end = 1.0;
  bool operator==(const EndpointTail&) const = default;
};
using WTail = std::variant<NoTail, ConstantTail, PowerTail, PolynomialTail, EndpointTail>;

/// Power form c + A u^(-alpha) with u = sigma x + tau.
struct PowerForm {
  double c, A, alpha, sigma, tau;
  double u(double x) const { return sigma * x + tau; }
  double x(double u) const { return (u - tau) / sigma; }
};

inline std::optional<PowerForm> power_form(const WTail& t) {
  if (auto p = std::get_if<PowerTail>(&t)) return PowerForm{p->c, p->A, p->alpha, 1.0, p->shift};
  if (auto e = std::get_if<EndpointTail>(&t)) return PowerForm{e->c, e->A, e->alpha, -1.0, e->end};
  return std::nullopt;
}

/// Locally square-integrable function: piecewise cubic on a grid plus a tail model.
struct AntiDerivative {
  std::vector<double> grid{0.0};
  std::vector<Coeffs> segments;
  WTail tail = ConstantTail{};

  double tail_start() const { return grid.back(); }

  double operator()(double x) const {
    if (x < tail_start()) {
      auto it = std::upper_bound(grid.begin(), grid.end(), x);
      const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid.begin() - 1, 0));
      return horner(segments[i], x - grid[i]);
    }
    return std::visit(
        [&](const auto& t) -> double {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, NoTail>) {
            throw DomainError("anti-derivative evaluated beyond its grid");
          } else if constexpr (std::is_same_v<T, ConstantTail>) {
            return t.c;
          } else if constexpr (std::is_same_v<T, PowerTail>) {
            return t.c + t.A * std::pow(x + t.shift, -t.alpha);
          } else if constexpr (std::is_same_v<T, PolynomialTail>) {
            return horner(t.coeffs, x - tail_start());
          } else {
            return t.c + t.A * std::pow(t.end - x, -t.alpha);
          }
        },
        tail);
  }

  bool operator==(const AntiDerivative&) const = default;
};

struct Atom {
  double position = 0.0, weight = 0.0;
  bool operator==(const Atom&) const = default;
};

struct ZeroDensity {
  bool operator==(const ZeroDensity&) const = default;
};
/// density B (x + shift)^(-beta); beta > 1, or beta = 0 for a constant density.
struct PowerDensity {
  double B = 0.0, beta = 2.0, shift = 0.0;
  bool operator==(const PowerDensity&) const = default;
};
/// density B (end - x)^(-beta), finite length only.
struct EndpointDensity {
  double B = 0.0, beta = 0.5, end = 1.0;
  bool operator==(const EndpointDensity&) const = default;
};
using DensityTail = std::variant<ZeroDensity, PowerDensity, EndpointDensity>;

enum class Sign { NonNegative, Signed };

/// Atoms plus a piecewise polynomial density (degree <= 2) and a density tail.
struct MeasureRepr {
  std::vector<Atom> atoms;
  std::vector<double> density_grid{0.0};
  std::vector<Coeffs> density;
  DensityTail tail = ZeroDensity{};
  Sign sign = Sign::NonNegative;

  double tail_start() const { return density_grid.back(); }
  bool operator==(const MeasureRepr&) const = default;
};

struct GIString {
  ExtendedLength length = ExtendedLength::infinite();
  AntiDerivative w;
  MeasureRepr upsilon;
  /// Set when ω was supplied as a measure (Krein-type input).
  std::optional<MeasureRepr> omega;
  bool operator==(const GIString&) const = default;
};

namespace detail {

inline bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

inline bool all_finite(const Coeffs& c) {
  return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

inline void validate(const AntiDerivative& w, const ExtendedLength& L) {
  if (w.grid.empty() || w.grid.front() != 0.0) throw DomainError("w grid must start at 0");
  if (!detail::strictly_increasing(w.grid)) throw DomainError("w grid must be strictly increasing");
  if (w.segments.size() + 1 != w.grid.size()) throw DomainError("w needs one segment per grid cell");
  for (const auto& s : w.segments) {
    if (s.empty() || s.size() > 4) throw DomainError("w segments must have degree <= 3");
    if (!detail::all_finite(s)) throw DomainError("w coefficients must be finite");
  }
  const double xm = w.tail_start();
  if (L.is_finite()) {
    if (xm > L.value()) throw DomainError("w grid exceeds L");
    if (std::holds_alternative<NoTail>(w.tail)) {
      if (xm != L.value()) throw DomainError("w grid must reach L when there is no tail");
    } else if (auto e = std::get_if<EndpointTail>(&w.tail)) {
      if (e->end != L.value() || !(xm < L.value())) throw DomainError("endpoint tail must end at L");
      if (e->alpha == 0.0 || !std::isfinite(e->alpha)) throw DomainError("endpoint tail exponent must be nonzero");
    } else {
      throw DomainError("finite L admits only 'none' or 'endpoint' w tails");
    }
  } else {
    if (auto p = std::get_if<PowerTail>(&w.tail)) {
      if (!(p->alpha > 0.0)) throw DomainError("power tail exponent must be positive");
      if (!(xm + p->shift > 0.0)) throw DomainError("power tail must stay away from its singular point");
    } else if (auto q = std::get_if<PolynomialTail>(&w.tail)) {
      if (q->coeffs.empty() || q->coeffs.size() > 4) throw DomainError("polynomial tail degree must be <= 3");
    } else if (!std::holds_alternative<ConstantTail>(w.tail)) {
      throw DomainError("infinite L needs a constant, power or polynomial w tail");
    }
  }
}

inline void validate(const MeasureRepr& m, const ExtendedLength& L) {
  const double end = L.end();
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const auto& a = m.atoms[i];
    if (!(a.position >= 0.0) || !(a.position < end)) throw DomainError("atom outside [0, L)");
    if (i > 0 && !(a.position > m.atoms[i - 1].position)) throw DomainError("atom positions must increase");
    if (!std::isfinite(a.weight)) throw DomainError("atom weight must be finite");
    if (m.sign == Sign::NonNegative && a.weight < 0.0) throw DomainError("negative atom in nonnegative measure");
  }
  if (m.density_grid.empty() || m.density_grid.front() < 0.0) throw DomainError("density grid must start at >= 0");
  if (!detail::strictly_increasing(m.density_grid)) throw DomainError("density grid must increase");
  if (m.density.size() + 1 != m.density_grid.size()) throw DomainError("one density piece per cell");
  if (m.tail_start() > end) throw DomainError("density grid exceeds L");
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    const auto& d = m.density[i];
    if (d.empty() || d.size() > 3) throw DomainError("density pieces must have degree <= 2");
    if (!detail::all_finite(d)) throw DomainError("density coefficients must be finite");
    if (m.sign == Sign::NonNegative) {
      const double h = m.density_grid[i + 1] - m.density_grid[i];
      double scale = 0.0;
      for (double c : d) scale = std::max(scale, std::abs(c));
      for (int k = 0; k <= 8; ++k)
        if (horner(d, h * k / 8.0) < -1e-14 * scale) throw DomainError("negative density in nonnegative measure");
    }
  }
  if (auto p = std::get_if<PowerDensity>(&m.tail)) {
    if (L.is_finite()) throw DomainError("power density tail needs infinite L");
    if (!(p->beta > 1.0 || p->beta == 0.0)) throw DomainError("density tail exponent must exceed 1 (or be 0)");
    if (!(m.tail_start() + p->shift > 0.0)) throw DomainError("density tail must stay away from its singular point");
    if (m.sign == Sign::NonNegative && p->B < 0.0) throw DomainError("negative density tail");
  } else if (auto e = std::get_if<EndpointDensity>(&m.tail)) {
    if (!L.is_finite() || e->end != L.value()) throw DomainError("endpoint density tail must end at finite L");
    if (!(m.tail_start() < e->end)) throw DomainError("endpoint density tail must start before L");
    if (!(e->beta > 0.0)) throw DomainError("endpoint density exponent must be positive");
    if (m.sign == Sign::NonNegative && e->B < 0.0) throw DomainError("negative density tail");
  }
}

inline void validate(const GIString& s) {
  validate(s.w, s.length);
  if (s.upsilon.sign != Sign::NonNegative) throw DomainError("upsilon must be nonnegative");
  validate(s.upsilon, s.length);
  if (s.omega) validate(*s.omega, s.length);
}

inline std::vector<std::string> warnings(const GIString& s) {
  std::vector<std::string> out;
  auto at_zero = [](const MeasureRepr& m) { return !m.atoms.empty() && m.atoms.front().position == 0.0; };
  if (at_zero(s.upsilon)) out.push_back("upsilon has an atom at 0; it is invisible to the energy space");
  if (s.omega && at_zero(*s.omega)) out.push_back("omega has an atom at 0; it is invisible to the energy space");
  return out;
}

inline bool has_density(const MeasureRepr& m) {
  for (const auto& d : m.density)
    for (double c : d)
      if (c != 0.0) return true;
  if (auto p = std::get_if<PowerDensity>(&m.tail)) return p->B != 0.0;
  if (auto e = std::get_if<EndpointDensity>(&m.tail)) return e->B != 0.0;
  return false;
}

/// Which function of w is integrated: w, w - c, w^2 or (w - c)^2.
enum class WForm { Value, Centered, Square, CenteredSquare };

namespace detail {

inline double apply_form(WForm f, double v, double c) {
  switch (f) {
    case WForm::Value: return v;
    case WForm::Centered: return v - c;
    case WForm::Square: return v * v;
    case WForm::CenteredSquare: return (v - c) * (v - c);
  }
  return v;
}

struct PowerTerm {
  double coef, exponent;
};

inline std::vector<PowerTerm> form_terms(WForm f, const PowerForm& p, double c) {
  const bool centered = (f == WForm::Centered || f == WForm::CenteredSquare);
  const double d0 = centered ? p.c - c : p.c;
  std::vector<PowerTerm> t;
  if (f == WForm::Value || f == WForm::Centered) {
    t = {{d0, 0.0}, {p.A, p.alpha}};
  } else {
    t = {{d0 * d0, 0.0}, {2.0 * d0 * p.A, p.alpha}, {p.A * p.A, 2.0 * p.alpha}};
  }
  std::erase_if(t, [](const PowerTerm& x) { return x.coef == 0.0; });
  return t;
}

/// ∫_a^b sum coef u^(-e) g(x) dx with u = sigma x + tau, sigma = ±1.
template <class G>
double integrate_terms(const std::vector<PowerTerm>& terms, double sigma, double tau, double a, double b, G&& g) {
  double s = 0.0;
  for (const auto& t : terms) {
    if (t.exponent == 0.0) {
      s += t.coef * quad::integrate(g, a, b);
      continue;
    }
    const double ua = sigma * a + tau, ub = sigma * b + tau;
    s += t.coef * quad::integrate_upow(t.exponent, std::min(ua, ub), std::max(ua, ub),
                                       [&](double u) { return g((u - tau) / sigma); });
  }
  return s;
}

/// Accumulates a sum that may contain divergent parts; the most divergent term decides the sign.
struct DivergentSum {
  double finite = 0.0;
  double worst_exponent = std::numeric_limits<double>::infinity();
  double worst_sign = 0.0;
  void add(double value, double divergence_rank, double sign) {
    if (std::isinf(value)) {
      if (divergence_rank < worst_exponent) {
        worst_exponent = divergence_rank;
        worst_sign = sign;
      }
    } else {
      finite += value;
    }
  }
  double result() const {
    if (worst_sign != 0.0) return std::copysign(std::numeric_limits<double>::infinity(), worst_sign);
    return finite;
  }
};

}  // namespace detail

/// ∫_a^b F(w(x)) g(x) dx for polynomial g (degree <= 9); F chosen by `form`.
template <class G>
double integrate_w(const AntiDerivative& w, WForm form, double c, double a, double b, G&& g) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.grid.size(); ++i) {
    const double lo = std::max(a, w.grid[i]), hi = std::min(b, w.grid[i + 1]);
    if (!(hi > lo)) continue;
    const auto& seg = w.segments[i];
    const double x0 = w.grid[i];
    s += quad::integrate([&](double x) { return detail::apply_form(form, horner(seg, x - x0), c) * g(x); }, lo, hi);
  }
  const double lo = std::max(a, w.tail_start());
  if (!(b > lo)) return s;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, NoTail>) {
          throw DomainError("integration range exceeds the w grid");
        } else if constexpr (std::is_same_v<T, ConstantTail>) {
          s += detail::apply_form(form, t.c, c) * quad::integrate(g, lo, b);
        } else if constexpr (std::is_same_v<T, PolynomialTail>) {
          const double xm = w.tail_start();
          const double len = b - lo;
          // split long ranges to keep the fixed rule well inside its exactness degree
          const int pieces = std::max(1, static_cast<int>(std::ceil(len / std::max(1.0, xm))));
          for (int k = 0; k < pieces; ++k) {
            const double p0 = lo + len * k / pieces, p1 = lo + len * (k + 1) / pieces;
            s += quad::integrate(
                [&](double x) { return detail::apply_form(form, horner(t.coeffs, x - xm), c) * g(x); }, p0, p1);
          }
        } else {
          const PowerForm pf = *power_form(WTail{t});
          s += detail::integrate_terms(detail::form_terms(form, pf, c), pf.sigma, pf.tau, lo, b, g);
        }
      },
      w.tail);
  return s;
}

/// ∫_{x0}^∞ F(w(x)) x^moment dx for moment in {0, 1}; infinite length only.
inline double integrate_w_to_infinity(const AntiDerivative& w, WForm form, double c, double x0, int moment) {
  auto weight = [moment](double x) { return moment == 0 ? 1.0 : x; };
  detail::DivergentSum sum;
  const double xm = w.tail_start();
  if (x0 < xm) sum.add(integrate_w(w, form, c, x0, xm, weight), 0, 0);
  const double lo = std::max(x0, xm);
  const double inf = std::numeric_limits<double>::infinity();
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, NoTail> || std::is_same_v<T, EndpointTail>) {
          throw UsageError("integrals to infinity need an infinite length");
        } else if constexpr (std::is_same_v<T, ConstantTail>) {
          const double v = detail::apply_form(form, t.c, c);
          if (v != 0.0) sum.add(inf, -1, v);
        } else if constexpr (std::is_same_v<T, PolynomialTail>) {
          std::size_t deg = 0;
          for (std::size_t k = 0; k < t.coeffs.size(); ++k)
            if (t.coeffs[k] != 0.0) deg = k;
          if (deg == 0) {
            const double v = detail::apply_form(form, t.coeffs[0], c);
            if (v != 0.0) sum.add(inf, -1, v);
          } else {
            const bool square = form == WForm::Square || form == WForm::CenteredSquare;
            sum.add(inf, -static_cast<double>(deg) - 1.0, square ? 1.0 : t.coeffs[deg]);
          }
        } else {
          const PowerForm pf = *power_form(WTail{t});
          const double u0 = lo + pf.tau;
          for (const auto& term : detail::form_terms(form, pf, c)) {
            if (moment == 0) {
              sum.add(term.coef * quad::power_to_infinity(term.exponent, u0), term.exponent, term.coef);
            } else {
              const double i1 = quad::power_to_infinity(term.exponent - 1.0, u0);
              const double i0 = quad::power_to_infinity(term.exponent, u0);
              if (std::isinf(i1) || std::isinf(i0))
                sum.add(inf, term.exponent - 1.0, term.coef);
              else
                sum.add(term.coef * (i1 - pf.tau * i0), 0, 0);
            }
          }
        }
      },
      w.tail);
  return sum.result();
}

inline double density_at(const MeasureRepr& m, double x) {
  if (x < m.density_grid.front()) return 0.0;
  if (x < m.tail_start()) {
    auto it = std::upper_bound(m.density_grid.begin(), m.density_grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - m.density_grid.begin() - 1);
    return horner(m.density[i], x - m.density_grid[i]);
  }
  if (auto p = std::get_if<PowerDensity>(&m.tail)) return p->B * std::pow(x + p->shift, -p->beta);
  if (auto e = std::get_if<EndpointDensity>(&m.tail)) return e->B * std::pow(e->end - x, -e->beta);
  return 0.0;
}

/// ∫_{[a,b)} g dm for polynomial g (degree <= 12).
template <class G>
double integrate_measure(const MeasureRepr& m, double a, double b, G&& g) {
  double s = 0.0;
  for (const auto& at : m.atoms)
    if (at.position >= a && at.position < b) s += at.weight * g(at.position);
  for (std::size_t i = 0; i + 1 < m.density_grid.size(); ++i) {
    const double lo = std::max(a, m.density_grid[i]), hi = std::min(b, m.density_grid[i + 1]);
    if (!(hi > lo)) continue;
    const auto& d = m.density[i];
    const double x0 = m.density_grid[i];
    s += quad::integrate([&](double x) { return horner(d, x - x0) * g(x); }, lo, hi);
  }
  const double lo = std::max(a, m.tail_start());
  if (!(b > lo)) return s;
  if (auto p = std::get_if<PowerDensity>(&m.tail)) {
    s += detail::integrate_terms({{p->B, p->beta}}, 1.0, p->shift, lo, b, g);
  } else if (auto e = std::get_if<EndpointDensity>(&m.tail)) {
    s += detail::integrate_terms({{e->B, e->beta}}, -1.0, e->end, lo, b, g);
  }
  return s;
}

inline double mass(const MeasureRepr& m, double a, double b) {
  return integrate_measure(m, a, b, [](double) { return 1.0; });
}

/// ∫_{[x0,∞)} x^moment dm for moment in {0, 1}; infinite length only.
inline double measure_moment_to_infinity(const MeasureRepr& m, double x0, int moment) {
  auto weight = [moment](double x) { return moment == 0 ? 1.0 : x; };
  double s = 0.0;
  for (const auto& at : m.atoms)
    if (at.position >= x0) s += at.weight * weight(at.position);
  const double d_end = m.tail_start();
  if (x0 < d_end) {
    MeasureRepr no_atoms = m;
    no_atoms.atoms.clear();
    s += integrate_measure(no_atoms, x0, d_end, weight);
  }
  if (auto p = std::get_if<PowerDensity>(&m.tail)) {
    if (p->B == 0.0) return s;
    const double u0 = std::max(x0, d_end) + p->shift;
    const double i0 = quad::power_to_infinity(p->beta, u0);
    if (moment == 0) return s + p->B * i0;
    const double i1 = quad::power_to_infinity(p->beta - 1.0, u0);
    if (std::isinf(i1)) return std::numeric_limits<double>::infinity();
    return s + p->B * (i1 - p->shift * i0);
  }
  if (std::holds_alternative<EndpointDensity>(m.tail)) throw UsageError("moments to infinity need an infinite length");
  return s;
}

/// Total mass of [0, L).
inline double total_mass(const MeasureRepr& m, const ExtendedLength& L) {
  if (!L.is_finite()) return measure_moment_to_infinity(m, 0.0, 0);
  return mass(m, 0.0, L.value());
}

/// Cesaro mean lim (1/x) ∫_0^x w; empty when it is infinite.
inline std::optional<double> cesaro_mean_limit(const AntiDerivative& w, const ExtendedLength& L) {
  if (L.is_finite()) throw UsageError("cesaro_mean_limit is defined for infinite length only");
  if (auto t = std::get_if<ConstantTail>(&w.tail)) return t->c;
  if (auto t = std::get_if<PowerTail>(&w.tail)) return t->c;
  if (auto t = std::get_if<PolynomialTail>(&w.tail)) {
    for (std::size_t k = 1; k < t->coeffs.size(); ++k)
      if (t->coeffs[k] != 0.0) return std::nullopt;
    return t->coeffs[0];
  }
  return std::nullopt;
}

/// Left-continuous distribution function q(x) = m([0, x)).
inline AntiDerivative anti_derivative_of_measure(const MeasureRepr& m, const ExtendedLength& L) {
  validate(m, L);
  const bool zero_tail = std::holds_alternative<ZeroDensity>(m.tail);
  const double d_end = m.tail_start();
  std::vector<double> bp{0.0};
  for (const auto& a : m.atoms) {
    if (!zero_tail && !(a.position < d_end)) throw DomainError("atoms must precede a nonzero density tail");
    bp.push_back(a.position);
  }
  for (double g : m.density_grid) bp.push_back(g);
  if (L.is_finite() && zero_tail) bp.push_back(L.value());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  auto atom_at = [&](double x) {
    for (const auto& a : m.atoms)
      if (a.position == x) return a.weight;
    return 0.0;
  };

  AntiDerivative q;
  q.grid = bp;
  double running = 0.0;  // m([0, bp[j]))
  for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
    const double v0 = running + atom_at(bp[j]);
    Coeffs seg{v0};
    const double mid = 0.5 * (bp[j] + bp[j + 1]);
    if (mid >= m.density_grid.front() && mid < d_end) {
      auto it = std::upper_bound(m.density_grid.begin(), m.density_grid.end(), mid);
      const std::size_t i = static_cast<std::size_t>(it - m.density_grid.begin() - 1);
      const Coeffs local = shifted(m.density[i], bp[j] - m.density_grid[i]);
      seg.resize(local.size() + 1, 0.0);
      for (std::size_t k = 0; k < local.size(); ++k) seg[k + 1] = local[k] / static_cast<double>(k + 1);
    }
    q.segments.push_back(seg);
    running = v0 + (horner(seg, bp[j + 1] - bp[j]) - v0);
  }
  const double end_mass = running + atom_at(bp.back());  // m([0, x_m])

  if (!L.is_finite()) {
    if (zero_tail) {
      q.tail = ConstantTail{end_mass};
    } else if (auto p = std::get_if<PowerDensity>(&m.tail)) {
      if (p->beta == 0.0) {
        q.tail = PolynomialTail{{end_mass, p->B}};
      } else {
        const double k = p->B / (p->beta - 1.0);
        q.tail = PowerTail{end_mass + k * std::pow(d_end + p->shift, 1.0 - p->beta), -k, p->beta - 1.0, p->shift};
      }
    }
  } else {
    if (zero_tail) {
      q.tail = NoTail{};
    } else {
      const auto& e = std::get<EndpointDensity>(m.tail);
      if (e.beta == 1.0) throw DomainError("density (L-x)^-1 has a logarithmic anti-derivative, outside the model class");
      const double k = e.B / (1.0 - e.beta);
      q.tail = EndpointTail{end_mass + k * std::pow(e.end - d_end, 1.0 - e.beta), -k, e.beta - 1.0, e.end};
    }
  }
  return q;
}

/// Continuous piecewise polynomial test function with compact support [grid.front(), grid.back()].
struct PiecewisePoly {
  std::vector<double> grid;
  std::vector<Coeffs> segments;
  double operator()(double x) const {
    if (x < grid.front() || x > grid.back()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    i = std::min(i, segments.size()) - 1;
    return horner(segments[i], x - grid[i]);
  }
};

/// ω(h) = -∫ w h'.
inline double pair_distribution(const AntiDerivative& w, const PiecewisePoly& h, const ExtendedLength& L) {
  if (h.grid.size() < 2 || h.segments.size() + 1 != h.grid.size()) throw UsageError("malformed test function");
  if (h.grid.front() < 0.0 || !(h.grid.back() < L.end())) throw DomainError("test function support escapes [0, L)");
  double s = 0.0;
  for (std::size_t i = 0; i < h.segments.size(); ++i) {
    const Coeffs d = derivative(h.segments[i]);
    const double x0 = h.grid[i];
    s -= integrate_w(w, WForm::Value, 0.0, h.grid[i], h.grid[i + 1], [&](double x) { return horner(d, x - x0); });
  }
  return s;
}

/// Reproducing kernel of the energy space: min(x,t) (1 - max(x,t)/L).
inline double kernel_delta(double x, double t, const ExtendedLength& L) {
  const double lo = std::min(x, t), hi = std::max(x, t);
  return L.is_finite() ? lo * (1.0 - hi / L.value()) : lo;
}

}  // namespace gis
