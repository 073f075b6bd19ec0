#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gis/criteria.hpp"
#include "gis/quadrature.hpp"

/// Half-line conservative Camassa–Holm isospectral problem and its string image.
namespace gis::ch {

/// density B e^(gamma x) beyond the density grid; gamma < 1.
struct ExpTail {
  double B = 0.0, gamma = 0.0;
  bool operator==(const ExpTail&) const = default;
};
using CHDensityTail = std::variant<ZeroDensity, ExpTail>;

/// Nonnegative measure: atoms, piecewise constant density, exponential tail.
struct CHMeasure {
  std::vector<Atom> atoms;
  std::vector<double> density_grid{0.0};
  std::vector<double> density;
  CHDensityTail tail = ZeroDensity{};
  bool operator==(const CHMeasure&) const = default;
};

/// u is piecewise cubic, C¹, and constant beyond its grid (ConstantTail).
struct CHProblem {
  AntiDerivative u;
  CHMeasure upsilon;
  bool operator==(const CHProblem&) const = default;
};

inline double u_infinity(const CHProblem& p) { return std::get<ConstantTail>(p.u.tail).c; }

inline void validate(const CHProblem& p) {
  if (!std::holds_alternative<ConstantTail>(p.u.tail))
    throw DomainError("u must be constant beyond its grid");
  validate(p.u, ExtendedLength::infinite());
  const auto& g = p.u.grid;
  const double uinf = u_infinity(p);
  for (std::size_t i = 0; i < p.u.segments.size(); ++i) {
    const auto& seg = p.u.segments[i];
    const double h = g[i + 1] - g[i];
    const double right = horner(seg, h), right_d = horner(derivative(seg), h);
    double next = uinf, next_d = 0.0;
    if (i + 1 < p.u.segments.size()) {
      next = p.u.segments[i + 1][0];
      next_d = p.u.segments[i + 1].size() > 1 ? p.u.segments[i + 1][1] : 0.0;
    }
    const double scale = 1.0 + std::abs(right) + std::abs(right_d);
    if (std::abs(right - next) > 1e-12 * scale || std::abs(right_d - next_d) > 1e-12 * scale)
      throw DomainError("u must be continuously differentiable at its breakpoints");
  }
  const auto& m = p.upsilon;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    if (!(m.atoms[i].position >= 0.0) || !std::isfinite(m.atoms[i].position)) throw DomainError("atom outside [0, inf)");
    if (i > 0 && !(m.atoms[i].position > m.atoms[i - 1].position)) throw DomainError("atom positions must increase");
    if (!(m.atoms[i].weight >= 0.0)) throw DomainError("upsilon atoms must be nonnegative");
  }
  if (m.density_grid.empty() || m.density_grid.front() != 0.0 || !detail::strictly_increasing(m.density_grid))
    throw DomainError("density grid must start at 0 and increase");
  if (m.density.size() + 1 != m.density_grid.size()) throw DomainError("one density value per cell");
  for (double d : m.density)
    if (!(d >= 0.0)) throw DomainError("upsilon density must be nonnegative");
  if (auto e = std::get_if<ExpTail>(&m.tail)) {
    if (!(e->B >= 0.0)) throw DomainError("upsilon density tail must be nonnegative");
    if (!(e->gamma < 1.0)) throw DomainError("exponential tail rate must be below 1");
  }
}

namespace detail {

/// Cubic through four Chebyshev–Lobatto points of [a, b], local coordinate x - a.
template <class F>
Coeffs cubic_fit(const F& f, double a, double b) {
  Eigen::Matrix4d V;
  Eigen::Vector4d y;
  const double h = b - a;
  for (int k = 0; k < 4; ++k) {
    const double tau = 0.5 * h * (1.0 - std::cos(M_PI * k / 3.0));
    for (int j = 0; j < 4; ++j) V(k, j) = std::pow(tau, j);
    y(k) = f(a + tau);
  }
  const Eigen::Vector4d c = V.fullPivLu().solve(y);
  return {c(0), c(1), c(2), c(3)};
}

/// Quadratic through the endpoints and midpoint of [a, b].
template <class F>
Coeffs quadratic_fit(const F& f, double a, double b) {
  const double h = b - a;
  const double f0 = f(a), f1 = f(a + 0.5 * h), f2 = f(b);
  const double c2 = 2.0 * (f2 - 2.0 * f1 + f0) / (h * h);
  const double c1 = (f2 - f0) / h - c2 * h;
  return {f0, c1, c2};
}

/// Splits [a, b] into 2^k equal cells until every fit is within tol (scaled) at 17 probes per cell.
template <class F, class Fit>
void certified_pieces(const F& f, const Fit& fit, double a, double b, double tol, bool relative,
                      std::vector<double>& grid, std::vector<Coeffs>& segs) {
  for (int m = 1; m <= (1 << 18); m *= 2) {
    std::vector<double> g;
    std::vector<Coeffs> s;
    bool ok = true;
    const double h = (b - a) / m;
    for (int i = 0; i < m && ok; ++i) {
      const double l = a + h * i, r = (i + 1 == m) ? b : a + h * (i + 1);
      Coeffs c = fit(f, l, r);
      for (int k = 0; k <= 16; ++k) {
        const double x = l + (r - l) * k / 16.0;
        const double exact = f(x);
        const double scale = relative ? std::abs(exact) : 1.0;
        if (std::abs(horner(c, x - l) - exact) > tol * scale) {
          ok = false;
          break;
        }
      }
      g.push_back(l);
      s.push_back(std::move(c));
    }
    if (ok) {
      grid.insert(grid.end(), g.begin(), g.end());
      segs.insert(segs.end(), s.begin(), s.end());
      return;
    }
  }
  throw NumericalError("transform interpolation did not reach its tolerance");
}

inline Coeffs plus_derivative(const Coeffs& c) {
  Coeffs out = c;
  const Coeffs d = derivative(c);
  for (std::size_t k = 0; k < d.size(); ++k) out[k] += d[k];
  return out;
}

}  // namespace detail

/// Image string (∞, ω̃, υ̃) under t = e^s - 1; compact parts interpolated to within tol.
inline GIString ch_to_string(const CHProblem& p, double tol = 1e-8) {
  validate(p);
  if (!(tol > 0.0)) throw UsageError("transform tolerance must be positive");
  GIString s;
  const double u0 = p.u(0.0);
  const double uinf = u_infinity(p);

  s.w.grid.clear();
  s.w.segments.clear();
  for (std::size_t i = 0; i < p.u.segments.size(); ++i) {
    const double s0 = p.u.grid[i];
    const Coeffs P = detail::plus_derivative(p.u.segments[i]);
    auto f = [&](double t) { return u0 - horner(P, std::log1p(t) - s0) / (1.0 + t); };
    detail::certified_pieces(f, [](const auto& g, double a, double b) { return detail::cubic_fit(g, a, b); },
                             std::expm1(s0), std::expm1(p.u.grid[i + 1]), tol, false, s.w.grid, s.w.segments);
  }
  s.w.grid.push_back(std::expm1(p.u.tail_start()));
  if (uinf == 0.0)
    s.w.tail = ConstantTail{u0};
  else
    s.w.tail = PowerTail{u0, -uinf, 1.0, 1.0};

  auto& v = s.upsilon;
  for (const auto& a : p.upsilon.atoms) v.atoms.push_back({std::expm1(a.position), std::exp(-a.position) * a.weight});
  v.density_grid.clear();
  v.density.clear();
  for (std::size_t i = 0; i < p.upsilon.density.size(); ++i) {
    const double rho = p.upsilon.density[i];
    const double a = std::expm1(p.upsilon.density_grid[i]), b = std::expm1(p.upsilon.density_grid[i + 1]);
    if (rho == 0.0) {
      v.density_grid.push_back(a);
      v.density.push_back({0.0});
      continue;
    }
    auto f = [rho](double t) { return rho / ((1.0 + t) * (1.0 + t)); };
    detail::certified_pieces(f, [](const auto& g, double l, double r) { return detail::quadratic_fit(g, l, r); }, a, b,
                             tol, true, v.density_grid, v.density);
  }
  v.density_grid.push_back(std::expm1(p.upsilon.density_grid.back()));
  if (auto e = std::get_if<ExpTail>(&p.upsilon.tail); e && e->B != 0.0) v.tail = PowerDensity{e->B, 2.0 - e->gamma, 1.0};
  return s;
}

/// ∫_x^∞ e^(x-t) (u' + u)² dt + ∫_[x,∞) e^(x-t) dυ(t)  (the constant c is 0 for this class).
inline double ch_tail_functional(const CHProblem& p, double x) {
  validate(p);
  double total = 0.0;
  const auto& g = p.u.grid;
  for (std::size_t i = 0; i < p.u.segments.size(); ++i) {
    const double a = std::max(x, g[i]), b = g[i + 1];
    if (!(a < b)) continue;
    const Coeffs P = detail::plus_derivative(p.u.segments[i]);
    total += quad::integrate(
        [&](double t) {
          const double v = horner(P, t - g[i]);
          return std::exp(x - t) * v * v;
        },
        a, b, 16);
  }
  const double uinf = u_infinity(p);
  total += uinf * uinf * std::exp(x - std::max(x, p.u.tail_start()));

  const auto& m = p.upsilon;
  for (const auto& at : m.atoms)
    if (at.position >= x) total += at.weight * std::exp(x - at.position);
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    const double a = std::max(x, m.density_grid[i]), b = m.density_grid[i + 1];
    if (a < b) total += m.density[i] * (std::exp(x - a) - std::exp(x - b));
  }
  if (auto e = std::get_if<ExpTail>(&m.tail); e && e->B != 0.0) {
    const double start = std::max(x, m.density_grid.back());
    total += e->B * std::exp(x + (e->gamma - 1.0) * start) / (1.0 - e->gamma);
  }
  return total;
}

inline Classification ch_classify(const CHProblem& p, std::vector<double> p_list) {
  validate(p);
  gis::detail::require_p(p_list, 1.0, "ch_classify");
  std::sort(p_list.begin(), p_list.end());
  Classification out;
  out.c = 0.0;
  out.c_provenance = CProvenance::ClosedForm;

  const double uinf = u_infinity(p);
  double B = 0.0, gamma = 0.0;
  if (auto e = std::get_if<ExpTail>(&p.upsilon.tail)) {
    B = e->B;
    gamma = e->gamma;
  }
  if (B > 0.0 && gamma > 0.0) {
    out.zero_not_in_spectrum = {Tri::No, "weighted upsilon tail grows like exp(" + gis::detail::fmt(gamma) + " x)"};
    out.discrete = {Tri::No, "0 is in the spectrum"};
    for (double q : p_list) out.schatten.push_back({q, {Tri::No, "0 is in the spectrum"}});
    check_consistency(out);
    return out;
  }
  const double limit = uinf * uinf + (B > 0.0 && gamma == 0.0 ? B : 0.0);
  if (limit > 0.0) {
    out.zero_not_in_spectrum = {Tri::Yes, "tail functional bounded"};
    out.discrete = {Tri::No, "tail functional tends to " + gis::detail::fmt(limit) + " > 0"};
    for (double q : p_list) out.schatten.push_back({q, {Tri::No, "not discrete"}});
    check_consistency(out);
    return out;
  }
  const std::string why = B > 0.0 ? "tail functional decays like exp(" + gis::detail::fmt(gamma) + " x)"
                                   : "tail functional vanishes beyond the support of u and upsilon";
  gis::detail::all_yes(p_list, out, why);

  bool u_zero = uinf == 0.0;
  for (const auto& seg : p.u.segments)
    for (double c : seg) u_zero = u_zero && c == 0.0;
  const bool atomic = B == 0.0 && std::all_of(p.upsilon.density.begin(), p.upsilon.density.end(),
                                                [](double d) { return d == 0.0; });
  if (u_zero && atomic) {
    out.trace_sum = SpectralSum{0.0, SumKind::Exact};
  } else {
    out.warnings.push_back("trace class undecided; necessary condition 'u' + u integrable' holds");
    if (!atomic) out.warnings.push_back("upsilon has a density component, so the spectrum is not trace class");
  }
  check_consistency(out);
  return out;
}

}  // namespace gis::ch
