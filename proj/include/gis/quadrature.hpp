#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gis/errors.hpp"

namespace gis::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1] for Legendre, [0, 1] for Jacobi
  std::vector<double> weights;
};

inline Rule make_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

inline const Rule& gauss_legendre(int n) {
  static const Rule r8 = make_gauss_legendre(8);
  static const Rule r16 = make_gauss_legendre(16);
  if (n == 8) return r8;
  if (n == 16) return r16;
  throw UsageError("gauss_legendre: only 8 and 16 point rules are tabulated");
}

/// Fixed 8-point Gauss-Legendre on [a, b]; exact for polynomials of degree <= 15.
template <class F>
double integrate(F&& f, double a, double b, int points = 8) {
  if (!(b > a)) return 0.0;
  const Rule& r = gauss_legendre(points);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

/// Gauss rule on [0, 1] for the weight v^b (b > -1), via Golub-Welsch.
inline Rule gauss_jacobi_unit(int n, double b) {
  if (!(b > -1.0)) throw UsageError("gauss_jacobi_unit: exponent must exceed -1");
  const double a = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    J(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k > 0) {
      const double sk = 2.0 * k + a + b;
      const double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
      const double den = sk * sk * (sk + 1.0) * (sk - 1.0);
      J(k, k - 1) = J(k - 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, b + 1.0) / (b + 1.0);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double scale = std::pow(2.0, -b - 1.0);
  for (int i = 0; i < n; ++i) {
    const double y = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.nodes[i] = 0.5 * (1.0 + y);
    r.weights[i] = mu0 * v0 * v0 * scale;
  }
  return r;
}

/// ∫_{u0}^{u1} u^{-alpha} g(u) du for 0 <= u0 < u1 and polynomial g (degree <= 15).
/// Pieces away from u = 0 are split geometrically; the piece touching 0 uses a
/// Jacobi rule that absorbs the power exactly. Divergent integrals return ±inf.
template <class G>
double integrate_upow(double alpha, double u0, double u1, G&& g) {
  if (!(u1 > u0)) return 0.0;
  if (alpha == 0.0) return integrate(g, u0, u1);
  if (u0 > 0.0) {
    double s = 0.0, lo = u0;
    while (lo < u1) {
      const double hi = std::min(2.0 * lo, u1);
      s += integrate([&](double u) { return std::pow(u, -alpha) * g(u); }, lo, hi, 16);
      lo = hi;
    }
    return s;
  }
  // Touches the singular point.
  double e = -alpha;
  bool divide = false;
  if (e <= -1.0) {
    const double g0 = g(0.0);
    const double gs = std::max({std::abs(g(0.25 * u1)), std::abs(g(0.5 * u1)), std::abs(g(u1))});
    if (std::abs(g0) <= 1e-13 * gs && e + 1.0 > -1.0) {
      divide = true;
      e += 1.0;
    } else {
      if (g0 == 0.0 && gs == 0.0) return 0.0;
      return std::copysign(std::numeric_limits<double>::infinity(), g0 != 0.0 ? g0 : g(0.5 * u1));
    }
  }
  const Rule r = gauss_jacobi_unit(10, e);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double u = u1 * r.nodes[i];
    s += r.weights[i] * (divide ? g(u) / u : g(u));
  }
  return s * std::pow(u1, e + 1.0);
}

/// ∫_{u0}^∞ u^{-e} du.
inline double power_to_infinity(double e, double u0) {
  if (e <= 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(u0, 1.0 - e) / (e - 1.0);
}

}  // namespace gis::quad
