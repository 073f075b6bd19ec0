#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gis/coefficients.hpp"

namespace gis {

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
struct SymTridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;

  explicit SymTridiagonal(int n = 0) : diag(Eigen::VectorXd::Zero(n)), off(Eigen::VectorXd::Zero(std::max(n - 1, 0))) {}
  int size() const { return static_cast<int>(diag.size()); }

  void add(int i, int j, double v) {
    if (i == j) {
      diag(i) += v;
    } else if (std::abs(i - j) == 1) {
      off(std::min(i, j)) += v;  // (i, j) and (j, i) share storage
    } else {
      throw InvariantViolation("entry outside the tridiagonal band");
    }
  }

  Eigen::MatrixXd dense() const {
    const int n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = diag(i);
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = off(i);
    return m;
  }
};

/// Galerkin model on hat functions at interior nodes; for infinite length the
/// last basis function is a plateau (ramp on the last cell, then constant 1).
struct GalerkinModel {
  std::vector<double> nodes;  // 0 = t_0 < ... ; ends at L when L is finite
  ExtendedLength length;
  SymTridiagonal stiffness;
  SymTridiagonal omega_form;
  SymTridiagonal upsilon_form;

  int size() const { return stiffness.size(); }
  bool plateau() const { return !length.is_finite(); }
};

namespace detail {

inline std::vector<double> normalized_nodes(std::vector<double> nodes, const ExtendedLength& L) {
  if (nodes.empty() || nodes.front() != 0.0) throw PreconditionError("nodes must start at 0");
  if (!strictly_increasing(nodes)) throw PreconditionError("nodes must be strictly increasing");
  if (L.is_finite()) {
    if (nodes.back() > L.value()) throw PreconditionError("nodes exceed L");
    if (nodes.back() < L.value()) nodes.push_back(L.value());
    if (nodes.size() < 3) throw PreconditionError("need at least one interior node");
  } else if (nodes.size() < 2) {
    throw PreconditionError("need at least one node after 0");
  }
  return nodes;
}

inline void require_atom_nodes(const MeasureRepr& m, const std::vector<double>& nodes, bool plateau) {
  const double last = nodes.back();
  for (const auto& a : m.atoms) {
    if (a.position == 0.0) continue;
    if (plateau && a.position > last) continue;  // the plateau is constant there
    if (!std::binary_search(nodes.begin(), nodes.end(), a.position))
      throw PreconditionError("atom at " + std::to_string(a.position) + " is not a node");
  }
}

/// Value of basis function `b` (0-based, node index b+1) at x.
inline double basis_value(const std::vector<double>& t, bool plateau, int b, double x) {
  const std::size_t i = static_cast<std::size_t>(b) + 1;
  if (plateau && i + 1 == t.size()) {
    if (x >= t[i]) return 1.0;
    if (x <= t[i - 1]) return 0.0;
    return (x - t[i - 1]) / (t[i] - t[i - 1]);
  }
  if (x <= t[i - 1] || x >= t[i + 1]) return 0.0;
  return x <= t[i] ? (x - t[i - 1]) / (t[i] - t[i - 1]) : (t[i + 1] - x) / (t[i + 1] - t[i]);
}

}  // namespace detail

/// Pairing matrix ∫ φ_i φ_j dm, assembled directly from the measure.
inline SymTridiagonal measure_form(const MeasureRepr& m, const std::vector<double>& t, bool plateau) {
  const int n = plateau ? static_cast<int>(t.size()) - 1 : static_cast<int>(t.size()) - 2;
  SymTridiagonal C(n);
  MeasureRepr cont = m;
  cont.atoms.clear();
  for (const auto& a : m.atoms) {
    // atoms touch at most two adjacent basis functions
    for (int i = 0; i < n; ++i) {
      const double vi = detail::basis_value(t, plateau, i, a.position);
      if (vi == 0.0) continue;
      for (int j = i; j < std::min(n, i + 2); ++j) C.add(i, j, a.weight * vi * detail::basis_value(t, plateau, j, a.position));
    }
  }
  for (std::size_t e = 1; e < t.size(); ++e) {
    const double a = t[e - 1], b = t[e], h = b - a;
    const int left = static_cast<int>(e) - 2, right = static_cast<int>(e) - 1;
    auto psi_l = [&](double x) { return (b - x) / h; };
    auto psi_r = [&](double x) { return (x - a) / h; };
    const bool has_l = left >= 0, has_r = right < n;
    if (has_l) C.add(left, left, integrate_measure(cont, a, b, [&](double x) { return psi_l(x) * psi_l(x); }));
    if (has_r) C.add(right, right, integrate_measure(cont, a, b, [&](double x) { return psi_r(x) * psi_r(x); }));
    if (has_l && has_r) C.add(left, right, integrate_measure(cont, a, b, [&](double x) { return psi_l(x) * psi_r(x); }));
  }
  if (plateau) C.add(n - 1, n - 1, measure_moment_to_infinity(cont, t.back(), 0));
  return C;
}

/// Pairing matrix ω(φ_i φ_j) = -∫ w (φ_i φ_j)', plus c for the plateau.
inline SymTridiagonal distribution_form(const AntiDerivative& w, const std::vector<double>& t, const ExtendedLength& L) {
  const bool plateau = !L.is_finite();
  const int n = plateau ? static_cast<int>(t.size()) - 1 : static_cast<int>(t.size()) - 2;
  SymTridiagonal B(n);
  for (std::size_t e = 1; e < t.size(); ++e) {
    const double a = t[e - 1], b = t[e], h = b - a;
    const int left = static_cast<int>(e) - 2, right = static_cast<int>(e) - 1;
    const bool has_l = left >= 0, has_r = right < n;
    // (ψ_l²)' = -2(b-x)/h², (ψ_r²)' = 2(x-a)/h², (ψ_l ψ_r)' = (a + b - 2x)/h²
    auto pair = [&](auto&& g) { return -integrate_w(w, WForm::Value, 0.0, a, b, g); };
    if (has_l) B.add(left, left, pair([&](double x) { return -2.0 * (b - x) / (h * h); }));
    if (has_r) B.add(right, right, pair([&](double x) { return 2.0 * (x - a) / (h * h); }));
    if (has_l && has_r) B.add(left, right, pair([&](double x) { return (a + b - 2.0 * x) / (h * h); }));
  }
  if (plateau) {
    const auto c = cesaro_mean_limit(w, L);
    if (!c) throw DomainError("omega is not a bounded form on the plateau: the Cesaro mean of w diverges");
    B.add(n - 1, n - 1, *c);
  }
  return B;
}

inline GalerkinModel build_galerkin(const GIString& s, std::vector<double> nodes) {
  validate(s);
  GalerkinModel g;
  g.length = s.length;
  g.nodes = detail::normalized_nodes(std::move(nodes), s.length);
  const auto& t = g.nodes;
  const bool plateau = g.plateau();
  detail::require_atom_nodes(s.upsilon, t, plateau);
  const int n = plateau ? static_cast<int>(t.size()) - 1 : static_cast<int>(t.size()) - 2;
  g.stiffness = SymTridiagonal(n);
  for (std::size_t e = 1; e < t.size(); ++e) {
    const double h = t[e] - t[e - 1];
    const int left = static_cast<int>(e) - 2, right = static_cast<int>(e) - 1;
    if (left >= 0) g.stiffness.add(left, left, 1.0 / h);
    if (right < n) g.stiffness.add(right, right, 1.0 / h);
    if (left >= 0 && right < n) g.stiffness.add(left, right, -1.0 / h);
  }
  g.omega_form = distribution_form(s.w, t, s.length);
  g.upsilon_form = measure_form(s.upsilon, t, plateau);
  return g;
}

/// Default nodes: coefficient breakpoints merged with a uniform refinement
/// (plus a geometric stretch into non-constant tails).
inline std::vector<double> default_nodes(const GIString& s, int n) {
  if (n < 1) throw UsageError("default_nodes: n must be positive");
  std::vector<double> must;
  for (double x : s.w.grid) must.push_back(x);
  for (const auto& a : s.upsilon.atoms) must.push_back(a.position);
  for (double x : s.upsilon.density_grid) must.push_back(x);
  const double end = s.length.end();
  std::erase_if(must, [&](double x) { return !(x >= 0.0) || !(x < end); });
  must.push_back(0.0);
  std::vector<double> extra;
  if (s.length.is_finite()) {
    const double L = s.length.value();
    for (int k = 1; k < n; ++k) extra.push_back(L * k / n);
    const double xm = std::max(s.w.tail_start(), s.upsilon.tail_start());
    const bool singular_end = std::holds_alternative<EndpointTail>(s.w.tail) ||
                              std::holds_alternative<EndpointDensity>(s.upsilon.tail);
    if (singular_end && xm < L) {
      const int levels = static_cast<int>(std::ceil(std::log2(n + 1.0))) + 4;
      for (int j = 1; j <= levels; ++j) extra.push_back(L - (L - xm) * std::ldexp(1.0, -j));
    }
  } else {
    double x0 = 1.0;
    for (double x : must) x0 = std::max(x0, x);
    for (int k = 1; k <= n; ++k) extra.push_back(x0 * k / n);
    const bool constant_w = std::holds_alternative<ConstantTail>(s.w.tail);
    const bool zero_u = std::holds_alternative<ZeroDensity>(s.upsilon.tail);
    if (!constant_w || !zero_u) {
      const int m = std::max(4, n / 4);
      const double ratio = std::pow(4.0 * n, 1.0 / m);
      double x = x0;
      for (int j = 0; j < m; ++j) extra.push_back(x *= ratio);
    }
  }
  std::sort(must.begin(), must.end());
  must.erase(std::unique(must.begin(), must.end()), must.end());
  const double scale = std::isfinite(end) ? end : std::max(1.0, must.back());
  const double tol = 1e-9 * scale;
  std::vector<double> out = must;
  for (double x : extra) {
    if (!(x < end)) continue;
    auto it = std::lower_bound(must.begin(), must.end(), x);
    const bool near = (it != must.end() && *it - x < tol) || (it != must.begin() && x - *(it - 1) < tol);
    if (!near) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Spectral square root of a symmetric PSD matrix; eigenvalues with
/// |e| <= clip_tol * ||M|| are set to zero.
inline Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m, double clip_tol = 1e-10) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("sqrt_psd: eigensolver failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  const double cut = clip_tol * norm;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -cut) throw NotPsdError("sqrt_psd: matrix has a significantly negative eigenvalue");
    ev(i) = ev(i) <= cut ? 0.0 : std::sqrt(ev(i));
  }
  Eigen::MatrixXd r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

struct WhitenedPencil {
  Eigen::MatrixXd k_omega;
  Eigen::MatrixXd k_upsilon;
  Eigen::MatrixXd sqrt_k_upsilon;
  Eigen::MatrixXd block;  // symmetric block matrix whose nonzero eigenvalues are 1/λ
  double asymmetry = 0.0;  // before symmetrization, relative to ||block||
};

namespace detail {

/// Lower bidiagonal Cholesky factor of a tridiagonal SPD matrix.
struct BidiagonalCholesky {
  Eigen::VectorXd d, l;  // diagonal, subdiagonal
  explicit BidiagonalCholesky(const SymTridiagonal& a) {
    const int n = a.size();
    d.resize(n);
    l.resize(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) {
      double p = a.diag(i) - (i > 0 ? l(i - 1) * l(i - 1) : 0.0);
      if (!(p > 0.0)) throw InvariantViolation("stiffness matrix is not positive definite");
      d(i) = std::sqrt(p);
      if (i + 1 < n) l(i) = a.off(i) / d(i);
    }
  }
  /// In place X <- L^{-1} X (row recursion).
  void solve_rows(Eigen::MatrixXd& x) const {
    const int n = static_cast<int>(d.size());
    for (int i = 0; i < n; ++i) {
      if (i > 0) x.row(i) -= l(i - 1) * x.row(i - 1);
      x.row(i) /= d(i);
    }
  }
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = b;
    solve_rows(x);
    Eigen::MatrixXd y = x.transpose();
    solve_rows(y);
    return y;
  }
};

}  // namespace detail

inline WhitenedPencil whiten(const GalerkinModel& g, double clip_tol = 1e-10) {
  const detail::BidiagonalCholesky chol(g.stiffness);
  WhitenedPencil w;
  Eigen::MatrixXd ko = chol.whiten(g.omega_form.dense());
  Eigen::MatrixXd ku = chol.whiten(g.upsilon_form.dense());
  const double scale = std::max({ko.cwiseAbs().maxCoeff(), ku.cwiseAbs().maxCoeff(), 1e-300});
  w.asymmetry = std::max((ko - ko.transpose()).cwiseAbs().maxCoeff(), (ku - ku.transpose()).cwiseAbs().maxCoeff()) / scale;
  w.k_omega = 0.5 * (ko + ko.transpose());
  w.k_upsilon = 0.5 * (ku + ku.transpose());
  const int n = g.size();
  if (w.k_upsilon.cwiseAbs().maxCoeff() == 0.0) {
    w.sqrt_k_upsilon = Eigen::MatrixXd::Zero(n, n);
    w.block = w.k_omega;
    return w;
  }
  w.sqrt_k_upsilon = sqrt_psd(w.k_upsilon, clip_tol);
  const double col_tol = clip_tol * std::max(w.sqrt_k_upsilon.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<int> keep;
  for (int j = 0; j < n; ++j)
    if (w.sqrt_k_upsilon.col(j).cwiseAbs().maxCoeff() > col_tol) keep.push_back(j);
  const int r = static_cast<int>(keep.size());
  w.block = Eigen::MatrixXd::Zero(n + r, n + r);
  w.block.topLeftCorner(n, n) = w.k_omega;
  for (int k = 0; k < r; ++k) {
    w.block.block(0, n + k, n, 1) = w.sqrt_k_upsilon.col(keep[k]);
    w.block.block(n + k, 0, 1, n) = w.sqrt_k_upsilon.col(keep[k]).transpose();
  }
  return w;
}

}  // namespace gis
