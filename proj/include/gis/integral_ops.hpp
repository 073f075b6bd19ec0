#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gis/discretization.hpp"

/// Max-kernel (half line) and min-kernel (finite interval) integral operators on step functions.
namespace gis::intops {

/// Matrices in the orthonormal step basis 1_[g_i, g_{i+1}) / sqrt(h_i).
struct DiscretizedJ {
  std::vector<double> grid;
  ExtendedLength length = ExtendedLength::infinite();
  double c = 0.0;              // subtracted constant (half line), 0 otherwise
  Eigen::MatrixXd full;        // all step functions
  Eigen::MatrixXd projected;   // conjugated by the mean-zero projection
};

namespace detail {

inline Eigen::MatrixXd mean_zero_projection(const Eigen::MatrixXd& m, const std::vector<double>& grid) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::sqrt(grid[i + 1] - grid[i]);
  v /= v.norm();
  // P M P with P = I - v v^T as a rank-1 deflation
  const Eigen::VectorXd mv = m * v;
  const double vmv = v.dot(mv);
  Eigen::MatrixXd out = m - mv * v.transpose() - v * mv.transpose() + vmv * v * v.transpose();
  return 0.5 * (out + out.transpose());
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2 || grid.front() != 0.0) throw UsageError("step grid must start at 0 and have a cell");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw UsageError("step grid must increase");
}

}  // namespace detail

/// J f(x) = ∫ (q - c)(max(x, t)) f(t) dt on steps over `grid`; c is the Cesaro mean of q.
inline DiscretizedJ build_J(const AntiDerivative& q, const std::vector<double>& grid) {
  detail::check_grid(grid);
  const auto c = cesaro_mean_limit(q, ExtendedLength::infinite());
  if (!c) throw UsageError("build_J: the Cesaro mean of q diverges, so J is unbounded");
  const int n = static_cast<int>(grid.size()) - 1;
  std::vector<double> h(n), cell(n);
  DiscretizedJ out{grid, ExtendedLength::infinite(), *c, Eigen::MatrixXd::Zero(n, n), {}};
  for (int i = 0; i < n; ++i) {
    const double a = grid[i], b = grid[i + 1];
    h[i] = b - a;
    cell[i] = integrate_w(q, WForm::Centered, *c, a, b, [](double) { return 1.0; });
    out.full(i, i) = 2.0 / h[i] * integrate_w(q, WForm::Centered, *c, a, b, [a](double t) { return t - a; });
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) out.full(i, j) = out.full(j, i) = std::sqrt(h[i] / h[j]) * cell[j];
  out.projected = detail::mean_zero_projection(out.full, grid);
  return out;
}

/// J_L f(x) = ∫_0^L q_L(min(x, t)) f(t) dt on steps over `grid` (ending at L).
inline DiscretizedJ build_JL(const AntiDerivative& qL, const ExtendedLength& L, const std::vector<double>& grid) {
  if (!L.is_finite()) throw UsageError("build_JL needs a finite length");
  detail::check_grid(grid);
  if (grid.back() != L.value()) throw UsageError("build_JL: grid must end at L");
  const int n = static_cast<int>(grid.size()) - 1;
  std::vector<double> h(n), cell(n);
  DiscretizedJ out{grid, L, 0.0, Eigen::MatrixXd::Zero(n, n), {}};
  for (int i = 0; i < n; ++i) {
    const double a = grid[i], b = grid[i + 1];
    h[i] = b - a;
    cell[i] = integrate_w(qL, WForm::Value, 0.0, a, b, [](double) { return 1.0; });
    out.full(i, i) = 2.0 / h[i] * integrate_w(qL, WForm::Value, 0.0, a, b, [b](double x) { return b - x; });
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) out.full(i, j) = out.full(j, i) = std::sqrt(h[j] / h[i]) * cell[i];
  out.projected = detail::mean_zero_projection(out.full, grid);
  return out;
}

/// Sorted (descending) absolute eigenvalues of a symmetric matrix.
inline std::vector<double> singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

struct CrossvalLevel {
  int cells = 0;
  std::vector<double> j_values;   // top singular values of the step-basis operator
  std::vector<double> k_values;   // top |eigenvalues| of the Galerkin K on matched hats
  double max_rel_dev = 0.0;
  double frobenius_sq = 0.0;      // of the unprojected matrix
  double trace = 0.0;             // of the unprojected matrix
};

struct CrossvalReport {
  std::vector<CrossvalLevel> levels;
  double hs_closed_form = 0.0;     // 2∫x(q - c)² or 2∫(L - x)q²
  double trace_closed_form = 0.0;  // ∫(q - c) or ∫q
  double tol = 0.0;
  bool pass = false;
};

namespace detail {

inline double relative_deviation(const std::vector<double>& a, const std::vector<double>& b, double zero_tol = 1e-10) {
  const std::size_t m = std::min(a.size(), b.size());
  double top = 0.0;
  for (std::size_t i = 0; i < m; ++i) top = std::max({top, a[i], b[i]});
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::max(a[i], b[i]) <= zero_tol * top) continue;
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(a[i], b[i]));
  }
  return worst;
}

}  // namespace detail

/// Compares J (or P J_L P) against the Galerkin K_χ on the same nodes for each size in `ladder`.
inline CrossvalReport crossvalidate(const AntiDerivative& q, const ExtendedLength& L, const std::vector<int>& ladder,
                                    double tol, int top = 10) {
  if (ladder.empty()) throw UsageError("crossvalidate: empty grid ladder");
  GIString s;
  s.length = L;
  s.w = q;
  validate(s);
  CrossvalReport rep;
  rep.tol = tol;
  if (L.is_finite()) {
    const double Lv = L.value();
    rep.hs_closed_form = 2.0 * integrate_w(q, WForm::Square, 0.0, 0.0, Lv, [Lv](double x) { return Lv - x; });
    rep.trace_closed_form = integrate_w(q, WForm::Value, 0.0, 0.0, Lv, [](double) { return 1.0; });
  } else {
    const double c = *cesaro_mean_limit(q, L);
    rep.hs_closed_form = 2.0 * integrate_w_to_infinity(q, WForm::CenteredSquare, c, 0.0, 1);
    rep.trace_closed_form = integrate_w_to_infinity(q, WForm::Centered, c, 0.0, 0);
  }
  for (int n : ladder) {
    std::vector<double> nodes = default_nodes(s, n);
    if (L.is_finite()) nodes.push_back(L.value());
    const DiscretizedJ j = L.is_finite() ? build_JL(q, L, nodes) : build_J(q, nodes);
    const Eigen::MatrixXd& op = L.is_finite() ? j.projected : j.full;
    const WhitenedPencil wp = whiten(build_galerkin(s, nodes));
    CrossvalLevel lvl;
    lvl.cells = static_cast<int>(nodes.size()) - 1;
    lvl.j_values = singular_values(op);
    lvl.k_values = singular_values(wp.k_omega);
    if (static_cast<int>(lvl.j_values.size()) > top) lvl.j_values.resize(top);
    if (static_cast<int>(lvl.k_values.size()) > top) lvl.k_values.resize(top);
    lvl.max_rel_dev = detail::relative_deviation(lvl.j_values, lvl.k_values);
    lvl.frobenius_sq = j.full.squaredNorm();
    lvl.trace = j.full.trace();
    rep.levels.push_back(std::move(lvl));
  }
  rep.pass = rep.levels.back().max_rel_dev <= tol;
  return rep;
}

inline CrossvalReport crossvalidate(const MeasureRepr& chi, const ExtendedLength& L, const std::vector<int>& ladder,
                                    double tol, int top = 10) {
  validate(chi, L);
  return crossvalidate(anti_derivative_of_measure(chi, L), L, ladder, tol, top);
}

}  // namespace gis::intops
