#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gis/coefficients.hpp"

/// Exact spectra of strings made of finitely many point masses.
namespace gis::oracle {

struct PointMass {
  double position = 0.0;
  double omega_weight = 0.0;
  double upsilon_weight = 0.0;
};

struct PointMassProblem {
  ExtendedLength length = ExtendedLength::infinite();
  std::vector<PointMass> masses;
};

inline void validate(const PointMassProblem& p) {
  if (p.masses.empty()) throw DomainError("point-mass problem needs at least one mass");
  double prev = 0.0;
  for (const auto& m : p.masses) {
    if (!(m.position > prev)) throw DomainError("positions must be positive and strictly increasing");
    if (!(m.position < p.length.end())) throw DomainError("positions must lie inside (0, L)");
    if (m.upsilon_weight < 0.0) throw DomainError("upsilon weights must be nonnegative");
    if (m.omega_weight == 0.0 && m.upsilon_weight == 0.0) throw DomainError("a mass with no weight at all");
    prev = m.position;
  }
}

/// Eigenvalues of K v = λ W v + λ² U v on the exact N-dimensional solution space.
inline std::vector<double> oracle_spectrum(const PointMassProblem& p) {
  validate(p);
  const int N = static_cast<int>(p.masses.size());
  // nodal values f(x_k) parametrize piecewise linear functions; energy = sum (Δf)²/Δx
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  double left = 0.0;
  for (int k = 0; k < N; ++k) {
    const double h = p.masses[k].position - left;
    K(k, k) += 1.0 / h;
    if (k > 0) {
      K(k - 1, k - 1) += 1.0 / h;
      K(k - 1, k) -= 1.0 / h;
      K(k, k - 1) -= 1.0 / h;
    }
    left = p.masses[k].position;
  }
  if (p.length.is_finite()) K(N - 1, N - 1) += 1.0 / (p.length.value() - left);

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw InvariantViolation("oracle stiffness matrix is not positive definite");
  const Eigen::MatrixXd R = llt.matrixL();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(N, N));

  std::vector<int> charged;
  for (int k = 0; k < N; ++k)
    if (p.masses[k].upsilon_weight > 0.0) charged.push_back(k);
  const int r = static_cast<int>(charged.size());

  Eigen::VectorXd wdiag(N);
  for (int k = 0; k < N; ++k) wdiag(k) = p.masses[k].omega_weight;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + r, N + r);
  M.topLeftCorner(N, N) = Rinv * wdiag.asDiagonal() * Rinv.transpose();
  for (int j = 0; j < r; ++j) {
    const int k = charged[j];
    const Eigen::VectorXd col = Rinv.col(k) * std::sqrt(p.masses[k].upsilon_weight);
    M.block(0, N + j, N, 1) = col;
    M.block(N + j, 0, 1, N) = col.transpose();
  }
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < M.rows(); ++i) out.push_back(1.0 / es.eigenvalues()(i));
  std::sort(out.begin(), out.end());
  return out;
}

struct TraceSums {
  double inverse_sum = 0.0;          // Σ 1/λ
  double inverse_square_sum = 0.0;   // Σ 1/λ²
};

inline TraceSums oracle_trace_sums(const PointMassProblem& p) {
  TraceSums t;
  for (double l : oracle_spectrum(p)) {
    t.inverse_sum += 1.0 / l;
    t.inverse_square_sum += 1.0 / (l * l);
  }
  return t;
}

/// The same problem as a string: w piecewise constant with jumps w_k, υ atomic.
inline GIString to_string(const PointMassProblem& p) {
  validate(p);
  GIString s;
  s.length = p.length;
  s.w.grid = {0.0};
  double running = 0.0;
  s.w.segments.clear();
  for (const auto& m : p.masses) {
    s.w.segments.push_back({running});
    s.w.grid.push_back(m.position);
    running += m.omega_weight;
    if (m.upsilon_weight > 0.0) s.upsilon.atoms.push_back({m.position, m.upsilon_weight});
  }
  if (p.length.is_finite()) {
    s.w.segments.push_back({running});
    s.w.grid.push_back(p.length.value());
    s.w.tail = NoTail{};
  } else {
    s.w.tail = ConstantTail{running};
  }
  return s;
}

inline std::vector<double> positions(const PointMassProblem& p) {
  std::vector<double> nodes{0.0};
  for (const auto& m : p.masses) nodes.push_back(m.position);
  return nodes;
}

}  // namespace gis::oracle
