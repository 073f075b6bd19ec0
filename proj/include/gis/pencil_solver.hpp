#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gis/discretization.hpp"

namespace gis {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  double mu_cut = 0.0;
  int model_size = 0;
  bool converged = true;
  std::vector<int> grid_sizes;       // refinement history (basis sizes)
  std::vector<double> deltas;        // per leading eigenvalue, relative change between the last two grids
  std::vector<std::string> notes;
  bool operator==(const Spectrum&) const = default;
};

inline double default_mu_cut(double block_norm) {
  return 1e3 * std::numeric_limits<double>::epsilon() * block_norm;
}

inline Spectrum solve_model(const GalerkinModel& g, std::optional<double> mu_cut = std::nullopt) {
  const WhitenedPencil w = whiten(g);
  Spectrum out;
  out.model_size = g.size();
  if (w.block.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.block, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const Eigen::VectorXd& mu = es.eigenvalues();
  const double norm = mu.cwiseAbs().maxCoeff();
  out.mu_cut = mu_cut.value_or(default_mu_cut(norm));
  for (int i = 0; i < mu.size(); ++i)
    if (std::abs(mu(i)) > out.mu_cut) out.eigenvalues.push_back(1.0 / mu(i));
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

inline Spectrum solve_spectrum(const GIString& s, const std::vector<double>& nodes,
                               std::optional<double> mu_cut = std::nullopt) {
  return solve_model(build_galerkin(s, nodes), mu_cut);
}

/// Quadratic pencil A f = z B f + z² C f through the companion form
/// z [[B, C], [I, 0]] u = [[A, 0], [0, I]] u. Cross-check only.
inline Spectrum solve_pencil_qep(const GalerkinModel& g, std::optional<double> mu_cut = std::nullopt,
                                 double imag_tol = 1e-8) {
  const int n = g.size();
  Spectrum out;
  out.model_size = n;
  if (n == 0) return out;
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  lhs.topLeftCorner(n, n) = g.omega_form.dense();
  lhs.topRightCorner(n, n) = g.upsilon_form.dense();
  lhs.bottomLeftCorner(n, n).setIdentity();
  rhs.topLeftCorner(n, n) = g.stiffness.dense();
  rhs.bottomRightCorner(n, n).setIdentity();
  // lhs u = mu rhs u with mu = 1/z
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(lhs, rhs, false);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  std::vector<std::complex<double>> mus;
  double norm = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    if (ges.betas()(i) == 0.0) continue;
    const std::complex<double> mu = ges.alphas()(i) / ges.betas()(i);
    mus.push_back(mu);
    norm = std::max(norm, std::abs(mu));
  }
  out.mu_cut = mu_cut.value_or(std::sqrt(std::numeric_limits<double>::epsilon()) * norm);
  for (const auto& mu : mus) {
    if (std::abs(mu) <= out.mu_cut) continue;
    const std::complex<double> z = 1.0 / mu;
    if (std::abs(z.imag()) > imag_tol * std::abs(z))
      throw NumericalError("pencil eigenvalue with significant imaginary part");
    out.eigenvalues.push_back(z.real());
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

namespace detail {

inline std::vector<double> leading(std::vector<double> ev, std::size_t k) {
  std::stable_sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (ev.size() > k) ev.resize(k);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace detail

struct RefineOptions {
  double target_rel_tol = 1e-6;
  int k_leading = 5;
  int start_n = 16;
  int max_n = 2048;
};

/// Doubles the default grid until the k leading eigenvalues (smallest |λ|,
/// compared in ascending order) move by less than the target; flags non-convergence at the size cap.
inline Spectrum refine_until(const GIString& s, const RefineOptions& opt) {
  if (!(opt.target_rel_tol > 0.0)) throw UsageError("refine_until: tolerance must be positive");
  if (opt.k_leading < 1 || opt.start_n < 1) throw UsageError("refine_until: invalid options");
  std::vector<int> history;
  std::optional<Spectrum> prev;
  for (int n = std::min(opt.start_n, opt.max_n); n <= opt.max_n; n *= 2) {
    Spectrum cur = solve_spectrum(s, default_nodes(s, n));
    history.push_back(cur.model_size);
    if (prev) {
      const auto a = detail::leading(prev->eigenvalues, opt.k_leading);
      const auto b = detail::leading(cur.eigenvalues, opt.k_leading);
      const std::size_t m = std::min(a.size(), b.size());
      std::vector<double> deltas;
      double worst = (a.size() == b.size()) ? 0.0 : std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double d = std::abs(b[i] - a[i]) / std::abs(b[i]);
        deltas.push_back(d);
        worst = std::max(worst, d);
      }
      cur.deltas = deltas;
      cur.grid_sizes = history;
      if (worst < opt.target_rel_tol) {
        cur.converged = true;
        return cur;
      }
    }
    prev = std::move(cur);
  }
  if (!prev) throw UsageError("refine_until: size cap below the starting grid");
  prev->grid_sizes = history;
  prev->converged = false;
  prev->notes.push_back("size cap reached before the leading eigenvalues settled");
  return *prev;
}

}  // namespace gis
