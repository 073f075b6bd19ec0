#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gis/criteria.hpp"
#include "gis/discretization.hpp"
#include "gis/oracle.hpp"

using namespace gis;

TEST(SymTridiagonal, AddIsSymmetric) {
  SymTridiagonal m(3);
  m.add(0, 1, 2.0);
  m.add(2, 1, 3.0);
  m.add(1, 1, 1.0);
  const Eigen::MatrixXd d = m.dense();
  EXPECT_EQ(d(0, 1), 2.0);
  EXPECT_EQ(d(1, 0), 2.0);
  EXPECT_EQ(d(1, 2), 3.0);
  EXPECT_EQ(d(2, 1), 3.0);
  EXPECT_THROW(m.add(0, 2, 1.0), InvariantViolation);
}

TEST(Galerkin, StiffnessOfHatsOnFiniteInterval) {
  GIString s;
  s.length = ExtendedLength::finite(1.0);
  s.w.grid = {0.0, 1.0};
  s.w.segments = {{0.0}};
  s.w.tail = NoTail{};
  const GalerkinModel g = build_galerkin(s, {0.0, 0.25, 0.5, 1.0});
  ASSERT_EQ(g.size(), 2);
  EXPECT_NEAR(g.stiffness.diag(0), 8.0, 1e-14);
  EXPECT_NEAR(g.stiffness.diag(1), 6.0, 1e-14);
  EXPECT_NEAR(g.stiffness.off(0), -4.0, 1e-14);
  EXPECT_EQ(g.omega_form.dense().norm(), 0.0);
}

TEST(Galerkin, PlateauCarriesTheCesaroMean) {
  GIString s;
  s.w.tail = ConstantTail{3.0};
  const GalerkinModel g = build_galerkin(s, {0.0, 1.0});
  ASSERT_EQ(g.size(), 1);
  // ω(P²) = -∫ w (P²)' + c with w ≡ c gives 0
  EXPECT_NEAR(g.omega_form.diag(0), 0.0, 1e-14);
}

TEST(Galerkin, LebesgueMassMatrixMatchesLinearElements) {
  MeasureRepr leb;
  leb.density_grid = {0.0, 1.0};
  leb.density = {{1.0}};
  const std::vector<double> t{0.0, 0.5, 1.0};
  const SymTridiagonal via_measure = measure_form(leb, t, false);
  EXPECT_NEAR(via_measure.diag(0), 2.0 * 0.5 / 3.0, 1e-14);
  GIString s;
  s.length = ExtendedLength::finite(1.0);
  s.w = anti_derivative_of_measure(leb, s.length);
  const SymTridiagonal via_w = distribution_form(s.w, t, s.length);
  EXPECT_NEAR(via_w.diag(0), via_measure.diag(0), 1e-14);
}

TEST(Galerkin, UpsilonAtomsMustBeNodes) {
  GIString s;
  s.upsilon.atoms = {{0.5, 1.0}};
  EXPECT_THROW(build_galerkin(s, {0.0, 1.0, 2.0}), PreconditionError);
  EXPECT_NO_THROW(build_galerkin(s, {0.0, 0.5, 1.0}));
  EXPECT_THROW(build_galerkin(s, {0.1, 0.5}), PreconditionError);
}

TEST(DefaultNodes, ContainBreakpointsAndAtoms) {
  GIString s;
  s.w.grid = {0.0, 0.3, 1.7};
  s.w.segments = {{1.0}, {2.0}};
  s.upsilon.atoms = {{1.1, 1.0}};
  const auto nodes = default_nodes(s, 10);
  EXPECT_EQ(nodes.front(), 0.0);
  EXPECT_TRUE(std::is_sorted(nodes.begin(), nodes.end()));
  for (double x : {0.3, 1.7, 1.1}) EXPECT_TRUE(std::binary_search(nodes.begin(), nodes.end(), x));
}

TEST(SqrtPsd, SquaresBackAndRejectsNegative) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(5, 3);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
  const Eigen::MatrixXd m = a * a.transpose();  // rank 3
  const Eigen::MatrixXd r = sqrt_psd(m);
  EXPECT_LT((r * r - m).norm(), 1e-10 * m.norm());
  Eigen::MatrixXd neg = m;
  neg(0, 0) -= 100.0;
  EXPECT_THROW(sqrt_psd(neg), NotPsdError);
}

TEST(Whiten, BlockIsSymmetricAndReproducesOracle) {
  const oracle::PointMassProblem p{ExtendedLength::infinite(), {{1.0, 1.0, 0.5}, {2.0, -0.5, 0.0}, {3.5, 0.7, 1.0}}};
  const WhitenedPencil w = whiten(build_galerkin(oracle::to_string(p), oracle::positions(p)));
  EXPECT_LT(w.asymmetry, 1e-12);
  EXPECT_LT((w.block - w.block.transpose()).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.block);
  std::vector<double> lambdas;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) > 1e-10) lambdas.push_back(1.0 / es.eigenvalues()(i));
  std::sort(lambdas.begin(), lambdas.end());
  const auto ref = oracle::oracle_spectrum(p);
  ASSERT_EQ(lambdas.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(lambdas[i], ref[i], 1e-10 * std::abs(ref[i]));
}

TEST(Whiten, ExactSubspaceUnderRefinement) {
  // Adding extra nodes between point masses must not change the spectrum.
  const oracle::PointMassProblem p{ExtendedLength::finite(4.0), {{0.7, 2.0, 0.0}, {1.9, -1.0, 0.3}, {3.1, 0.4, 0.0}}};
  const GIString s = oracle::to_string(p);
  const auto ref = oracle::oracle_spectrum(p);
  for (int n : {8, 64}) {
    const WhitenedPencil w = whiten(build_galerkin(s, default_nodes(s, n)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.block);
    std::vector<double> lambdas;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i)) > 1e-9) lambdas.push_back(1.0 / es.eigenvalues()(i));
    std::sort(lambdas.begin(), lambdas.end());
    ASSERT_EQ(lambdas.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(lambdas[i], ref[i], 1e-9 * std::abs(ref[i]));
  }
}

TEST(Galerkin, SingleHatReferenceMatrices) {
  GIString s;
  s.length = ExtendedLength::finite(1.0);
  s.w.grid = {0.0, 1.0};
  s.w.segments = {{0.0, 1.0}};
  s.w.tail = NoTail{};
  s.upsilon.atoms = {{0.5, 1.0}};
  const GalerkinModel g = build_galerkin(s, {0.0, 0.5, 1.0});
  ASSERT_EQ(g.size(), 1);
  EXPECT_NEAR(g.stiffness.diag(0), 4.0, 1e-14);
  EXPECT_NEAR(g.omega_form.diag(0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(g.upsilon_form.diag(0), 1.0, 1e-14);
}

TEST(SqrtPsd, ReferenceCases) {
  EXPECT_LT((sqrt_psd(Eigen::Matrix3d::Identity()) - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  Eigen::Matrix2d d;
  d << 4.0, 0.0, 0.0, 0.0;
  Eigen::Matrix2d r;
  r << 2.0, 0.0, 0.0, 0.0;
  EXPECT_LT((sqrt_psd(d) - r).norm(), 1e-15);
  Eigen::Matrix2d m;
  m << 2.0, 1.0, 1.0, 2.0;
  const Eigen::MatrixXd s = sqrt_psd(m);
  EXPECT_LT((s * s - m).norm(), 1e-12);
}

TEST(Whiten, ReferenceCases) {
  GalerkinModel g;
  g.stiffness = SymTridiagonal(1);
  g.omega_form = SymTridiagonal(1);
  g.upsilon_form = SymTridiagonal(1);
  g.stiffness.diag(0) = 4.0;
  g.omega_form.diag(0) = 1.0 / 3.0;
  const WhitenedPencil a = whiten(g);
  ASSERT_EQ(a.block.rows(), 1);
  EXPECT_NEAR(a.block(0, 0), 1.0 / 12.0, 1e-15);
  g.stiffness.diag(0) = 1.0;
  g.omega_form.diag(0) = 0.0;
  g.upsilon_form.diag(0) = 2.25;
  const WhitenedPencil b = whiten(g);
  ASSERT_EQ(b.block.rows(), 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.block);
  EXPECT_NEAR(es.eigenvalues()(0), -1.5, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(1), 1.5, 1e-14);
}

namespace {

std::vector<double> random_nodes(std::mt19937_64& rng, const ExtendedLength& L) {
  std::uniform_real_distribution<double> gap(0.1, 0.6);
  std::vector<double> t{0.0};
  const double end = L.is_finite() ? L.value() : 3.0;
  while (t.back() + 0.7 < end) t.push_back(t.back() + gap(rng));
  return t;
}

}  // namespace

TEST(EnergySpace, ReproducingKernelAndGrowthEstimate) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (const ExtendedLength L : {ExtendedLength::finite(3.0), ExtendedLength::infinite()}) {
    GIString s;
    s.length = L;
    if (L.is_finite()) {
      s.w.grid = {0.0, 3.0};
      s.w.segments = {{0.0}};
      s.w.tail = NoTail{};
    }
    for (int trial = 0; trial < 10; ++trial) {
      const GalerkinModel g = build_galerkin(s, random_nodes(rng, L));
      const Eigen::MatrixXd A = g.stiffness.dense();
      const int n = g.size();
      Eigen::VectorXd f(n);
      for (int i = 0; i < n; ++i) f(i) = n01(rng);
      const double energy = f.dot(A * f);
      for (int i = 0; i < n; ++i) {
        const double x = g.nodes[i + 1];
        Eigen::VectorXd k(n);
        for (int j = 0; j < n; ++j) k(j) = kernel_delta(x, g.nodes[j + 1], L);
        EXPECT_NEAR(f.dot(A * k), f(i), 1e-12 * (1.0 + std::abs(f(i))));
        EXPECT_LE(f(i) * f(i), kernel_delta(x, x, L) * energy * (1.0 + 1e-12));
      }
    }
  }
}

TEST(Galerkin, MeasureAndAntiDerivativePathsAgree) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(0.1, 2.8), val(0.1, 2.0);
  for (const ExtendedLength L : {ExtendedLength::finite(3.0), ExtendedLength::infinite()}) {
    for (int trial = 0; trial < 10; ++trial) {
      KreinString k;
      k.length = L;
      std::vector<double> xs{pos(rng), pos(rng), pos(rng)};
      std::sort(xs.begin(), xs.end());
      for (double x : xs) k.omega.atoms.push_back({x, val(rng)});
      k.omega.density_grid = {0.0, 1.2, 2.9};
      k.omega.density = {{val(rng)}, {val(rng)}};
      const GIString s = k.to_gis();
      const auto t = detail::normalized_nodes(default_nodes(s, 24), L);
      const Eigen::MatrixXd a = measure_form(k.omega, t, !L.is_finite()).dense();
      const Eigen::MatrixXd b = distribution_form(s.w, t, L).dense();
      EXPECT_LT((a - b).norm(), 1e-12 * a.norm());
      EXPECT_LE(whiten(build_galerkin(s, t)).asymmetry, 1e-13);
    }
  }
}
