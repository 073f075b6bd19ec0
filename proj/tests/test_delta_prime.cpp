#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gis/delta_prime.hpp"

using namespace gis;
using namespace gis::dprime;

namespace {

DeltaPrimeProblem explicit_support(std::vector<Atom> pts) { return {ExplicitSupport{std::move(pts)}}; }

DeltaPrimeProblem generated(double a, double gamma, StrengthRule beta) { return {Generator{a, gamma, beta}}; }

}  // namespace

TEST(DpString, NoInteractionsGivesIdentity) {
  const GIString s = dp_string(explicit_support({}));
  for (double x : {0.0, 0.5, 7.0}) EXPECT_DOUBLE_EQ(s.w(x), x);
  EXPECT_TRUE(std::holds_alternative<PolynomialTail>(s.w.tail));
}

TEST(DpString, SingleInteraction) {
  const GIString s = dp_string(explicit_support({{1.0, 2.0}}));
  EXPECT_DOUBLE_EQ(s.w(0.5), 0.5);
  EXPECT_DOUBLE_EQ(s.w(1.5), 3.5);
  EXPECT_DOUBLE_EQ(s.w(10.0), 12.0);
}

TEST(DpString, PartialSums) {
  const GIString s = dp_string(explicit_support({{1.0, 1.0}, {2.0, -1.0}, {3.0, 3.0}}));
  const std::vector<double> probes{0.5, 1.5, 2.5, 3.5}, q{0.0, 1.0, 0.0, 3.0};
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_DOUBLE_EQ(s.w(probes[i]) - probes[i], q[i]);
}

TEST(DpString, JumpsEqualStrengths) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> gap(0.1, 1.0), b(-3.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Atom> pts;
    double x = 0.0;
    for (int k = 0; k < 8; ++k) pts.push_back({x += gap(rng), b(rng)});
    const GIString s = dp_string(explicit_support(pts));
    for (const auto& a : pts) EXPECT_NEAR(s.w(a.position + 1e-12) - s.w(a.position - 1e-12), a.weight, 1e-9);
  }
}

TEST(DpString, GeneratorTruncation) {
  const auto pts = points(generated(1.0, 0.5, MinusGap{}), 3.0);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_DOUBLE_EQ(pts.back().position, 3.0);
  EXPECT_DOUBLE_EQ(pts[0].weight, -1.0);
  // with β_k = -Δx_k, w = x + q returns to 0 right after each interaction
  const GIString s = dp_string(generated(1.0, 0.5, MinusGap{}), 3.0);
  for (const auto& a : pts) EXPECT_NEAR(s.w(a.position + 1e-12), 0.0, 1e-9);
}

TEST(DpValidate, Errors) {
  EXPECT_THROW(validate(explicit_support({{0.0, 1.0}})), DomainError);
  EXPECT_THROW(validate(explicit_support({{2.0, 1.0}, {1.0, 1.0}})), DomainError);
  EXPECT_THROW(validate(generated(0.0, 0.5, MinusGap{})), DomainError);
  EXPECT_THROW(dp_truncated_string(explicit_support({}), 0.0), UsageError);
}

TEST(DpClassify, CalibrationTrio) {
  const auto linear = dp_classify(generated(1.0, 1.0, ConstantStrength{0.5}));
  EXPECT_EQ(linear.zero_not_in_spectrum.value, Tri::No);
  const auto half = dp_classify(generated(1.0, 0.5, MinusGap{}));
  EXPECT_EQ(half.zero_not_in_spectrum.value, Tri::Yes);
  EXPECT_EQ(half.discrete.value, Tri::No);
  const auto third = dp_classify(generated(1.0, 1.0 / 3.0, MinusGap{}));
  EXPECT_EQ(third.zero_not_in_spectrum.value, Tri::Yes);
  EXPECT_EQ(third.discrete.value, Tri::Yes);
}

TEST(DpClassify, FirstSumAsymptoticMatchesDirectSummation) {
  // x_n Σ_{k≥n} Δx_k³ → a⁴γ³/(2 - 3γ) = 1/4 for a = 1, γ = 1/2
  const Generator g{1.0, 0.5, MinusGap{}};
  const int n = 10'000, N = 4'000'000;
  double sum = 0.0;
  for (int k = N; k >= n; --k) {
    const double d = g.position(k + 1) - g.position(k);
    sum += d * d * d;
  }
  sum += 0.25 / std::sqrt(static_cast<double>(N));
  EXPECT_NEAR(g.position(n) * sum, 0.25, 1e-3);
  const auto c = dp_classify({g});
  EXPECT_NE(c.discrete.evidence.find("0.25"), std::string::npos);
}

TEST(DpClassify, Perturbations) {
  const auto fast = dp_classify(generated(1.0, 1.0 / 3.0, MinusGap{PowerPerturbation{1.0, 2.0}}));
  EXPECT_EQ(fast.discrete.value, Tri::Yes);
  EXPECT_NEAR(*fast.c, std::numbers::pi * std::numbers::pi / 6.0, 1e-12);
  // second sum exponent 2γ + 2 - 2ρ = 0 with γ = 1/2, ρ = 3/2: limit 1/4 + 4
  const auto balanced = dp_classify(generated(1.0, 0.5, MinusGap{PowerPerturbation{1.0, 1.5}}));
  EXPECT_EQ(balanced.zero_not_in_spectrum.value, Tri::Yes);
  EXPECT_EQ(balanced.discrete.value, Tri::No);
  EXPECT_NE(balanced.discrete.evidence.find("4.25"), std::string::npos);
  const auto slow = dp_classify(generated(1.0, 0.5, MinusGap{PowerPerturbation{1.0, 1.0}}));
  EXPECT_EQ(slow.zero_not_in_spectrum.value, Tri::No);
  EXPECT_EQ(slow.c_provenance, CProvenance::Absent);
  const auto spaced = dp_classify(generated(2.0, 1.0, MinusGap{}));
  EXPECT_EQ(spaced.zero_not_in_spectrum.value, Tri::No);
  EXPECT_DOUBLE_EQ(*spaced.c, 1.0);
}

TEST(DpClassify, OutsideTheFamilyIsInconclusive) {
  const auto c = dp_classify(generated(1.0, 1.5, MinusGap{}));
  EXPECT_EQ(c.zero_not_in_spectrum.value, Tri::Inconclusive);
  EXPECT_EQ(c.discrete.value, Tri::Inconclusive);
  EXPECT_NO_THROW(check_consistency(c));
}

TEST(DpClassify, ExplicitListsMatchStringCriteria) {
  const auto p = explicit_support({{1.0, -1.0}, {2.5, 0.5}});
  const auto direct = dp_classify(p, {2.0});
  const auto via = classify(dp_string(p), {2.0});
  EXPECT_EQ(direct.zero_not_in_spectrum.value, via.zero_not_in_spectrum.value);
  EXPECT_EQ(direct.discrete.value, via.discrete.value);
  EXPECT_EQ(direct.zero_not_in_spectrum.value, Tri::No);
}

TEST(DpSpectrum, NoInteractionsIsPositive) {
  RefineOptions opt;
  opt.max_n = 512;
  opt.target_rel_tol = 1e-4;
  const Spectrum s = dp_spectrum(explicit_support({}), 2.0, opt);
  ASSERT_FALSE(s.eigenvalues.empty());
  for (double l : s.eigenvalues) EXPECT_GT(l, 0.0);
  EXPECT_NEAR(s.eigenvalues[0], std::numbers::pi * std::numbers::pi / 4.0, 1e-3);
  EXPECT_FALSE(s.notes.empty());
}

TEST(DpSpectrum, DiscreteGeneratorHasBothSigns) {
  RefineOptions opt;
  opt.max_n = 256;
  const Spectrum s = dp_spectrum(generated(1.0, 1.0 / 3.0, MinusGap{}), 3.0, opt);
  ASSERT_FALSE(s.eigenvalues.empty());
  EXPECT_LT(s.eigenvalues.front(), 0.0);
  EXPECT_GT(s.eigenvalues.back(), 0.0);
}
