#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gis/oracle.hpp"

using namespace gis;
using oracle::PointMassProblem;

namespace {

const PointMassProblem three_masses_infinite{ExtendedLength::infinite(),
                                             {{1.0, 1.0, 0.5}, {2.0, -0.5, 0.0}, {3.5, 0.7, 1.0}}};
const PointMassProblem three_masses_finite{ExtendedLength::finite(5.0),
                                           {{1.0, 1.0, 0.5}, {2.0, -0.5, 0.0}, {3.5, 0.7, 1.0}}};

/// Shooting from 0 with f(0) = 0, f'(0) = 1; f' jumps by -(zω + z²υ) f at each mass.
/// Returns f' past the last mass (half line) or f(L).
double characteristic(const PointMassProblem& p, double z) {
  double f = 0.0, df = 1.0, x = 0.0;
  for (const auto& m : p.masses) {
    f += df * (m.position - x);
    x = m.position;
    df -= (z * m.omega_weight + z * z * m.upsilon_weight) * f;
  }
  if (p.length.is_finite()) return f + df * (p.length.value() - x);
  return df;
}

/// Newton step size relative to |z|: small when z is a simple root of the characteristic.
double relative_root_error(const PointMassProblem& p, double z) {
  const double dz = 1e-6 * std::abs(z);
  const double slope = (characteristic(p, z + dz) - characteristic(p, z - dz)) / (2.0 * dz);
  return std::abs(characteristic(p, z) / slope) / std::abs(z);
}

}  // namespace

TEST(Oracle, FrozenThreeMassHalfLine) {
  const std::vector<double> frozen{-4.1798939378278375, -2.3505476374746368, -0.85762123862890249,
                                   0.30007390740695616, 1.0546555731910949};
  const auto ev = oracle::oracle_spectrum(three_masses_infinite);
  ASSERT_EQ(ev.size(), frozen.size());
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], frozen[i], 1e-12 * std::abs(frozen[i]));
}

TEST(Oracle, FrozenThreeMassFiniteInterval) {
  const std::vector<double> frozen{-4.1815010422843022, -2.3780103032852384, -1.2278146422594101,
                                   0.67436378190607138, 1.0796288725895549};
  const auto ev = oracle::oracle_spectrum(three_masses_finite);
  ASSERT_EQ(ev.size(), frozen.size());
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], frozen[i], 1e-12 * std::abs(frozen[i]));
}

TEST(Oracle, SingleMass) {
  for (double m : {0.3, 1.0, 4.0})
    for (double a : {0.5, 2.0}) {
      const auto ev = oracle::oracle_spectrum({ExtendedLength::infinite(), {{a, m, 0.0}}});
      ASSERT_EQ(ev.size(), 1u);
      EXPECT_NEAR(ev[0], 1.0 / (m * a), 1e-13);
    }
}

TEST(Oracle, SingleUpsilonAtom) {
  const double u = 2.0, x = 0.5;
  const auto ev = oracle::oracle_spectrum({ExtendedLength::infinite(), {{x, 0.0, u}}});
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0], -1.0 / std::sqrt(u * x), 1e-13);
  EXPECT_NEAR(ev[1], 1.0 / std::sqrt(u * x), 1e-13);
}

TEST(Oracle, RootsOfTheTransferCharacteristic) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gap(0.2, 1.5), weight(0.2, 2.0), coin(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    PointMassProblem p;
    double x = 0.0;
    const int n = 1 + trial % 7;
    for (int k = 0; k < n; ++k) {
      x += gap(rng);
      p.masses.push_back({x, (coin(rng) < 0.5 ? -1.0 : 1.0) * weight(rng), coin(rng) < 0.4 ? weight(rng) : 0.0});
    }
    p.length = trial % 2 ? ExtendedLength::finite(x + gap(rng)) : ExtendedLength::infinite();
    for (double z : oracle::oracle_spectrum(p))
      EXPECT_LT(relative_root_error(p, z), 1e-9) << "trial " << trial << " z " << z;
  }
}

TEST(Oracle, HilbertSchmidtIdentity) {
  // Σ 1/λ² = 2 ∫_0^∞ x (w - c)² dx for purely ω point masses on the half line
  const PointMassProblem p{ExtendedLength::infinite(), {{1.0, 1.0, 0.0}, {2.0, -0.5, 0.0}, {3.5, 0.7, 0.0}}};
  const double c = 1.2;
  // w - c = -1.2 on [0,1), -0.2 on [1,2), -0.7 on [2,3.5)
  const double rhs = 2.0 * (1.44 * 0.5 + 0.04 * 1.5 + 0.49 * (3.5 * 3.5 - 4.0) / 2.0);
  EXPECT_NEAR(oracle::oracle_trace_sums(p).inverse_square_sum, rhs, 1e-12);
}

TEST(Oracle, Validation) {
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::infinite(), {}}), DomainError);
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::infinite(), {{0.0, 1.0, 0.0}}}), DomainError);
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::infinite(), {{2.0, 1.0, 0.0}, {1.0, 1.0, 0.0}}}), DomainError);
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::finite(1.0), {{1.0, 1.0, 0.0}}}), DomainError);
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::infinite(), {{1.0, 1.0, -1.0}}}), DomainError);
  EXPECT_THROW(oracle::oracle_spectrum({ExtendedLength::infinite(), {{1.0, 0.0, 0.0}}}), DomainError);
}

TEST(Oracle, ToStringRoundTrip) {
  const GIString s = oracle::to_string(three_masses_finite);
  EXPECT_EQ(s.w.grid, (std::vector<double>{0.0, 1.0, 2.0, 3.5, 5.0}));
  EXPECT_NEAR(s.w(4.0), 1.2, 1e-15);
  EXPECT_EQ(s.upsilon.atoms.size(), 2u);
  EXPECT_EQ(oracle::positions(three_masses_finite), (std::vector<double>{0.0, 1.0, 2.0, 3.5}));
}
