#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertime/measures.hpp"

using namespace covertime;

TEST(Measures, BallExamples) {
  const auto leb = lebesgue_measure();
  EXPECT_NEAR(ball_measure(leb, 0.5, 0.1), 0.2, 1e-15);
  EXPECT_NEAR(ball_measure(leb, 0.0, 0.1), 0.1, 1e-15);
  const auto g = gauss_measure();
  EXPECT_NEAR(ball_measure(g, 1.0, 0.1), std::log(2 / 1.9) / std::numbers::ln2, 1e-14);
  EXPECT_NEAR(ball_measure(g, 1.0, 0.1), 0.07400, 1e-5);
  EXPECT_THROW(ball_measure(leb, 0.5, 0.0), ConfigError);
}

TEST(Measures, MinBallExamples) {
  const auto leb = lebesgue_measure();
  auto r = min_ball_measure(leb, 0.05);
  EXPECT_NEAR(r.value, 0.05, 1e-15);
  EXPECT_EQ(r.argmin, 0.0);
  const auto g = gauss_measure();
  auto s = min_ball_measure(g, 0.05);
  EXPECT_EQ(s.argmin, 1.0);
  EXPECT_NEAR(s.value, std::log(2 / 1.95) / std::numbers::ln2, 1e-14);
  EXPECT_THROW(min_ball_measure(leb, 0.05, 0.01), ConfigError);
}

TEST(Measures, SlowLsvMinBall) {
  auto sys = MapSystem::slow_bernoulli_lsv(0.5);
  auto m = default_measure(sys);
  for (std::size_t n = 3; n <= 8; ++n) {
    const double d = project(sys, Word(n, 1)).length();
    const auto r = min_ball_measure(m, d, 0.0, support_breaks(sys));
    EXPECT_LE(r.value, std::ldexp(1.0, -static_cast<int>(n)) * (1 + 1e-9)) << n;
  }
}

TEST(Measures, MassNormalized) {
  for (auto sys : {MapSystem::doubling(), MapSystem::gauss(), MapSystem::slow_bernoulli_lsv(0.5),
                   MapSystem::quadratic_gap()}) {
    auto m = default_measure(sys);
    EXPECT_NEAR(m.mass(0, 1), 1.0, 1e-9) << sys.name();
  }
  auto l = default_measure(MapSystem::lsv(0.3), 5, 100000);
  EXPECT_DOUBLE_EQ(l.mass(0, 1), 1.0);
}

TEST(Measures, MinkowskiSlopes) {
  std::vector<double> grid;
  for (int k = 4; k <= 9; ++k) grid.push_back(std::ldexp(1.0, -k));
  const auto f = minkowski_dimension_estimate(lebesgue_measure(), grid);
  EXPECT_NEAR(f.slope, 1.0, 0.02);
  EXPECT_TRUE(f.curve.monotone);
  const auto g = minkowski_dimension_estimate(gauss_measure(), grid);
  EXPECT_NEAR(g.slope, 1.0, 0.05);
}

TEST(Measures, QuadraticGapNoFiniteFit) {
  auto sys = MapSystem::quadratic_gap();
  auto m = default_measure(sys);
  std::vector<double> grid;
  for (int n = 3; n <= 10; ++n) grid.push_back(1.0 / (std::numbers::pi * std::numbers::pi / 6 * n * n));
  const auto f = minkowski_dimension_estimate(m, grid, support_breaks(sys));
  EXPECT_TRUE(f.curve.monotone);
  EXPECT_FALSE(f.finite_fit);
  // log M / log delta keeps growing: no stabilisation
  for (std::size_t i = 1; i < f.curve.deltas.size(); ++i)
    EXPECT_GT(std::log(f.curve.values[i]) / std::log(f.curve.deltas[i]),
              std::log(f.curve.values[i - 1]) / std::log(f.curve.deltas[i - 1]));
}

TEST(Measures, EmpiricalAgreesWithAnalytic) {
  const auto g = gauss_measure();
  Rng r = make_rng(11);
  const std::size_t n = 200000;
  std::vector<double> s(n);
  for (auto& x : s) x = g.inv_cdf(uniform01(r));
  const auto e = empirical_measure(s);
  int ok = 0, total = 0;
  for (double x = 0.05; x < 1; x += 0.1)
    for (double d : {0.01, 0.05, 0.2}) {
      const double p = ball_measure(g, x, d);
      ++total;
      if (std::fabs(ball_measure(e, x, d) - p) <= 3 * std::sqrt(p * (1 - p) / n)) ++ok;
    }
  EXPECT_GE(ok, 0.95 * total);
}
