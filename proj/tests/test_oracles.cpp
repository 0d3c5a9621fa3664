#include <gtest/gtest.h>

#include <cmath>

#include "covertime/oracles.hpp"

using namespace covertime;

TEST(Oracles, SurvivorLambda) {
  EXPECT_NEAR(oracle::survivor_lambda(oracle::dyadic_hole(0, 0.5, 1), 1), 0.5, 1e-14);
  EXPECT_NEAR(oracle::survivor_lambda(oracle::dyadic_hole(0, 0.25, 2), 2), (1 + std::sqrt(5.0)) / 4, 1e-12);
  // depth 3 hole in a depth 4 window gives the same value
  EXPECT_NEAR(oracle::survivor_lambda(oracle::dyadic_hole(0, 0.25, 4), 4), (1 + std::sqrt(5.0)) / 4, 1e-12);
  EXPECT_THROW(oracle::dyadic_hole(0, 0.3, 2), ConfigError);
}

TEST(Oracles, HittingTimes) {
  EXPECT_NEAR(oracle::absorbing_hitting_time(oracle::dyadic_hole(0, 0.5, 1), 1), 2.0, 1e-12);
  // waiting time for the pattern 000 from a stationary start: 2^{k+1} - 2 = 14
  // for the run of zeros, minus the stationary head start
  const double e3 = oracle::absorbing_hitting_time(oracle::dyadic_hole(0, 0.125, 3), 3);
  EXPECT_GT(e3, 8.0);
  EXPECT_LT(e3, 14.0);
}

TEST(Oracles, ReturnLaw) {
  const auto h = oracle::dyadic_hole(0, 0.5, 1);
  const auto law = oracle::return_law(h, 1, 6);
  for (std::size_t j = 1; j <= 6; ++j) EXPECT_NEAR(law[j - 1], std::ldexp(1.0, -static_cast<int>(j)), 1e-15);
  const auto s = oracle::return_survival(h, 1, 4);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[3], 0.125);
  for (unsigned j = 0; j < 6; ++j) EXPECT_NEAR(oracle::enumerated_q(h, 1, j), law[j], 1e-15);
  const auto h2 = oracle::dyadic_hole(0, 0.25, 2);
  const auto law2 = oracle::return_law(h2, 2, 8);
  for (unsigned j = 0; j < 8; ++j) EXPECT_NEAR(oracle::enumerated_q(h2, 2, j), law2[j], 1e-15);
  // Kac: mean return time is 1/mu(U)
  const auto law3 = oracle::return_law(h2, 2, 400);
  double mean = 0;
  for (std::size_t j = 1; j <= 400; ++j) mean += j * law3[j - 1];
  EXPECT_NEAR(mean, 4.0, 1e-9);
}

TEST(Oracles, CoverDp) {
  EXPECT_NEAR(oracle::cover_time_dp(1), 2.0, 1e-12);  // second bin found after Geom(1/2) steps
  const double e16 = oracle::cover_time_dp(4);
  EXPECT_GT(e16, 16 * std::log(16.0) / 3);
  EXPECT_LT(e16, 3 * 16 * std::log(16.0));
}
