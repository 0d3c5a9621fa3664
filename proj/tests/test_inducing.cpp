#include <gtest/gtest.h>

#include <cmath>

#include "covertime/inducing.hpp"

using namespace covertime;

TEST(Inducing, FirstReturnExamples) {
  const auto sys = MapSystem::lsv(0.3);
  const auto r = first_return(sys, {0.5, 1.0}, 0.9);
  EXPECT_EQ(r.time, 1u);
  EXPECT_NEAR(r.landing, 0.8, 1e-15);
  EXPECT_GE(first_return(sys, {0.5, 1.0}, 0.6).time, 2u);
  EXPECT_THROW(first_return(sys, {0.5, 1.0}, 0.2), OutOfDomain);
}

TEST(Inducing, BranchesTileAndMatchIterates) {
  const auto sys = MapSystem::lsv(0.4);
  const auto ind = make_induced(sys, 3, 1000000);
  const auto br = ind.branches(200);
  EXPECT_NEAR(br[0].domain.lo, 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(br[0].domain.hi, 1.0);
  for (std::size_t i = 1; i < br.size(); ++i) {
    EXPECT_NEAR(br[i].domain.hi, br[i - 1].domain.lo, 1e-15);
    const double mid = br[i].domain.mid();
    const auto r = first_return(sys, ind.y, mid);
    EXPECT_EQ(r.time, br[i].r);
    double x = mid;
    for (std::uint64_t k = 0; k < br[i].r; ++k) x = sys.apply(x);
    EXPECT_NEAR(r.landing, x, 1e-9);
  }
  EXPECT_LT(ind.tail_mass, 1e-6);
}

TEST(Inducing, KacTwoEstimators) {
  const auto ind = make_induced(MapSystem::lsv(0.5), 5, 4000000);
  const auto k = kac_check(ind, 100000, 11, 4);
  EXPECT_LT(k.gap, 0.05) << k.mean_return << " * " << k.mu_y_mass;
  EXPECT_NEAR(kac_branch_sum(ind, 100000) * ind.mu_y_mass, 1.0, 0.05);
}

TEST(Inducing, TailDecreases) {
  const auto ind = make_induced(MapSystem::lsv(0.4), 7, 1000000);
  const auto t = return_tail(ind, 1000, 100000, 2, 4);
  EXPECT_LT(t.survival[0], 1.0);
  for (std::size_t i = 1; i < t.survival.size(); ++i) EXPECT_LE(t.survival[i], t.survival[i - 1]);
  EXPECT_LT(t.exponent, -1.5);
}

TEST(Inducing, InducedCoverSmall) {
  const auto ind = make_induced(MapSystem::lsv(0.3), 1, 1000000);
  EXPECT_EQ(induced_cover_time(ind, 1.0, 20, 1, 2).mean, 0.0);
  const auto e = induced_cover_time(ind, 0.25, 200, 1, 2);
  EXPECT_GT(e.mean, 1.0);
  EXPECT_LT(e.mean, 20.0);
}

TEST(Inducing, InducedCoverMonotoneInDelta) {
  const auto ind = make_induced(MapSystem::lsv(0.3), 1, 1000000);
  const auto a = induced_cover_time(ind, 1.0 / 16, 50, 9, 2);
  const auto b = induced_cover_time(ind, 1.0 / 64, 50, 9, 2);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_LE(a.values[i], b.values[i]);
}

TEST(Inducing, BridgePathwise) {
  const auto ind = make_induced(MapSystem::lsv(0.3), 1, 1000000);
  const auto r = bridge_check(ind, 1.0 / 32, 200, 4, 4);
  EXPECT_EQ(r.kappa, 0.125);
  EXPECT_TRUE(r.pathwise_ok);
  EXPECT_TRUE(r.lower_ok);
  EXPECT_TRUE(r.upper_ok);
  EXPECT_TRUE(r.mu_bound_ok);
  EXPECT_GT(r.r_estimate, 0);
}

TEST(Inducing, RejectsNonLsv) { EXPECT_THROW(make_induced(MapSystem::doubling()), Unsupported); }
