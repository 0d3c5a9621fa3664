#include <gtest/gtest.h>

#include <cmath>

#include "covertime/montecarlo.hpp"
#include "covertime/oracles.hpp"

using namespace covertime;

TEST(MonteCarlo, CellIndex) {
  auto t = uniform_bins(0.25);
  ASSERT_EQ(t.cells.size(), 4u);
  EXPECT_EQ(t.index.locate(0.0), 0);
  EXPECT_EQ(t.index.locate(0.25), 1);
  EXPECT_EQ(t.index.locate(1.0), 3);
  EXPECT_EQ(t.index.locate(1.5), -1);
  auto u = CellIndex::from_cells({{0.2, 0.4}});
  EXPECT_EQ(u.locate(0.1), -1);
  EXPECT_EQ(u.locate(0.3), 0);
  EXPECT_EQ(u.locate(0.4), -1);
  auto r = uniform_bins(0.3);
  ASSERT_EQ(r.cells.size(), 4u);
  for (auto& c : r.cells) {
    EXPECT_GE(c.length(), 0.25 - 1e-15);
    EXPECT_LE(c.length(), 0.3);
  }
}

TEST(MonteCarlo, HandOrbitCover) {
  auto d = MapSystem::doubling();
  auto t = uniform_bins(0.5);
  FloatTrajectory f(d, 1.0 / 3.0);
  EXPECT_EQ(cover_run(f, t.index, 100).value, 1u);
  auto single = cells_target({{0.0, 1.0}}, 1.0, 1.0 / 3, 1.0);
  for (auto sys : {MapSystem::doubling(), MapSystem::gauss()}) {
    auto m = default_measure(sys);
    EXPECT_EQ(cover_time_trial(sys, m, single, 5, 10).value, 0u);
  }
}

TEST(MonteCarlo, SymbolicTrajectoryMatchesShift) {
  auto d = MapSystem::doubling();
  auto m = default_symbolic_measure(d);
  SymbolicTrajectory t(d, m, make_rng(3), Word{1, 0, 1});
  const double x0 = t.point();
  EXPECT_GE(x0, 0.625);
  EXPECT_LE(x0, 0.75);
  t.step();
  EXPECT_NEAR(t.point(), 2 * x0 - 1, 1e-12);
}

TEST(MonteCarlo, CoverSixteenBinsAgainstDp) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto e = cover_ensemble(d, m, uniform_bins(1.0 / 16), 4000, 17, 1000000);
  const double exact = oracle::cover_time_dp(4);
  EXPECT_FALSE(e.lower_bound);
  EXPECT_NEAR(e.mean, exact, 4 * std::sqrt(e.variance / 4000));
  EXPECT_GT(e.mean, 16 * std::log(16.0) / 3);
  EXPECT_LT(e.mean, 3 * 16 * std::log(16.0));
}

TEST(MonteCarlo, HittingDoubling) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto e = hitting_ensemble(d, m, {0.0, 0.5}, 20000, 9, 1000);
  EXPECT_NEAR(e.mean, 2.0, 0.05);
  auto e3 = hitting_ensemble(d, m, {0.0, 0.125}, 20000, 10, 100000);
  const double exact = oracle::absorbing_hitting_time(oracle::dyadic_hole(0, 0.125, 3), 3);
  EXPECT_NEAR(e3.mean, exact, 0.15 * exact);
}

TEST(MonteCarlo, ReturnSurvivalDoubling) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto c = return_survival(d, m, {0.0, 0.5}, 6, 20000, 4);
  const auto ex = oracle::return_survival(oracle::dyadic_hole(0, 0.5, 1), 1, 6);
  EXPECT_DOUBLE_EQ(c.survival[0], 1.0);
  for (std::size_t n = 1; n <= 6; ++n) {
    EXPECT_LE(c.survival[n - 1], 1.0);
    EXPECT_LE(c.wilson_lo[n - 1], ex[n - 1]);
    EXPECT_GE(c.wilson_hi[n - 1], ex[n - 1]);
  }
}

TEST(MonteCarlo, KacOnDyadicHoles) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  for (unsigned k = 1; k <= 6; ++k) {
    const double w = std::ldexp(1.0, -static_cast<int>(k));
    auto e = return_ensemble(d, m, {0.0, w}, 20000, 100 + k, 100000000);
    EXPECT_GE(e.mean * w, 0.8) << k;
    EXPECT_LE(e.mean * w, 1.25) << k;
  }
}

TEST(MonteCarlo, RejectionPathForNonCylinderHole) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  const Interval u{0.3, 0.45};
  EXPECT_FALSE(cylinder_tiling(d, u).has_value());
  auto e = return_ensemble(d, m, u, 20000, 8, 100000);
  EXPECT_NEAR(e.mean * 0.15, 1.0, 0.05);
}

TEST(MonteCarlo, GaussConditionedStart) {
  auto g = MapSystem::gauss();
  auto m = default_measure(g);
  auto e = return_ensemble(g, m, {0.5, 1.0}, 20000, 2, 100000);
  EXPECT_NEAR(e.mean * m.mass(0.5, 1.0), 1.0, 0.05);
}

TEST(MonteCarlo, Determinism) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto t = uniform_bins(1.0 / 32);
  auto a = cover_ensemble(d, m, t, 64, 77, 1000000, 1);
  auto b = cover_ensemble(d, m, t, 64, 77, 1000000, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(MonteCarlo, MatthewsSmall) {
  EXPECT_NEAR(harmonic(4), 25.0 / 12.0, 1e-15);
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto r = matthews_check(d, m, uniform_bins(0.25), 2000, 5, 2000);
  ASSERT_EQ(r.a_sk.size(), 4u);
  EXPECT_DOUBLE_EQ(r.a_sk[0], 1.0);
  for (std::size_t k = 2; k <= 4; ++k) EXPECT_NEAR(r.a_sk[k - 1], 1.0 / k, 0.05);
  EXPECT_GT(r.ratio, 0.05);
  EXPECT_LT(r.ratio, 1.5);
}

TEST(MonteCarlo, BruteForceExamples) {
  EXPECT_EQ(brute_force_cover_time({0.0, 0.5}, 0.5), 1u);
  EXPECT_EQ(brute_force_cover_time({0.25, 0.75}, 0.25), 1u);
  EXPECT_THROW(brute_force_cover_time({0.1}, 0.05), NotCovered);
}

TEST(MonteCarlo, BracketAgainstBruteForce) {
  for (auto sys : {MapSystem::doubling(), MapSystem::gauss()}) {
    auto m = default_measure(sys);
    const double delta = 0.1;
    auto t = uniform_bins(delta);
    for (std::uint64_t s = 0; s < 20; ++s) {
      std::vector<double> orbit;
      const auto tr = with_trajectory(sys, m, s, [&](auto& traj) {
        std::vector<std::uint64_t> fv;
        auto res = cover_run(traj, t.index, 9000, &fv);
        return res;
      });
      with_trajectory(sys, m, s, [&](auto& traj) {
        for (int i = 0; i < 10000; ++i) {
          orbit.push_back(traj.point());
          traj.step();
        }
        return 0;
      });
      ASSERT_FALSE(tr.censored);
      EXPECT_LE(brute_force_cover_time(orbit, 2 * t.T * delta), tr.value) << sys.name();
      EXPECT_GE(brute_force_cover_time(orbit, t.t * delta), tr.value) << sys.name();
    }
  }
}
