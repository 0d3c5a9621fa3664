#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertime/map_core.hpp"

using namespace covertime;

TEST(MapCore, ApplyExamples) {
  EXPECT_DOUBLE_EQ(MapSystem::doubling().apply(0.75), 0.5);
  EXPECT_NEAR(MapSystem::gauss().apply(0.4), 0.5, 1e-15);
  EXPECT_NEAR(MapSystem::lsv(0.5).apply(0.25), 0.4267766953, 1e-10);
}

TEST(MapCore, BranchOfExamples) {
  EXPECT_EQ(*MapSystem::doubling().branch_of(0.5), 1u);
  EXPECT_EQ(*MapSystem::gauss().branch_of(0.3), 3u);
  EXPECT_EQ(*MapSystem::quadratic_gap().branch_of(0.61), 2u);
  EXPECT_NEAR(MapSystem::qg_a(1), 6.0 / (std::numbers::pi * std::numbers::pi), 1e-15);
  EXPECT_FALSE(MapSystem::gauss().branch_of(0.0).has_value());
  EXPECT_FALSE(MapSystem::doubling().branch_of(1.5).has_value());
}

TEST(MapCore, OutOfDomainThrows) {
  EXPECT_THROW(MapSystem::gauss().apply(0.0), OutOfDomain);
  EXPECT_THROW(MapSystem::doubling().apply(-0.1), OutOfDomain);
}

TEST(MapCore, OrbitExamples) {
  auto o = MapSystem::doubling().orbit(0.1, 3);
  ASSERT_EQ(o.size(), 4u);
  EXPECT_NEAR(o[1], 0.2, 1e-15);
  EXPECT_NEAR(o[2], 0.4, 1e-15);
  EXPECT_NEAR(o[3], 0.8, 1e-15);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (double x : MapSystem::gauss().orbit(g, 2)) EXPECT_NEAR(x, g, 1e-14);
  auto l = MapSystem::lsv(0.5).orbit(0.9, 2);
  EXPECT_NEAR(l[1], 0.8, 1e-15);
  EXPECT_NEAR(l[2], 0.6, 1e-15);
}

TEST(MapCore, PotentialSum) {
  EXPECT_NEAR(MapSystem::doubling().potential_sum(0.123, 3), -3 * std::log(2.0), 1e-14);
  EXPECT_NEAR(MapSystem::gauss().potential_sum(0.4, 1), -std::log(6.25), 1e-14);
  auto l = MapSystem::lsv(0.5);
  const double expect = -std::log(2.0) - std::log(l.derivative(2, 0.5));
  EXPECT_NEAR(l.potential_sum(0.75, 2), expect, 1e-14);
}

TEST(MapCore, InverseRoundTrip) {
  std::vector<MapSystem> maps = {MapSystem::doubling(), MapSystem::full_branched_linear({0.2, 0.3, 0.5}),
                                 MapSystem::gauss(), MapSystem::lsv(0.3), MapSystem::lsv(0.8),
                                 MapSystem::slow_bernoulli_lsv(0.5), MapSystem::quadratic_gap()};
  for (const auto& m : maps) {
    double worst = 0;
    for (int i = 1; i < 1000; ++i) {
      const double x = i / 1000.0 * 0.999;
      const auto k = m.branch_of(x);
      ASSERT_TRUE(k.has_value());
      worst = std::max(worst, std::fabs(m.inverse(*k, m.forward(*k, x)) - x));
    }
    EXPECT_LT(worst, 1e-12) << m.name();
  }
}

TEST(MapCore, BranchMonotoneAndFull) {
  auto m = MapSystem::lsv(0.4);
  for (std::size_t k = 1; k <= 2; ++k) {
    auto b = m.branch(k);
    double prev = -1;
    for (int i = 0; i < 64; ++i) {
      const double x = b.domain.lo + (b.domain.hi - b.domain.lo) * i / 64.0;
      const double y = b.forward(x);
      EXPECT_GT(y, prev);
      prev = y;
    }
  }
}

TEST(MapCore, GaussDigits) {
  // x = [0; 3, 7, 15, 1] -> first digit 3, then shift
  const double x = 1.0 / (3 + 1.0 / (7 + 1.0 / (15 + 1.0 / 2.0)));
  auto g = MapSystem::gauss();
  EXPECT_EQ(*g.branch_of(x), 3u);
  EXPECT_EQ(*g.branch_of(g.apply(x)), 7u);
  EXPECT_EQ(*g.branch_of(g.apply(g.apply(x))), 15u);
}

TEST(MapCore, ConformalitySmoke) {
  std::vector<MapSystem> maps = {MapSystem::doubling(), MapSystem::full_branched_linear({0.2, 0.3, 0.5}),
                                 MapSystem::gauss(), MapSystem::lsv(0.3), MapSystem::quadratic_gap()};
  for (const auto& m : maps) {
    for (std::size_t k = m.label_base(); k < m.label_base() + 5 && k < m.label_end(); ++k) {
      const Interval d = m.domain(k);
      double avg = 0;
      const int n = 2000;
      for (int i = 0; i < n; ++i) avg += std::exp(m.potential(d.lo + d.length() * (i + 0.5) / n));
      avg /= n;
      const Interval img = m.forward_image(k, d);
      const double ratio = d.length() / img.length() / avg;
      EXPECT_GT(ratio, 0.5) << m.name() << " " << k;
      EXPECT_LT(ratio, 2.0) << m.name() << " " << k;
    }
  }
}

TEST(MapCore, TailPreimageLength) {
  auto g = MapSystem::gauss();
  const Interval b{0.25, 0.5};
  double direct = 0;
  for (std::size_t k = 10; k < 2000000; ++k) direct += g.inverse_image(k, b).length();
  EXPECT_NEAR(g.tail_preimage_length(10, b), direct, 1e-6);
  auto q = MapSystem::quadratic_gap();
  double d2 = 0;
  for (std::size_t k = 5; k < 2000000; ++k) d2 += q.inverse_image(k, b).length();
  EXPECT_NEAR(q.tail_preimage_length(5, b), d2, 1e-6);
}

TEST(MapCore, MaxCylinderDiameter) {
  auto g = MapSystem::gauss();
  EXPECT_NEAR(g.max_cylinder_diameter(1), 0.5, 1e-15);
  EXPECT_NEAR(g.max_cylinder_diameter(2), 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(MapSystem::doubling().max_cylinder_diameter(5), 1.0 / 32);
}
