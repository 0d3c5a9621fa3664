#include <gtest/gtest.h>

#include <cmath>

#include "covertime/partitions.hpp"

using namespace covertime;

TEST(Partitions, UniformDoublingPassesAll) {
  const auto sys = MapSystem::doubling();
  const auto fam = build_uniform_family(1.0 / 32, &sys);
  ASSERT_EQ(fam.cells.size(), 32u);
  EXPECT_EQ(fam.words[5], "[0,0,1,0,1]");
  const auto cfg = prop_u_config(sys, 1);
  const auto r = verify_properties(fam, sys, default_measure(sys), cfg);
  EXPECT_TRUE(r.a && r.b && r.c && r.d && r.e);
  EXPECT_NEAR(r.measure_sum, 1.0, 1e-12);
}

TEST(Partitions, ComputedN1) {
  EXPECT_EQ(prop_u_config(MapSystem::doubling()).n1, 4u);
  EXPECT_EQ(prop_u_config(MapSystem::gauss()).n1, 5u);
  EXPECT_THROW(prop_u_config(MapSystem::lsv(0.5)), ConstantsInfeasible);
  const auto c = prop_u_config(MapSystem::doubling(), 1);
  EXPECT_GT(c.beta, 0);
  EXPECT_LT(c.beta, c.beta_tilde);
  EXPECT_LT(c.beta_tilde, c.c_m);
}

TEST(Partitions, PropUFamiliesPass) {
  for (auto sys : {MapSystem::doubling(), MapSystem::full_branched_linear({0.2, 0.3, 0.5}), MapSystem::gauss(),
                   MapSystem::quadratic_gap()}) {
    const auto cfg = prop_u_config(sys, 1);
    for (double d : {1.0 / 16, 1.0 / 64}) {
      const auto fam = build_prop_u_family(sys, cfg, d);
      const auto r = verify_properties(fam, sys, default_measure(sys), cfg);
      EXPECT_TRUE(r.a) << sys.name() << " t=" << r.worst_t << " T=" << r.worst_T;
      EXPECT_TRUE(r.b) << sys.name();
      EXPECT_TRUE(r.c) << sys.name() << " gap " << r.max_gap << " at " << r.gap_at;
      EXPECT_TRUE(r.d) << sys.name() << " " << r.d_worst << " > " << r.d_bound;
      EXPECT_TRUE(r.e) << sys.name();
    }
  }
}

TEST(Partitions, QuadraticGapRightLeftoverJoinsLeft) {
  const auto sys = MapSystem::quadratic_gap();
  const auto fam = build_prop_u_family(sys, prop_u_config(sys, 1), 0.05);
  double top = 0;
  for (const auto& u : fam.cells) top = std::max(top, u.hi);
  EXPECT_DOUBLE_EQ(top, 1.0);
  for (const auto& u : fam.cells) EXPECT_LT(u.length(), 2.5 * 0.05);
}

TEST(Partitions, OverlapNegativeControl) {
  const auto sys = MapSystem::doubling();
  auto fam = build_uniform_family(1.0 / 16, &sys);
  fam.cells[3].hi += 0.01;
  const auto r = verify_properties(fam, sys, default_measure(sys), prop_u_config(sys, 1));
  EXPECT_FALSE(r.b);
  ASSERT_TRUE(r.overlap.has_value());
  EXPECT_EQ(r.overlap->first, 3u);
  EXPECT_EQ(r.overlap->second, 4u);
}

TEST(Partitions, GapNegativeControl) {
  const auto sys = MapSystem::doubling();
  auto fam = build_uniform_family(1.0 / 16, &sys);
  fam.cells.erase(fam.cells.begin() + 7);
  fam.depths.erase(fam.depths.begin() + 7);
  const auto r = verify_properties(fam, sys, default_measure(sys), prop_u_config(sys, 1));
  EXPECT_FALSE(r.c);
  EXPECT_NEAR(r.gap_at, 7.0 / 16, 1e-15);
}

TEST(Partitions, DepthGrowsLogarithmically) {
  const auto sys = MapSystem::gauss();
  const auto cfg = prop_u_config(sys, 1);
  std::vector<HoleFamily> fams;
  for (int k = 3; k <= 6; ++k) fams.push_back(build_prop_u_family(sys, cfg, std::ldexp(1.0, -k)));
  const auto d = depth_regression(fams);
  EXPECT_GT(d.fit.slope, 0);
  EXPECT_LT(d.max_ratio, 10);
}

TEST(Partitions, PrimeFamilyDoubling) {
  const auto sys = MapSystem::doubling();
  const auto n3 = minimal_n3(sys, default_symbolic_measure(sys), 0, 1);
  EXPECT_EQ(n3, 1u);
  std::vector<double> lx, ly;
  for (int k = 6; k <= 10; ++k) {
    PropUPrimeReport rep;
    const double d = std::ldexp(1.0, -k);
    const auto fam = build_prop_u_prime_family(sys, d, 0, 1, n3, &rep);
    EXPECT_EQ(rep.candidates, std::size_t{1} << k);
    const auto c = verify_prop_u_prime(fam, sys, rep);
    EXPECT_TRUE(c.b);
    EXPECT_TRUE(c.d);
    EXPECT_TRUE(c.g);
    const auto r = verify_properties(fam, sys, default_measure(sys), prop_u_config(sys, 1), false);
    EXPECT_TRUE(r.b);
    lx.push_back(std::log(1 / d));
    ly.push_back(std::log(static_cast<double>(fam.cells.size())));
  }
  EXPECT_GT(linear_fit(lx, ly).slope, 0.3);
}

TEST(Partitions, PrimeFamilyRejectsBadLabels) {
  EXPECT_THROW(build_prop_u_prime_family(MapSystem::doubling(), 0.01, 0, 0, 1), ConfigError);
  EXPECT_THROW(build_prop_u_prime_family(MapSystem::doubling(), 1.0, 0, 1, 1), EmptyFamily);
}
