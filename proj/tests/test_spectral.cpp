#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertime/oracles.hpp"
#include "covertime/spectral.hpp"

using namespace covertime;

TEST(Spectral, DoublingResolutionTwo) {
  auto op = build_ulam(MapSystem::doubling(), 2);
  Eigen::MatrixXd d(op.matrix);
  EXPECT_NEAR(d(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(d(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(d(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(d(1, 1), 0.5, 1e-15);
}

TEST(Spectral, ColumnStochastic) {
  for (auto sys : {MapSystem::doubling(), MapSystem::gauss(), MapSystem::lsv(0.3), MapSystem::quadratic_gap(),
                   MapSystem::full_branched_linear({0.2, 0.3, 0.5})}) {
    auto op = build_ulam(sys, 256);
    for (double s : op.column_sums()) EXPECT_NEAR(s, 1.0, 1e-9) << sys.name();
  }
  auto op = build_ulam(MapSystem::doubling(), 4);
  const auto o = open_leading_pair(op, {0, 0});
  EXPECT_NEAR(o.lambda, 1.0, 1e-12);
  for (double g : o.eigfun) EXPECT_NEAR(g, 1.0, 1e-12);
}

TEST(Spectral, GaussDensity) {
  auto op = build_ulam(MapSystem::gauss(), 1024);
  const auto o = open_leading_pair(op, {0, 0});
  double err = 0;
  for (std::size_t j = 0; j < op.resolution; ++j) {
    const double x0 = op.edges[j], x1 = op.edges[j + 1];
    const double exact = (std::log1p(x1) - std::log1p(x0)) / std::numbers::ln2;
    err += std::fabs(o.mass[j] - exact);
  }
  EXPECT_LT(err, 0.01);
}

TEST(Spectral, DoublingHoles) {
  for (std::size_t r : {2, 4, 256}) {
    auto op = build_ulam(MapSystem::doubling(), r, Alignment::Dyadic);
    const auto o = open_leading_pair(op, {0.0, 0.5});
    EXPECT_NEAR(o.lambda, 0.5, 1e-10);
    EXPECT_TRUE(o.converged);
    for (std::size_t j = r / 2; j < r; ++j) EXPECT_NEAR(o.eigfun[j], o.eigfun[r - 1], 1e-9);
  }
  for (std::size_t r : {4, 64, 256}) {
    auto op = build_ulam(MapSystem::doubling(), r, Alignment::Dyadic);
    const auto o = open_leading_pair(op, {0.0, 0.25});
    EXPECT_NEAR(o.lambda, (1 + std::sqrt(5.0)) / 4, 1e-8) << r;
    EXPECT_LT(o.residual, 1e-10);
    EXPECT_NEAR(1 - o.lambda, o.hole_mass_of_eigfun, 1e-10);
  }
}

TEST(Spectral, Snapping) {
  auto op = build_ulam(MapSystem::doubling(), 8);
  Interval s;
  hole_mask(op, {0.1, 0.3}, &s);
  EXPECT_DOUBLE_EQ(s.lo, 0.0);
  EXPECT_DOUBLE_EQ(s.hi, 0.375);
}

TEST(Spectral, RatioScanDyadic) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  std::vector<Interval> holes;
  for (int k = 2; k <= 8; ++k) holes.push_back({0.0, std::ldexp(1.0, -k)});
  auto s = eig_measure_ratio_scan(d, m, holes, 256);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    EXPECT_GE(s.rows[i].ratio, 0.2);
    EXPECT_LE(s.rows[i].ratio, 3.0);
    const unsigned k = static_cast<unsigned>(i + 2);
    EXPECT_NEAR(s.rows[i].lambda, oracle::survivor_lambda(oracle::dyadic_hole(0, std::ldexp(1.0, -static_cast<int>(k)), k), k),
                1e-9);
    if (i > 0) EXPECT_LT(s.rows[i].ratio, s.rows[i - 1].ratio);
  }
  auto h = eig_measure_ratio_scan(d, m, {{0.0, 0.5}}, 2);
  EXPECT_NEAR(h.rows[0].ratio, 1.0, 1e-12);
}

TEST(Spectral, PerturbationBound) {
  auto op = build_ulam(MapSystem::gauss(), 128);
  const Interval u{0.25, 0.5};
  const auto mask = hole_mask(op, u);
  Rng g = make_rng(4);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd psi(128), a, b;
    for (int j = 0; j < 128; ++j) psi[j] = (2 * uniform01(g) - 1) * op.width(j);
    a = op.matrix * psi;
    masked_apply(op, mask, psi, b);
    EXPECT_LE((a - b).lpNorm<1>(), u.length() + 1e-9);
  }
}

TEST(Spectral, SurvivalVsEigenvalue) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto c = survival_vs_eigenvalue(d, m, {0.0, 0.5}, 40, 64);
  for (std::size_t n = 1; n <= 40; ++n) {
    EXPECT_NEAR(c.matrix[n - 1], std::ldexp(1.0, -static_cast<int>(n)), 1e-15);
    EXPECT_NEAR(c.matrix_ratio[n - 1], 1.0, 1e-12);
  }
  auto q = survival_vs_eigenvalue(d, m, {0.0, 0.25}, 50, 64);
  for (std::size_t n = 5; n <= 50; ++n) {
    EXPECT_GE(q.matrix_ratio[n - 1], 0.5);
    EXPECT_LE(q.matrix_ratio[n - 1], 2.0);
  }
  EXPECT_NEAR(q.matrix_ratio[49], q.matrix_ratio[29], 1e-9);
}

TEST(Spectral, GaussMatrixVsMonteCarlo) {
  auto g = MapSystem::gauss();
  auto m = default_measure(g);
  auto c = survival_vs_eigenvalue(g, m, {0.5, 1.0}, 20, 1024, 200000, 3);
  for (std::size_t n = 1; n <= 20; ++n)
    EXPECT_NEAR(c.mc[n - 1], c.matrix[n - 1], 3 * c.mc_se[n - 1] + 1e-3 * c.matrix[n - 1]) << n;
}

TEST(Spectral, KlReportFields) {
  auto d = MapSystem::doubling();
  auto m = default_measure(d);
  auto r0 = kl_identity_check(d, m, {0.0, 0.25}, 0, 64, 0, 1);
  EXPECT_DOUBLE_EQ(r0.rhs, 1.0);
  EXPECT_GE(r0.lhs, 0.2);
  EXPECT_LE(r0.lhs, 3.0);
  auto r = kl_identity_check(d, m, {0.0, 0.5}, 2, 64, 100000, 2);
  EXPECT_NEAR(r.q[0], 0.5, 0.01);
  EXPECT_NEAR(r.q[1], 0.25, 0.01);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_LT(r.escape_identity_gap, 1e-12);
}
