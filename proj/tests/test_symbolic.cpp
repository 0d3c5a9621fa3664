#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertime/symbolic.hpp"

using namespace covertime;

TEST(Symbolic, ProjectExamples) {
  auto d = MapSystem::doubling();
  auto j = project(d, {0, 1});
  EXPECT_DOUBLE_EQ(j.lo, 0.25);
  EXPECT_DOUBLE_EQ(j.hi, 0.5);
  auto g = MapSystem::gauss();
  auto z1 = project(g, {1});
  EXPECT_DOUBLE_EQ(z1.lo, 0.5);
  EXPECT_DOUBLE_EQ(z1.hi, 1.0);
  // f_2^{-1}(y) = 1/(2+y) maps [1/2, 1] onto [1/3, 2/5]
  auto z21 = project(g, {2, 1});
  EXPECT_NEAR(z21.lo, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(z21.hi, 0.4, 1e-15);
  EXPECT_THROW(project(d, {0, 2}), Inadmissible);
  EXPECT_THROW(project(d, Word(65, 0)), DepthExceeded);
}

TEST(Symbolic, CylinderMeasureExamples) {
  auto d = MapSystem::doubling();
  EXPECT_DOUBLE_EQ(cylinder_measure(d, default_symbolic_measure(d), {0, 1}), 0.25);
  auto s = MapSystem::slow_bernoulli_lsv(0.5);
  EXPECT_DOUBLE_EQ(cylinder_measure(s, default_symbolic_measure(s), {1, 1, 1}), 0.125);
  auto g = MapSystem::gauss();
  EXPECT_NEAR(cylinder_measure(g, default_symbolic_measure(g), {1}), std::log(4.0 / 3.0) / std::log(2.0),
              1e-14);
  EXPECT_NEAR(cylinder_measure(g, default_symbolic_measure(g), {1}), 0.41504, 1e-5);
}

TEST(Symbolic, AdditiveOverExtensions) {
  for (auto sys : {MapSystem::slow_bernoulli_lsv(0.5), MapSystem::quadratic_gap(), MapSystem::gauss()}) {
    auto m = default_symbolic_measure(sys);
    Word w = {sys.label_base(), sys.label_base() + 1};
    const double parent = cylinder_measure(sys, m, w);
    double sum = 0;
    const std::size_t cap = sys.countable() ? 200000 : sys.label_end();
    Word c = w;
    c.push_back(0);
    for (std::size_t k = sys.label_base(); k < cap; ++k) {
      c.back() = k;
      const double mu = cylinder_measure(sys, m, c);
      EXPECT_LE(mu, parent + 1e-15);
      sum += mu;
    }
    EXPECT_NEAR(sum, parent, 1e-5 * parent) << sys.name();
  }
}

TEST(Symbolic, ShiftEquivariance) {
  auto d = MapSystem::doubling();
  Word w = {1, 0, 1, 1, 0};
  auto j = project(d, w);
  auto js = project(d, Word(w.begin() + 1, w.end()));
  EXPECT_NEAR(d.forward(1, j.lo), js.lo, 1e-10);
  EXPECT_NEAR(d.forward(1, j.hi), js.hi, 1e-10);
}

TEST(Symbolic, SymbolStreams) {
  auto m = bernoulli_measure(0, {0.5, 0.5});
  EXPECT_EQ(sample_symbol_stream(m, 42, 8), sample_symbol_stream(m, 42, 8));
  auto deg = bernoulli_measure(0, {1.0, 0.0});
  for (auto s : sample_symbol_stream(deg, 9, 100)) EXPECT_EQ(s, 0u);
  auto geo = geometric_measure(1);
  const std::size_t n = 1000000;
  auto w = sample_symbol_stream(geo, 3, n);
  std::vector<double> count(12, 0);
  for (auto s : w)
    if (s < 12) count[s] += 1;
  for (std::size_t k = 1; k < 12; ++k) {
    const double p = std::ldexp(1.0, -static_cast<int>(k));
    EXPECT_NEAR(count[k] / n, p, 3 * std::sqrt(p * (1 - p) / n)) << k;
  }
  EXPECT_THROW(sample_symbol_stream(gauss_measure_symbolic(), 1, 3), Unsupported);
}

TEST(Symbolic, IntervalMeasureBernoulli) {
  auto s = MapSystem::slow_bernoulli_lsv(0.5);
  auto m = default_symbolic_measure(s);
  EXPECT_NEAR(interval_measure(s, m, project(s, {1, 2, 1})), 0.125, 1e-15);
  EXPECT_NEAR(interval_measure(s, m, {0.0, 1.0}), 1.0, 1e-15);
  // additivity over a split point
  const double a = interval_measure(s, m, {0.1, 0.37});
  const double b = interval_measure(s, m, {0.37, 0.8});
  EXPECT_NEAR(a + b, interval_measure(s, m, {0.1, 0.8}), 1e-14);
  auto q = MapSystem::quadratic_gap();
  auto g = default_symbolic_measure(q);
  EXPECT_NEAR(interval_measure(q, g, {MapSystem::qg_a(3), 1.0}), 0.125, 1e-15);
  EXPECT_NEAR(interval_measure(q, g, q.domain(2)), 0.25, 1e-15);
}

TEST(Symbolic, ApproxDyadicCylinder) {
  auto d = MapSystem::doubling();
  auto m = default_symbolic_measure(d);
  auto r = approximate_interval_by_cylinders(d, m, {0.25, 0.5}, 0.1);
  ASSERT_EQ(r.inner.size(), 1u);
  EXPECT_EQ(r.inner[0], (Word{0, 1}));
  EXPECT_EQ(r.outer, r.inner);
}

TEST(Symbolic, ApproxDyadicInterval) {
  auto d = MapSystem::doubling();
  auto m = default_symbolic_measure(d);
  auto r = approximate_interval_by_cylinders(d, m, {0.2, 0.5}, 0.5);
  EXPECT_NE(std::find(r.inner.begin(), r.inner.end(), Word{0, 1}), r.inner.end());
  EXPECT_GE(r.inner_measure, 0.5 * 0.3);
  EXPECT_LE(r.outer_measure, 1.5 * 0.3);
  double lo = 1;
  for (auto& w : r.outer) lo = std::min(lo, project(d, w).lo);
  EXPECT_LE(lo, 0.2);
}

TEST(Symbolic, ApproxGauss) {
  auto g = MapSystem::gauss();
  auto m = default_symbolic_measure(g);
  const Interval u{0.45, 0.55};
  auto r = approximate_interval_by_cylinders(g, m, u, 0.25);
  const double mu = m.interval_mass(u.lo, u.hi);
  double inner = 0;
  for (auto& w : r.inner) {
    auto j = project(g, w);
    EXPECT_GE(j.lo, u.lo - 1e-12);
    EXPECT_LE(j.hi, u.hi + 1e-12);
    inner += m.interval_mass(j.lo, j.hi);
  }
  double outer = r.outer_tail_mass;
  for (auto& w : r.outer) {
    auto j = project(g, w);
    outer += m.interval_mass(j.lo, j.hi);
  }
  EXPECT_GE(inner, 0.75 * mu);
  EXPECT_LE(outer, 1.25 * mu);
}

TEST(Symbolic, QuasiBernoulli) {
  auto d = MapSystem::doubling();
  EXPECT_EQ(estimate_quasi_bernoulli_constant(d, default_symbolic_measure(d), 4, 100), 1.0);
  auto g = MapSystem::gauss();
  const double c = estimate_quasi_bernoulli_constant(g, default_symbolic_measure(g), 3, 1000);
  EXPECT_GE(c, 1.0);
  EXPECT_LE(c, 4.0);
  auto f = MapSystem::full_branched_linear({0.9, 0.1});
  EXPECT_EQ(estimate_quasi_bernoulli_constant(f, default_symbolic_measure(f), 5, 100), 1.0);
}

TEST(Symbolic, AdjacentRatios) {
  auto d = MapSystem::doubling();
  EXPECT_DOUBLE_EQ(adjacent_cylinder_ratio_check(d, default_symbolic_measure(d), 4, 0, 1), 1.0);
  auto g = MapSystem::gauss();
  EXPECT_LE(adjacent_cylinder_ratio_check(g, default_symbolic_measure(g), 1, 1, 50), 3.0);
  auto q = MapSystem::quadratic_gap();
  EXPECT_NEAR(adjacent_cylinder_ratio_check(q, default_symbolic_measure(q), 1, 1, 30), 2.0, 1e-12);
}
