#pragma once
// The acceptance suite: one runner per criterion, each reporting pass/fail,
// a one-line detail and named metrics for the CSV.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "inducing.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "partitions.hpp"
#include "spectral.hpp"

namespace covertime::acceptance {

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;

  void metric(const std::string& k, double v) { metrics.emplace_back(k, v); }
};

// Trial counts and grids; quick shrinks both for the determinism replay.
struct Profile {
  std::uint64_t seed = 20240601;
  unsigned threads = default_threads();
  bool quick = false;
  std::size_t n(std::size_t full, std::size_t small) const { return quick ? small : full; }
};

namespace detail {

inline std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

inline std::vector<double> dyadic_grid(int from, int to) {
  std::vector<double> d;
  for (int k = from; k <= to; ++k) d.push_back(std::ldexp(1.0, -k));
  return d;
}

}  // namespace detail

inline Criterion c1_spectral_oracles(const Profile& p) {
  Criterion c{1, "exact spectral oracles"};
  const auto sys = MapSystem::doubling();
  const double phi_half = (1 + std::sqrt(5.0)) / 4;
  double e1 = 0, e2 = 0;
  for (std::size_t res : {std::size_t{4}, std::size_t{256}}) {
    const auto op = build_ulam(sys, res, Alignment::Dyadic, p.threads);
    const double l1 = open_leading_pair(op, {0.0, 0.5}).lambda;
    const double l2 = open_leading_pair(op, {0.0, 0.25}).lambda;
    e1 = std::max(e1, std::fabs(l1 - 0.5));
    e2 = std::max(e2, std::fabs(l2 - phi_half));
    c.metric("lambda_half_res" + std::to_string(res), l1);
    c.metric("lambda_quarter_res" + std::to_string(res), l2);
  }
  c.pass = e1 < 1e-10 && e2 < 1e-8;
  c.detail = "max |lambda - 0.5| = " + detail::num(e1) + ", max |lambda - (1+sqrt5)/4| = " + detail::num(e2);
  return c;
}

inline Criterion c2_eig_band(const Profile& p) {
  Criterion c{2, "eigenvalue-measure band"};
  const auto dbl = MapSystem::doubling();
  std::vector<Interval> holes;
  for (int d = 2; d <= 8; ++d) {
    const double w = std::ldexp(1.0, -d);
    const std::size_t n = std::size_t{1} << d;
    for (std::size_t j : {std::size_t{0}, std::size_t{1}, n / 3, n - 1}) holes.push_back({j * w, (j + 1) * w});
  }
  const auto s1 = eig_measure_ratio_scan(dbl, default_measure(dbl), holes, 256, p.threads, Alignment::Dyadic);
  const auto gs = MapSystem::gauss();
  std::vector<Interval> gh;
  const double gd = std::ldexp(1.0, -6);
  for (std::size_t j = 0; j < 64; j += p.quick ? 16 : 1) gh.push_back({j * gd, (j + 1) * gd});
  const auto s2 = eig_measure_ratio_scan(gs, default_measure(gs), gh, p.n(4096, 1024), p.threads);
  c.metric("doubling_min", s1.min_ratio);
  c.metric("doubling_max", s1.max_ratio);
  c.metric("gauss_min", s2.min_ratio);
  c.metric("gauss_max", s2.max_ratio);
  c.pass = s1.min_ratio >= 0.2 && s1.max_ratio <= 3 && s2.min_ratio >= 0.05 && s2.max_ratio <= 20;
  c.detail = "doubling ratios [" + detail::num(s1.min_ratio) + ", " + detail::num(s1.max_ratio) + "], Gauss [" +
             detail::num(s2.min_ratio) + ", " + detail::num(s2.max_ratio) + "]";
  return c;
}

struct DyadicHole {
  double a, b;
  unsigned k;
};

inline const std::vector<DyadicHole>& test_holes() {
  static const std::vector<DyadicHole> h = {
      {0.0, 0.5, 1}, {0.0, 0.25, 2}, {0.25, 0.5, 2}, {0.625, 0.75, 3}, {0.0, 1.0 / 64, 6}, {21.0 / 64, 22.0 / 64, 6}};
  return h;
}

inline Criterion c3_hitting(const Profile& p) {
  Criterion c{3, "hitting-time law"};
  const auto sys = MapSystem::doubling();
  const auto m = default_measure(sys);
  c.pass = true;
  double worst_rel = 0, lo = INFINITY, hi = 0;
  std::size_t i = 0;
  for (const auto& h : test_holes()) {
    const auto hole = oracle::dyadic_hole(h.a, h.b, h.k);
    const double lam = oracle::survivor_lambda(hole, h.k);
    const double exact = oracle::absorbing_hitting_time(hole, h.k);
    const auto e = hitting_ensemble(sys, m, {h.a, h.b}, p.n(100000, 5000), derive_seed(p.seed, 3, i++), 100000000,
                                    p.threads);
    const double prod = e.mean * (1 - lam);
    const double rel = std::fabs(e.mean - exact) / exact;
    lo = std::min(lo, prod);
    hi = std::max(hi, prod);
    worst_rel = std::max(worst_rel, rel);
    c.metric("mean_" + std::to_string(i), e.mean);
    c.metric("oracle_" + std::to_string(i), exact);
    if (!(prod >= 0.5 && prod <= 2 && rel < 0.15)) c.pass = false;
  }
  c.detail = "E(tau)(1-lambda) in [" + detail::num(lo) + ", " + detail::num(hi) + "], worst relative error vs oracle " +
             detail::num(worst_rel);
  return c;
}

inline Criterion c4_return_survival(const Profile& p) {
  Criterion c{4, "return survival lower bound"};
  const auto sys = MapSystem::doubling();
  const auto m = default_measure(sys);
  c.pass = true;
  double worst = INFINITY;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& h = test_holes()[i];
    const double lam = oracle::survivor_lambda(oracle::dyadic_hole(h.a, h.b, h.k), h.k);
    const std::size_t nmax = static_cast<std::size_t>(2 / (h.b - h.a));
    const auto s = return_survival(sys, m, {h.a, h.b}, nmax, p.n(100000, 5000), derive_seed(p.seed, 4, i), p.threads);
    for (std::size_t n = 1; n <= nmax; ++n) {
      const double r = s.wilson_lo[n - 1] / std::pow(lam, static_cast<double>(n));
      worst = std::min(worst, r);
      c.metric("survival_" + std::to_string(i) + "_" + std::to_string(n), s.survival[n - 1]);
      if (r < 0.1) c.pass = false;
    }
  }
  c.detail = "min Wilson-lower/lambda^n = " + detail::num(worst) + " (need >= 0.1)";
  return c;
}

inline Criterion c5_survival_band(const Profile& p) {
  Criterion c{5, "survival-eigenvalue band"};
  struct Case {
    MapSystem sys;
    Interval u;
  };
  const std::vector<Case> cases = {{MapSystem::doubling(), {0.0, 0.5}},
                                   {MapSystem::doubling(), {0.0, 0.25}},
                                   {MapSystem::doubling(), {21.0 / 64, 22.0 / 64}},
                                   {MapSystem::gauss(), {0.5, 0.5 + 1.0 / 64}}};
  double lo = INFINITY, hi = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& k = cases[i];
    const auto s = survival_vs_eigenvalue(k.sys, default_measure(k.sys), k.u, 50, p.n(1024, 256), 0, p.seed, p.threads);
    for (std::size_t n = 5; n <= 50; ++n) {
      lo = std::min(lo, s.matrix_ratio[n - 1]);
      hi = std::max(hi, s.matrix_ratio[n - 1]);
    }
    c.metric("lambda_" + std::to_string(i), s.lambda);
    c.metric("ratio50_" + std::to_string(i), s.matrix_ratio[49]);
  }
  c.pass = lo >= 0.5 && hi <= 2;
  c.detail = "mu(tau >= n)/lambda^n over n in [5,50] spans [" + detail::num(lo) + ", " + detail::num(hi) + "]";
  return c;
}

inline Criterion c6_kl_identity(const Profile& p) {
  Criterion c{6, "kl identity"};
  const auto sys = MapSystem::doubling();
  const auto m = default_measure(sys);
  c.pass = true;
  std::string d;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& h = test_holes()[i];
    const std::size_t n = static_cast<std::size_t>(std::floor(1 / (h.b - h.a)));
    const auto r = kl_identity_check(sys, m, {h.a, h.b}, n, 256, p.n(100000, 5000), derive_seed(p.seed, 6, i),
                                     p.threads);
    // exact q_k from digit enumeration, prefixes up to 10 digits
    const auto hole = oracle::dyadic_hole(h.a, h.b, h.k);
    std::vector<double> q;
    for (unsigned j = 0; j < n && h.k + j + 1 <= 10; ++j) q.push_back(oracle::enumerated_q(hole, h.k, j));
    const double exact_rhs = kl_rhs(r.lambda, q, n);
    c.metric("lhs_" + std::to_string(i), r.lhs);
    c.metric("rhs_mc_" + std::to_string(i), r.rhs);
    c.metric("rhs_exact_" + std::to_string(i), exact_rhs);
    c.metric("escape_identity_gap_" + std::to_string(i), r.escape_identity_gap);
    if (!r.pass) c.pass = false;
    d += (i ? "; " : "") + std::string("U=[0,") + detail::num(h.b) + ") lhs " + detail::num(r.lhs) + " rhs " +
         detail::num(r.rhs) + " (exact " + detail::num(exact_rhs) + ", n=" + std::to_string(n) + ")";
  }
  c.detail = d;
  return c;
}

inline Criterion c7_cover_scaling(const Profile& p) {
  Criterion c{7, "cover scaling, uniformly hyperbolic"};
  c.pass = true;
  std::string d;
  for (auto sys : {MapSystem::doubling(), MapSystem::gauss()}) {
    const auto deltas = detail::dyadic_grid(4, p.quick ? 6 : 9);
    const auto cc = expected_cover_time(sys, default_measure(sys), deltas, p.n(200, 20),
                                        derive_seed(p.seed, 7, sys.name() == "gauss"), p.threads);
    double lo = INFINITY, hi = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const double v = cc.ensembles[i].mean * deltas[i] / std::log(1 / deltas[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      c.metric(sys.name() + "_mean_" + std::to_string(i), cc.ensembles[i].mean);
    }
    c.metric(sys.name() + "_slope", cc.fit.slope);
    if (!(cc.fit.slope >= 0.9 && cc.fit.slope <= 1.25 && hi / lo <= 3)) c.pass = false;
    d += (d.empty() ? "" : "; ") + sys.name() + " slope " + detail::num(cc.fit.slope) + ", normalized spread " +
         detail::num(hi / lo);
  }
  c.detail = d;
  return c;
}

inline Criterion c8_matthews(const Profile& p) {
  Criterion c{8, "Matthews identity"};
  const auto sys = MapSystem::doubling();
  const auto m = default_measure(sys);
  const auto r4 = matthews_check(sys, m, uniform_bins(0.25), p.n(2000, 200), derive_seed(p.seed, 8, 4),
                                 p.n(2000, 200), p.threads);
  double worst = 0;
  for (std::size_t k = 2; k <= 4; ++k) {
    worst = std::max(worst, std::fabs(r4.a_sk[k - 1] - 1.0 / k));
    c.metric("A_s" + std::to_string(k), r4.a_sk[k - 1]);
  }
  const auto r16 = matthews_check(sys, m, uniform_bins(1.0 / 16), p.n(2000, 200), derive_seed(p.seed, 8, 16),
                                  p.n(2000, 200), p.threads);
  c.metric("ratio16", r16.ratio);
  c.pass = worst <= 0.05 && r16.ratio >= 0.05 && r16.ratio <= 1.5;
  c.detail = "max |A_{s,k} - 1/k| = " + detail::num(worst) + ", ratio at N=16 = " + detail::num(r16.ratio);
  return c;
}

inline Criterion c9_partitions(const Profile& p) {
  Criterion c{9, "partition properties"};
  c.pass = true;
  std::string d;
  for (auto sys : {MapSystem::doubling(), MapSystem::full_branched_linear({0.2, 0.3, 0.5}), MapSystem::gauss()}) {
    const auto cfg = prop_u_config(sys, 1);
    const auto m = default_measure(sys);
    std::vector<HoleFamily> fams;
    bool ok = true;
    std::size_t cells = 0;
    for (int k = 4; k <= (p.quick ? 5 : 8); ++k) {
      fams.push_back(build_prop_u_family(sys, cfg, std::ldexp(1.0, -k)));
      const auto r = verify_properties(fams.back(), sys, m, cfg, true, p.threads);
      if (!r.all()) ok = false;
      cells = fams.back().cells.size();
      c.metric(sys.name() + "_cells_" + std::to_string(k), static_cast<double>(cells));
    }
    const auto dr = depth_regression(fams);
    c.metric(sys.name() + "_depth_ratio", dr.max_ratio);
    if (!ok || !(dr.max_ratio < 10)) c.pass = false;
    d += sys.name() + (ok ? " ok" : " FAIL") + " (depth/log(1/delta) <= " + detail::num(dr.max_ratio, 3) + "); ";
  }
  // separated word families on the doubling map
  const auto dbl = MapSystem::doubling();
  const auto n3 = minimal_n3(dbl, default_symbolic_measure(dbl), 0, 1);
  std::vector<double> lx, ly;
  bool prime_ok = true;
  for (int k = 6; k <= (p.quick ? 8 : 12); ++k) {
    PropUPrimeReport rep;
    const double delta = std::ldexp(1.0, -k);
    const auto fam = build_prop_u_prime_family(dbl, delta, 0, 1, n3, &rep);
    const auto v = verify_prop_u_prime(fam, dbl, rep);
    if (!(v.b && v.d && v.g)) prime_ok = false;
    lx.push_back(std::log(1 / delta));
    ly.push_back(std::log(static_cast<double>(fam.cells.size())));
  }
  const double eps = linear_fit(lx, ly).slope;
  c.metric("prime_epsilon", eps);
  if (!prime_ok || !(eps > 0.3)) c.pass = false;
  d += "prime family " + std::string(prime_ok ? "ok" : "FAIL") + " eps " + detail::num(eps, 3) + "; ";
  // corrupted families must be caught
  auto bad = build_uniform_family(1.0 / 16, &dbl);
  bad.cells[3].hi += 0.01;
  const auto cfg = prop_u_config(dbl, 1);
  const bool caught_overlap = !verify_properties(bad, dbl, default_measure(dbl), cfg).b;
  bad = build_uniform_family(1.0 / 16, &dbl);
  bad.cells.erase(bad.cells.begin() + 7);
  bad.depths.erase(bad.depths.begin() + 7);
  const bool caught_gap = !verify_properties(bad, dbl, default_measure(dbl), cfg).c;
  if (!caught_overlap || !caught_gap) c.pass = false;
  d += std::string("negative controls ") + (caught_overlap && caught_gap ? "caught" : "MISSED");
  c.detail = d;
  return c;
}

inline Criterion c10_return_tail(const Profile& p) {
  Criterion c{10, "LSV return tail"};
  c.pass = true;
  std::string d;
  for (auto [alpha, target, tol] : {std::tuple{0.4, -2.5, 0.3}, std::tuple{0.25, -4.0, 0.5}}) {
    const auto ind = make_induced(MapSystem::lsv(alpha), derive_seed(p.seed, 10), p.n(10000000, 1000000));
    const auto t = return_tail(ind, 10000, p.n(1000000, 50000), derive_seed(p.seed, 10, 1), p.threads);
    c.metric("exponent_" + detail::num(alpha), t.exponent);
    if (!(std::fabs(t.exponent - target) <= tol)) c.pass = false;
    d += (d.empty() ? "" : "; ") + std::string("alpha ") + detail::num(alpha) + ": exponent " +
         detail::num(t.exponent) + " (target " + detail::num(target) + " +- " + detail::num(tol) + ")";
  }
  c.detail = d;
  return c;
}

inline Criterion c11_kac(const Profile& p) {
  Criterion c{11, "Kac identity"};
  c.pass = true;
  std::string d;
  for (double alpha : {0.25, 0.4}) {
    const auto ind = make_induced(MapSystem::lsv(alpha), derive_seed(p.seed, 11), p.n(10000000, 1000000));
    const auto k = kac_check(ind, p.n(100000, 10000), derive_seed(p.seed, 11, 1), p.threads);
    c.metric("kac_gap_" + detail::num(alpha), k.gap);
    if (!k.pass) c.pass = false;
    d += (d.empty() ? "" : "; ") + std::string("alpha ") + detail::num(alpha) + ": mean " +
         detail::num(k.mean_return) + " x mu(Y) " + detail::num(k.mu_y_mass) + " = " + detail::num(k.product);
  }
  c.detail = d;
  return c;
}

inline Criterion c12_bridge(const Profile& p) {
  Criterion c{12, "bridge sandwich"};
  const auto ind = make_induced(MapSystem::lsv(0.3), derive_seed(p.seed, 12), p.n(10000000, 1000000));
  const auto r = bridge_check(ind, 1.0 / 32, p.n(1000, 100), derive_seed(p.seed, 12, 1), p.threads);
  c.metric("E_tau", r.e_tau);
  c.metric("E_T_delta", r.e_t_delta);
  c.metric("E_T_kappa", r.e_t_kappa);
  c.metric("violations", static_cast<double>(r.pathwise_violations));
  c.pass = r.lower_ok && r.upper_ok && r.pathwise_ok;
  c.detail = "E(T_d) " + detail::num(r.e_t_delta) + " <= 5 E(tau) " + detail::num(r.e_tau) + ": " +
             (r.lower_ok ? "yes" : "no") + "; E(tau) <= 5 E(T_kd) " + detail::num(r.e_t_kappa) + ": " +
             (r.upper_ok ? "yes" : "no") + "; pathwise violations " + std::to_string(r.pathwise_violations);
  return c;
}

inline Criterion c13_lsv_cover(const Profile& p) {
  Criterion c{13, "non-uniform cover scaling"};
  const auto sys = MapSystem::lsv(0.3);
  const auto m = orbit_measure(sys, p.n(2000000, 200000), derive_seed(p.seed, 13));
  const auto deltas = detail::dyadic_grid(4, p.quick ? 6 : 8);
  const auto cc = expected_cover_time(sys, m, deltas, p.n(100, 10), derive_seed(p.seed, 13, 1), p.threads);
  for (std::size_t i = 0; i < deltas.size(); ++i) c.metric("mean_" + std::to_string(i), cc.ensembles[i].mean);
  c.metric("slope", cc.fit.slope);
  c.pass = cc.fit.slope >= 0.9 && cc.fit.slope <= 1.3;
  c.detail = "slope " + detail::num(cc.fit.slope);
  return c;
}

inline Criterion c14_slow_cover(const Profile& p) {
  Criterion c{14, "slow covering"};
  c.pass = true;
  std::string d;
  const double cq = std::numbers::pi * std::numbers::pi / 6;
  for (int which = 0; which < 2; ++which) {
    const auto sys = which == 0 ? MapSystem::quadratic_gap() : MapSystem::slow_bernoulli_lsv(0.5);
    std::vector<double> deltas;
    const int top = p.quick ? 5 : 8;
    for (int n = 3; n <= top; ++n)
      deltas.push_back(which == 0 ? 1 / (cq * n * n) : project(sys, Word(n, sys.label_base())).length());
    // E grows like 2^(n^2) for the gap map; a fixed step budget keeps the run finite.
    const std::uint64_t cap = which == 0 ? (p.quick ? 100000 : 10000000) : 0;
    const auto cc = expected_cover_time(sys, default_measure(sys), deltas, p.n(100, 10), derive_seed(p.seed, 14, which),
                                        p.threads, cap);
    bool ok = true;
    double prev = -INFINITY;
    std::string seq;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const int n = static_cast<int>(i) + 3;
      const double e = cc.ensembles[i].mean;
      const double ratio = std::log(e) / std::log(1 / deltas[i]);
      if (!(std::log2(e) >= 0.5 * n) || !(ratio > prev) || cc.ensembles[i].lower_bound) ok = false;
      prev = ratio;
      seq += (i ? "," : "") + std::string(cc.ensembles[i].lower_bound ? ">=" : "") + detail::num(ratio, 3);
      c.metric(sys.name() + "_mean_" + std::to_string(n), e);
    }
    if (!ok) c.pass = false;
    d += (d.empty() ? "" : "; ") + sys.name() + " log E/log(1/delta) = " + seq;
    if (cap) d += " (cap " + std::to_string(cap) + " steps)";
  }
  c.detail = d;
  return c;
}

using Runner = std::function<Criterion(const Profile&)>;

inline std::vector<Runner> runners() {
  return {c1_spectral_oracles, c2_eig_band, c3_hitting,     c4_return_survival, c5_survival_band,
          c6_kl_identity,      c7_cover_scaling, c8_matthews, c9_partitions,      c10_return_tail,
          c11_kac,             c12_bridge,  c13_lsv_cover,  c14_slow_cover};
}

inline Criterion run_one(const Runner& r, const Profile& p, int id) {
  const auto t0 = std::chrono::steady_clock::now();
  Criterion c;
  try {
    c = r(p);
  } catch (const std::exception& e) {
    c.id = id;
    c.pass = false;
    c.detail = std::string("error: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

// Metrics CSV: criterion, pass flag and every named metric; no timings.
inline std::string metrics_csv(const std::vector<Criterion>& cs) {
  Csv csv({"criterion", "metric", "value"});
  for (const auto& c : cs) {
    csv.row(c.id, std::string("pass"), c.pass ? 1.0 : 0.0);
    for (const auto& [k, v] : c.metrics) csv.row(c.id, k, v);
  }
  return csv.str();
}

// Criteria 1..14 under the quick profile.
inline std::string quick_csv(std::uint64_t seed, unsigned threads) {
  Profile p;
  p.seed = seed;
  p.threads = threads;
  p.quick = true;
  std::vector<Criterion> cs;
  const auto rs = runners();
  for (std::size_t i = 0; i < rs.size(); ++i) cs.push_back(run_one(rs[i], p, static_cast<int>(i) + 1));
  return metrics_csv(cs);
}

inline Criterion c15_determinism(const Profile& p) {
  Criterion c{15, "determinism"};
  const auto a = quick_csv(p.seed, 1);
  const auto b = quick_csv(p.seed, 4);
  const auto d = quick_csv(p.seed, 8);
  c.metric("csv_hash", static_cast<double>(fnv1a(a) >> 11));
  c.pass = a == b && a == d;
  c.detail = std::string("quick-profile CSV ") + (c.pass ? "identical" : "differs") + " at 1, 4, 8 threads (" +
             std::to_string(a.size()) + " bytes, fnv1a " + hex64(fnv1a(a)) + ")";
  return c;
}

inline std::vector<Runner> all_runners() {
  auto r = runners();
  r.push_back(c15_determinism);
  return r;
}

inline std::string line(const Criterion& c) {
  std::ostringstream s;
  s << "[" << (c.pass ? "PASS" : "FAIL") << "] " << c.id << ". " << c.name << ": " << c.detail << " ("
    << detail::num(c.seconds, 3) << " s)";
  return s.str();
}

}  // namespace covertime::acceptance
