#pragma once
// First returns of LSV maps to Y = [1/2, 1]: branch tables, return tails,
// Kac checks, induced cover times and the full-map/induced comparison.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "measures.hpp"
#include "montecarlo.hpp"
#include "stats.hpp"

namespace covertime {

struct ReturnStep {
  std::uint64_t time = 0;
  double landing = 0.0;
  bool censored = false;
};

// Smallest n >= 1 with f^n(x) in Y.
inline ReturnStep first_return(const MapSystem& sys, const Interval& y, double x,
                               std::uint64_t max_steps = 100000) {
  if (!(x >= y.lo && x <= y.hi)) throw OutOfDomain("start outside Y");
  for (std::uint64_t n = 1; n <= max_steps; ++n) {
    x = sys.apply(x);
    if (x >= y.lo && x <= y.hi) return {n, x, false};
  }
  return {max_steps, x, true};
}

struct InducedBranch {
  std::uint64_t r = 0;
  Interval domain;
};

struct InducedSystem {
  std::shared_ptr<const MapSystem> base;
  Interval y{0.5, 1.0};
  std::uint64_t tail_cap = 100000;
  // occupation fraction of Y along a long orbit
  double mu_y_mass = 0.0;
  // normalized restriction of the invariant measure to Y, as a 512-bin
  // histogram density sampled by inverse CDF
  MeasureModel mu_y;
  std::vector<double> hist;  // bin masses, sum 1
  // Y-mass of the branches with r above the cap
  double tail_mass = 0.0;

  const MapSystem& sys() const { return *base; }

  // Branches with r <= r_max: r = 1 on f^{-1}Y ∩ Y, and r = n + 1 on the
  // right-branch preimage of [z_n, z_{n-1}) with z_0 = 1/2, z_n = g_1(z_{n-1}).
  std::vector<InducedBranch> branches(std::uint64_t r_max) const {
    const auto& s = *base;
    const std::size_t right = s.label_base() + 1, left = s.label_base();
    std::vector<InducedBranch> out;
    out.push_back({1, {s.inverse(right, y.lo), y.hi}});
    double z = y.lo;
    for (std::uint64_t r = 2; r <= r_max; ++r) {
      const double zn = s.inverse(left, z);
      out.push_back({r, {s.inverse(right, zn), s.inverse(right, z)}});
      z = zn;
    }
    return out;
  }

  double sample(Rng& g) const { return mu_y.inv_cdf(uniform01(g)); }
};

// Builds the induced system on Y = [1/2, 1]; mu(Y) and the Y-histogram come
// from one orbit of orbit_length steps after burn_in.
inline InducedSystem make_induced(const MapSystem& sys, std::uint64_t seed = 1,
                                  std::size_t orbit_length = 10000000, std::size_t burn_in = 10000,
                                  std::uint64_t tail_cap = 100000) {
  if (!sys.is_lsv()) throw Unsupported("first-return inducing is implemented for LSV maps");
  InducedSystem ind;
  ind.base = std::make_shared<const MapSystem>(sys);
  ind.tail_cap = tail_cap;
  constexpr std::size_t bins = 512;
  std::vector<std::uint64_t> counts(bins, 0);
  std::uint64_t in_y = 0;
  Rng g = make_rng(seed);
  double x = uniform_open(g);
  for (std::size_t i = 0; i < burn_in; ++i) x = sys.apply(x);
  for (std::size_t i = 0; i < orbit_length; ++i) {
    if (x >= ind.y.lo) {
      ++in_y;
      const auto b = std::min<std::size_t>(bins - 1, static_cast<std::size_t>((x - ind.y.lo) / ind.y.length() * bins));
      ++counts[b];
    }
    x = sys.apply(x);
  }
  if (in_y == 0) throw NoConvergence("orbit never entered Y");
  ind.mu_y_mass = static_cast<double>(in_y) / static_cast<double>(orbit_length);
  ind.hist.resize(bins);
  std::vector<double> cum(bins + 1, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    ind.hist[b] = static_cast<double>(counts[b]) / static_cast<double>(in_y);
    cum[b + 1] = cum[b] + ind.hist[b];
  }
  cum[bins] = 1.0;
  const Interval yy = ind.y;
  auto hist = std::make_shared<const std::vector<double>>(ind.hist);
  auto cdfv = std::make_shared<const std::vector<double>>(cum);
  MeasureModel m;
  m.name = sys.name() + "-mu_Y";
  m.density = [hist, yy](double t) {
    if (t < yy.lo || t > yy.hi) return 0.0;
    const auto b = std::min<std::size_t>(bins - 1, static_cast<std::size_t>((t - yy.lo) / yy.length() * bins));
    return (*hist)[b] * bins / yy.length();
  };
  m.cdf = [cdfv, yy](double t) {
    if (t <= yy.lo) return 0.0;
    if (t >= yy.hi) return 1.0;
    const double u = (t - yy.lo) / yy.length() * bins;
    const auto b = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(u));
    return (*cdfv)[b] + ((*cdfv)[b + 1] - (*cdfv)[b]) * (u - b);
  };
  m.inv_cdf = [cdfv, yy](double p) {
    const auto& c = *cdfv;
    const auto it = std::upper_bound(c.begin(), c.end(), p);
    std::size_t b = static_cast<std::size_t>(std::max<long>(0, (it - c.begin()) - 1));
    b = std::min(b, bins - 1);
    const double w = c[b + 1] - c[b];
    const double f = w > 0 ? (p - c[b]) / w : 0.5;
    return yy.lo + (b + std::clamp(f, 0.0, 1.0)) / bins * yy.length();
  };
  ind.mu_y = std::move(m);
  // mass of branches beyond the cap: the Y-preimage of [0, z_cap)
  double z = ind.y.lo;
  for (std::uint64_t r = 2; r <= tail_cap; ++r) z = sys.inverse(sys.label_base(), z);
  ind.tail_mass = ind.mu_y.cdf(sys.inverse(sys.label_base() + 1, z));
  return ind;
}

// Sum of r_i mu_Y(Y_i) over branches with r_i <= r_max.
inline double kac_branch_sum(const InducedSystem& ind, std::uint64_t r_max) {
  double s = 0;
  for (const auto& b : ind.branches(r_max)) s += b.r * ind.mu_y.mass(b.domain);
  return s;
}

struct KacReport {
  std::size_t samples = 0;
  double mean_return = 0.0;
  double mu_y_mass = 0.0;
  double product = 0.0;
  double gap = 0.0;  // |mean * mu(Y) - 1|
  double censored_fraction = 0.0;
  bool pass = false;
};

inline std::vector<TrialResult> return_samples(const InducedSystem& ind, std::size_t samples, std::uint64_t seed,
                                               std::uint64_t max_steps, unsigned threads) {
  return parallel_map<TrialResult>(samples, threads, [&](std::size_t i) {
    Rng g = make_rng(derive_seed(seed, i));
    const auto r = first_return(ind.sys(), ind.y, ind.sample(g), max_steps);
    return TrialResult{r.time, r.censored};
  });
}

inline KacReport kac_check(const InducedSystem& ind, std::size_t samples, std::uint64_t seed,
                           unsigned threads = default_threads()) {
  const auto e = make_ensemble(seed, return_samples(ind, samples, seed, ind.tail_cap, threads));
  KacReport k;
  k.samples = samples;
  k.mean_return = e.mean;
  k.mu_y_mass = ind.mu_y_mass;
  k.product = e.mean * ind.mu_y_mass;
  k.gap = std::fabs(k.product - 1);
  k.censored_fraction = e.censored_fraction;
  k.pass = k.gap < 0.05;
  return k;
}

struct TailCurve {
  std::vector<double> n;
  std::vector<double> survival;  // mu_Y(tau_Y > n)
  double exponent = NAN;
  LinearFit fit;
  std::size_t samples = 0;
  double tail_mass = 0.0;
};

// Empirical mu_Y(tau_Y > n) on a log grid; the exponent is the log-log slope
// over n in [10, n_max], using points with at least 20 exceedances.
inline TailCurve return_tail(const InducedSystem& ind, std::uint64_t n_max, std::size_t samples,
                             std::uint64_t seed, unsigned threads = default_threads()) {
  auto r = return_samples(ind, samples, seed, n_max + 1, threads);
  std::vector<std::uint64_t> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) v[i] = r[i].value;
  std::sort(v.begin(), v.end());
  TailCurve t;
  t.samples = samples;
  t.tail_mass = ind.tail_mass;
  std::vector<double> lx, ly;
  double prev = -1;
  for (double e = 0; e <= std::log10(static_cast<double>(n_max)) + 1e-9; e += 0.05) {
    const double n = std::round(std::pow(10.0, e));
    if (n == prev) continue;
    prev = n;
    const auto above = v.end() - std::upper_bound(v.begin(), v.end(), static_cast<std::uint64_t>(n));
    const double s = static_cast<double>(above) / static_cast<double>(samples);
    t.n.push_back(n);
    t.survival.push_back(s);
    if (n >= 10 && above >= 20) {
      lx.push_back(std::log(n));
      ly.push_back(std::log(s));
    }
  }
  if (lx.size() >= 2) {
    t.fit = linear_fit(lx, ly);
    t.exponent = t.fit.slope;
  }
  return t;
}

namespace detail {

// Walks one f-orbit from a mu_Y start and records cover times of three
// targets: full-map delta bins (f-steps), Y-bins of width delta and
// kappa*delta along the first-return orbit (F-steps, and f-steps for the
// finer one).
struct BridgeTrial {
  std::uint64_t tau_full = 0;   // full-map cover, f-steps
  std::uint64_t t_delta = 0;    // Y delta-bins, F-steps
  std::uint64_t t_kappa = 0;    // Y kappa*delta-bins, F-steps
  std::uint64_t tau_kappa = 0;  // f-time of t_kappa
  bool censored = false;
};

inline BridgeTrial bridge_trial(const InducedSystem& ind, const CellIndex& full, const CellIndex& yd,
                                const CellIndex& yk, double x, std::uint64_t max_steps) {
  BridgeTrial b;
  std::vector<char> sf(full.cell_count, 0), sd(yd.cell_count, 0), sk(yk.cell_count, 0);
  std::size_t lf = full.cell_count, ld = yd.cell_count, lk = yk.cell_count;
  bool df = false, dd = false, dk = false;
  std::uint64_t returns = 0;
  const auto& s = ind.sys();
  for (std::uint64_t n = 0;; ++n) {
    const long c = full.locate(x);
    if (!df && c >= 0 && !sf[c]) {
      sf[c] = 1;
      if (--lf == 0) {
        df = true;
        b.tau_full = n;
      }
    }
    if (x >= ind.y.lo && x <= ind.y.hi) {
      const long a = yd.locate(x), k = yk.locate(x);
      if (!dd && a >= 0 && !sd[a]) {
        sd[a] = 1;
        if (--ld == 0) {
          dd = true;
          b.t_delta = returns;
        }
      }
      if (!dk && k >= 0 && !sk[k]) {
        sk[k] = 1;
        if (--lk == 0) {
          dk = true;
          b.t_kappa = returns;
          b.tau_kappa = n;
        }
      }
      ++returns;
    }
    if (df && dd && dk) return b;
    if (n >= max_steps) {
      b.censored = true;
      if (!df) b.tau_full = max_steps;
      if (!dd) b.t_delta = returns;
      if (!dk) {
        b.t_kappa = returns;
        b.tau_kappa = max_steps;
      }
      return b;
    }
    x = s.apply(x);
  }
}

}  // namespace detail

// Cover time of the delta-bins of Y along F-orbits from mu_Y starts.
inline TrialEnsemble induced_cover_time(const InducedSystem& ind, double delta, std::size_t trials,
                                        std::uint64_t seed, unsigned threads = default_threads(),
                                        std::uint64_t max_returns = 100000000) {
  const auto target = uniform_bins(delta, ind.y);
  const auto r = parallel_map<TrialResult>(trials, threads, [&](std::size_t i) {
    Rng g = make_rng(derive_seed(seed, i));
    double x = ind.sample(g);
    std::vector<char> seen(target.index.cell_count, 0);
    std::size_t left = target.index.cell_count;
    for (std::uint64_t n = 0; n <= max_returns; ++n) {
      const long c = target.index.locate(x);
      if (c >= 0 && !seen[c]) {
        seen[c] = 1;
        if (--left == 0) return TrialResult{n, false};
      }
      const auto ret = first_return(ind.sys(), ind.y, x, ind.tail_cap * 100);
      if (ret.censored) return TrialResult{n, true};
      x = ret.landing;
    }
    return TrialResult{max_returns, true};
  });
  return make_ensemble(seed, r);
}

struct BridgeReport {
  double delta = 0.0;
  double kappa = 0.125;
  std::size_t trials = 0;
  double e_tau = 0.0;        // E_{mu_Y} full-map cover time, f-steps
  double e_t_delta = 0.0;    // E_{mu_Y} T_delta
  double e_t_kappa = 0.0;    // E_{mu_Y} T_{kappa delta}
  double e_tau_kappa = 0.0;  // E_{mu_Y} f-time of T_{kappa delta}
  double c_lower = 0.0;      // e_tau / e_t_delta
  double c_upper = 0.0;      // e_tau / e_t_kappa
  bool lower_ok = false;     // E(T_delta) <= 5 E(tau)
  bool upper_ok = false;     // E(tau) <= 5 E(T_kappa)
  bool pathwise_ok = false;  // tau_delta <= tau^Y_{kappa delta} on every trial
  std::size_t pathwise_violations = 0;
  double e_tau_mu = 0.0;     // E_mu full-map cover time
  bool mu_bound_ok = false;  // E_mu(tau) >= mu(Y) E_{mu_Y}(tau)
  double r_estimate = 0.0;   // sum_n n mu_Y(tau_Y > n)
  double censored_fraction = 0.0;
  bool confirmable = true;   // false when censoring leaves only bounds
};

// kappa = 1/(2 C N1 (N1 + 1)) with C = sup |Df| on [3/4, 1] = 2 and N1 = 1.
inline BridgeReport bridge_check(const InducedSystem& ind, double delta, std::size_t trials, std::uint64_t seed,
                                 unsigned threads = default_threads(), std::uint64_t max_steps = 100000000,
                                 std::size_t mu_trials = 0) {
  BridgeReport rep;
  rep.delta = delta;
  rep.kappa = 1.0 / (2 * 2.0 * 1 * 2);
  rep.trials = trials;
  const auto full = uniform_bins(delta).index;
  const auto yd = uniform_bins(delta, ind.y).index;
  const auto yk = uniform_bins(rep.kappa * delta, ind.y).index;
  const auto r = parallel_map<detail::BridgeTrial>(trials, threads, [&](std::size_t i) {
    Rng g = make_rng(derive_seed(seed, i));
    return detail::bridge_trial(ind, full, yd, yk, ind.sample(g), max_steps);
  });
  long double a = 0, b = 0, c = 0, d = 0;
  std::size_t cens = 0;
  for (const auto& t : r) {
    a += t.tau_full;
    b += t.t_delta;
    c += t.t_kappa;
    d += t.tau_kappa;
    if (t.censored) ++cens;
    if (!t.censored && t.tau_full > t.tau_kappa) ++rep.pathwise_violations;
  }
  const double n = static_cast<double>(trials);
  rep.e_tau = static_cast<double>(a / n);
  rep.e_t_delta = static_cast<double>(b / n);
  rep.e_t_kappa = static_cast<double>(c / n);
  rep.e_tau_kappa = static_cast<double>(d / n);
  rep.censored_fraction = cens / n;
  rep.confirmable = cens == 0;
  rep.c_lower = rep.e_t_delta > 0 ? rep.e_tau / rep.e_t_delta : INFINITY;
  rep.c_upper = rep.e_t_kappa > 0 ? rep.e_tau / rep.e_t_kappa : INFINITY;
  rep.lower_ok = rep.e_t_delta <= 5 * rep.e_tau;
  rep.upper_ok = rep.e_tau <= 5 * rep.e_t_kappa;
  rep.pathwise_ok = rep.pathwise_violations == 0 && rep.confirmable;
  // full-map cover time from mu-starts, mu the long-orbit measure
  const std::size_t mt = mu_trials ? mu_trials : trials;
  const auto mr = parallel_map<TrialResult>(mt, threads, [&](std::size_t i) {
    Rng g = make_rng(derive_seed(seed, 1u << 20, i));
    double x = uniform_open(g);
    for (int k = 0; k < 10000; ++k) x = ind.sys().apply(x);
    FloatTrajectory tr(ind.sys(), x);
    return cover_run(tr, full, max_steps);
  });
  const auto me = make_ensemble(seed, mr);
  rep.e_tau_mu = me.mean;
  rep.mu_bound_ok = rep.e_tau_mu >= ind.mu_y_mass * rep.e_tau;
  // R = E[tau_Y (tau_Y - 1) / 2]
  const auto rs = return_samples(ind, std::max<std::size_t>(trials * 10, 10000), derive_seed(seed, 2u << 20),
                                 ind.tail_cap, threads);
  long double rr = 0;
  for (const auto& t : rs) rr += static_cast<long double>(t.value) * (t.value - 1) / 2;
  rep.r_estimate = static_cast<double>(rr / rs.size());
  return rep;
}

}  // namespace covertime
