#pragma once
// Orbit simulation: cover, hitting and return times, the Matthews check and
// a brute-force delta-density oracle.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "measures.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace covertime {

// Cells as a sorted list of edges; segment i = [edges[i], edges[i+1]) maps to
// a cell index or -1 for gaps. The last segment is closed when it ends at 1.
struct CellIndex {
  std::vector<double> edges;
  std::vector<long> cell_of;
  std::size_t cell_count = 0;

  static CellIndex from_cells(const std::vector<Interval>& cells) {
    CellIndex c;
    c.cell_count = cells.size();
    for (const auto& u : cells) {
      c.edges.push_back(u.lo);
      c.edges.push_back(u.hi);
    }
    std::sort(c.edges.begin(), c.edges.end());
    c.edges.erase(std::unique(c.edges.begin(), c.edges.end()), c.edges.end());
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cells[a].lo < cells[b].lo; });
    c.cell_of.assign(c.edges.size() > 0 ? c.edges.size() - 1 : 0, -1);
    for (std::size_t i = 0; i + 1 < c.edges.size(); ++i) {
      const double m = 0.5 * (c.edges[i] + c.edges[i + 1]);
      auto it = std::upper_bound(order.begin(), order.end(), m,
                                 [&](double v, std::size_t k) { return v < cells[k].lo; });
      if (it == order.begin()) continue;
      const std::size_t k = *(it - 1);
      if (m < cells[k].hi) c.cell_of[i] = static_cast<long>(k);
    }
    return c;
  }

  // segment index of x or -1 outside the edge range
  long segment(double x) const {
    if (edges.size() < 2 || x < edges.front() || x > edges.back()) return -1;
    if (x == edges.back()) return x >= 1.0 ? static_cast<long>(edges.size()) - 2 : -1;
    return static_cast<long>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
  }

  long locate(double x) const {
    const long s = segment(x);
    return s < 0 ? -1 : cell_of[s];
  }
};

// Floating-point orbit of the map itself.
class FloatTrajectory {
 public:
  FloatTrajectory(const MapSystem& sys, double x0) : sys_(&sys), x_(x0) {}
  double point() { return x_; }
  long locate(const CellIndex& c) { return c.locate(x_); }
  void step() { x_ = sys_->apply(x_); }

 private:
  const MapSystem* sys_;
  double x_;
};

// Orbit of a random coded point: the shift acts on a lazily extended
// symbol buffer, and positions are resolved by refining cylinders until the
// current cylinder sits inside one segment of the cell index.
class SymbolicTrajectory {
 public:
  SymbolicTrajectory(const MapSystem& sys, const SymbolicMeasure& m, Rng g, const Word& prefix = {})
      : sys_(&sys), m_(&m), g_(std::move(g)), buf_(prefix) {}

  Interval cylinder(std::size_t d) {
    fill(d);
    Interval j{0.0, 1.0};
    for (std::size_t i = head_ + d; i > head_; --i) j = sys_->inverse_image(buf_[i - 1], j);
    return j;
  }

  double point() { return cylinder(kMaxDepth).mid(); }

  long locate(const CellIndex& c) {
    std::size_t d = depth_ > 2 ? depth_ - 2 : 1;
    for (;; ++d) {
      const Interval j = cylinder(d);
      if (j.hi <= c.edges.front() || (j.lo >= c.edges.back() && c.edges.back() < 1.0)) {
        depth_ = d;
        return -1;
      }
      const long s = c.segment(j.lo);
      if (d >= kMaxDepth || !(j.hi > j.lo)) {
        depth_ = d;
        return c.locate(j.mid());
      }
      if (s >= 0 && j.hi <= c.edges[s + 1]) {
        depth_ = d;
        return c.cell_of[s];
      }
    }
  }

  void step() {
    ++head_;
    if (head_ >= 4096) {
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(head_));
      head_ = 0;
    }
  }

 private:
  static constexpr std::size_t kMaxDepth = 60;
  void fill(std::size_t d) {
    while (buf_.size() < head_ + d) buf_.push_back(m_->sample_symbol(g_));
  }

  const MapSystem* sys_;
  const SymbolicMeasure* m_;
  Rng g_;
  Word buf_;
  std::size_t head_ = 0;
  std::size_t depth_ = 8;
};

// Words whose cylinders tile u exactly, when u is a finite cylinder union.
inline std::optional<std::vector<Word>> cylinder_tiling(const MapSystem& sys, const Interval& u,
                                                        std::size_t max_depth = 14,
                                                        std::size_t max_words = 4096) {
  if (sys.countable()) return std::nullopt;
  std::vector<Word> out;
  std::vector<Word> stack = {Word{}};
  while (!stack.empty()) {
    Word w = std::move(stack.back());
    stack.pop_back();
    const Interval j = project_unchecked(sys, w);
    if (!j.overlaps(u)) continue;
    if (j.lo >= u.lo && j.hi <= u.hi) {
      out.push_back(w);
      if (out.size() > max_words) return std::nullopt;
      continue;
    }
    if (w.size() >= max_depth) return std::nullopt;
    for (std::size_t k = sys.label_end(); k-- > sys.label_base();) {
      Word c = w;
      c.push_back(k);
      stack.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(), [&](const Word& a, const Word& b) {
    return project_unchecked(sys, a).lo < project_unchecked(sys, b).lo;
  });
  return out;
}

// Start-point conditioning on a set U.
struct StartCondition {
  Interval u;
  CellIndex index;
  std::optional<std::vector<Word>> words;
  std::vector<double> word_cdf;
  double mass_u = 0.0;
};

inline StartCondition make_start_condition(const MapSystem& sys, const MeasureModel& m, const Interval& u) {
  StartCondition c;
  c.u = u;
  c.index = CellIndex::from_cells({u});
  c.mass_u = m.mass(u);
  if (!(c.mass_u > 0)) throw ConfigError("conditioning set has zero measure");
  if (m.sampling == SampleMode::SymbolStream) {
    c.words = cylinder_tiling(sys, u);
    if (c.words) {
      double s = 0;
      for (const auto& w : *c.words) {
        s += cylinder_measure(sys, m.sym, w);
        c.word_cdf.push_back(s);
      }
      for (auto& v : c.word_cdf) v /= s;
    }
  }
  return c;
}

inline constexpr std::size_t kRejectionBudget = 16000000;

// Calls f(trajectory) with a start drawn from m, or from m restricted to
// cond when given.
template <class F>
decltype(auto) with_trajectory(const MapSystem& sys, const MeasureModel& m, std::uint64_t seed, F&& f,
                               const StartCondition* cond = nullptr) {
  Rng g = make_rng(seed);
  if (m.sampling == SampleMode::SymbolStream) {
    if (cond && cond->words) {
      const double r = uniform01(g);
      auto it = std::upper_bound(cond->word_cdf.begin(), cond->word_cdf.end(), r);
      const std::size_t i = std::min<std::size_t>(it - cond->word_cdf.begin(), cond->words->size() - 1);
      SymbolicTrajectory t(sys, m.sym, std::move(g), (*cond->words)[i]);
      return f(t);
    }
    if (cond) {
      for (std::size_t a = 0; a < kRejectionBudget; ++a) {
        SymbolicTrajectory t(sys, m.sym, make_rng(derive_seed(seed, a)));
        if (t.locate(cond->index) >= 0) return f(t);
      }
      throw RejectionStarved("acceptance rate below 1e-6 for the conditioning set");
    }
    SymbolicTrajectory t(sys, m.sym, std::move(g));
    return f(t);
  }
  if (cond && m.sampling == SampleMode::InverseCdf) {
    const double a = m.cdf(cond->u.lo), b = m.cdf(cond->u.hi);
    const double x = std::clamp(m.inv_cdf(a + (b - a) * uniform01(g)), cond->u.lo,
                                std::nextafter(cond->u.hi, cond->u.lo));
    FloatTrajectory t(sys, x);
    return f(t);
  }
  if (cond) {
    for (std::size_t a = 0; a < kRejectionBudget; ++a) {
      const double x = sample_point(sys, m, g);
      if (cond->index.locate(x) >= 0) {
        FloatTrajectory t(sys, x);
        return f(t);
      }
    }
    throw RejectionStarved("acceptance rate below 1e-6 for the conditioning set");
  }
  FloatTrajectory t(sys, sample_point(sys, m, g));
  return f(t);
}

enum class TargetKind { UniformBins, PartitionFamily };

struct CoverTarget {
  TargetKind kind = TargetKind::UniformBins;
  double delta = 0.0;
  std::vector<Interval> cells;
  double t = 1.0 / 3.0;
  double T = 1.0;
  CellIndex index;
};

inline CoverTarget cells_target(std::vector<Interval> cells, double delta, double t, double T,
                                TargetKind kind = TargetKind::PartitionFamily) {
  CoverTarget c;
  c.kind = kind;
  c.delta = delta;
  c.t = t;
  c.T = T;
  c.cells = std::move(cells);
  c.index = CellIndex::from_cells(c.cells);
  return c;
}

// ceil(|dom|/delta) equal cells of dom.
inline CoverTarget uniform_bins(double delta, Interval dom = {0.0, 1.0}) {
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  const double r = dom.length() / delta;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(r - 1e-12)));
  std::vector<Interval> cells(n);
  for (std::size_t i = 0; i < n; ++i)
    cells[i] = {dom.lo + dom.length() * i / n, i + 1 == n ? dom.hi : dom.lo + dom.length() * (i + 1) / n};
  return cells_target(std::move(cells), delta, 1.0 / 3.0, 1.0, TargetKind::UniformBins);
}

// Steps until every cell has been met, counting the start as step 0.
template <class Traj>
TrialResult cover_run(Traj& t, const CellIndex& idx, std::uint64_t max_steps,
                      std::vector<std::uint64_t>* first_visit = nullptr) {
  std::vector<char> seen(idx.cell_count, 0);
  if (first_visit) first_visit->assign(idx.cell_count, kNoCap);
  std::size_t left = idx.cell_count;
  for (std::uint64_t n = 0;; ++n) {
    const long c = t.locate(idx);
    if (c >= 0 && !seen[c]) {
      seen[c] = 1;
      if (first_visit) (*first_visit)[c] = n;
      if (--left == 0) return {n, false};
    }
    if (n >= max_steps) return {max_steps, true};
    t.step();
  }
}

// First n >= 1 with f^n(x) in the indexed set.
template <class Traj>
TrialResult hit_run(Traj& t, const CellIndex& idx, std::uint64_t max_steps) {
  for (std::uint64_t n = 1; n <= max_steps; ++n) {
    t.step();
    if (t.locate(idx) >= 0) return {n, false};
  }
  return {max_steps, true};
}

inline TrialResult cover_time_trial(const MapSystem& sys, const MeasureModel& m, const CoverTarget& target,
                                    std::uint64_t seed, std::uint64_t max_steps) {
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  return with_trajectory(sys, m, seed, [&](auto& t) { return cover_run(t, target.index, max_steps); });
}

inline TrialResult hitting_time_trial(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                      std::uint64_t seed, std::uint64_t max_steps) {
  const auto idx = CellIndex::from_cells({u});
  return with_trajectory(sys, m, seed, [&](auto& t) { return hit_run(t, idx, max_steps); });
}

inline TrialEnsemble hitting_ensemble(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                      std::size_t trials, std::uint64_t seed, std::uint64_t max_steps,
                                      unsigned threads = default_threads()) {
  const auto idx = CellIndex::from_cells({u});
  const auto r = parallel_map<TrialResult>(trials, threads, [&](std::size_t i) {
    return with_trajectory(sys, m, derive_seed(seed, i), [&](auto& t) { return hit_run(t, idx, max_steps); });
  });
  return make_ensemble(seed, r);
}

// Return times to u for starts drawn from mu conditioned on u.
inline TrialEnsemble return_ensemble(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                     std::size_t trials, std::uint64_t seed, std::uint64_t max_steps,
                                     unsigned threads = default_threads()) {
  const auto cond = make_start_condition(sys, m, u);
  const auto r = parallel_map<TrialResult>(trials, threads, [&](std::size_t i) {
    return with_trajectory(
        sys, m, derive_seed(seed, i), [&](auto& t) { return hit_run(t, cond.index, max_steps); }, &cond);
  });
  return make_ensemble(seed, r);
}

struct SurvivalCurve {
  Interval u;
  double mu_u = 0.0;
  std::size_t trials = 0;
  std::vector<double> survival;  // index n-1 holds mu_U(tau_U >= n)
  std::vector<double> wilson_lo;
  std::vector<double> wilson_hi;
};

inline SurvivalCurve return_survival(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                     std::size_t n_max, std::size_t trials, std::uint64_t seed,
                                     unsigned threads = default_threads()) {
  const auto e = return_ensemble(sys, m, u, trials, seed, n_max, threads);
  SurvivalCurve c;
  c.u = u;
  c.mu_u = m.mass(u);
  c.trials = trials;
  std::vector<double> ge(n_max + 2, 0.0);
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t v = e.censored[i] ? n_max + 1 : e.values[i];
    ge[std::min<std::uint64_t>(v, n_max + 1)] += 1;
  }
  // suffix sums: count with tau >= n
  for (std::size_t n = n_max; n >= 1; --n) ge[n] += ge[n + 1];
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double s = ge[n];
    c.survival.push_back(s / trials);
    const auto w = wilson_interval(s, static_cast<double>(trials));
    c.wilson_lo.push_back(w.lo);
    c.wilson_hi.push_back(w.hi);
  }
  return c;
}

// mu(x, f x, ..., f^{n-1} x all outside u) for n = 1..n_max, from mu-starts.
inline std::vector<double> avoidance_curve(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                           std::size_t n_max, std::size_t trials, std::uint64_t seed,
                                           unsigned threads = default_threads()) {
  const auto idx = CellIndex::from_cells({u});
  const auto first = parallel_map<std::uint64_t>(trials, threads, [&](std::size_t i) {
    return with_trajectory(sys, m, derive_seed(seed, i), [&](auto& t) -> std::uint64_t {
      for (std::uint64_t n = 0; n < n_max; ++n) {
        if (t.locate(idx) >= 0) return n;
        t.step();
      }
      return n_max;
    });
  });
  std::vector<double> out(n_max, 0.0);
  for (auto f : first)
    for (std::size_t n = 1; n <= n_max; ++n)
      if (f >= n) out[n - 1] += 1.0 / trials;
  return out;
}

inline std::uint64_t default_max_steps(double delta, double min_ball) {
  const double p = 1000.0 * std::log(1.0 / delta) / std::max(min_ball, 1e-300);
  return p >= 1e15 ? static_cast<std::uint64_t>(1e15) : static_cast<std::uint64_t>(std::max(p, 100.0));
}

inline TrialEnsemble cover_ensemble(const MapSystem& sys, const MeasureModel& m, const CoverTarget& target,
                                    std::size_t trials, std::uint64_t seed, std::uint64_t max_steps,
                                    unsigned threads = default_threads()) {
  const auto r = parallel_map<TrialResult>(trials, threads, [&](std::size_t i) {
    return cover_time_trial(sys, m, target, derive_seed(seed, i), max_steps);
  });
  return make_ensemble(seed, r);
}

struct CoverCurve {
  std::vector<double> deltas;
  std::vector<TrialEnsemble> ensembles;
  std::vector<double> min_ball;
  std::vector<double> normalized;  // mean * M(delta) / log(1/delta)
  std::vector<char> excluded;      // censored points left out of the fit
  LinearFit fit;
};

inline CoverCurve expected_cover_time(const MapSystem& sys, const MeasureModel& m,
                                      const std::vector<double>& deltas, std::size_t trials,
                                      std::uint64_t seed, unsigned threads = default_threads(),
                                      std::uint64_t max_steps = 0) {
  CoverCurve c;
  c.deltas = deltas;
  const auto breaks = support_breaks(sys);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    const double mb = min_ball_measure(m, d, 0.0, breaks, threads).value;
    const auto target = uniform_bins(d);
    const std::uint64_t cap = max_steps ? max_steps : default_max_steps(d, mb);
    auto e = cover_ensemble(sys, m, target, trials, derive_seed(seed, i), cap, threads);
    c.min_ball.push_back(mb);
    c.normalized.push_back(e.mean * mb / std::log(1.0 / d));
    c.excluded.push_back(e.lower_bound ? 1 : 0);
    if (!e.lower_bound && e.mean > 0) {
      lx.push_back(std::log(1.0 / d));
      ly.push_back(std::log(e.mean));
    }
    c.ensembles.push_back(std::move(e));
  }
  if (lx.size() >= 2) c.fit = linear_fit(lx, ly);
  return c;
}

struct MatthewsReport {
  std::size_t cells = 0;
  double mean_cover = 0.0;
  double max_hit = 0.0;
  double harmonic = 0.0;
  double ratio = 0.0;
  std::vector<double> hit_means;
  std::vector<double> a_sk;  // index k-1: mean over permutations of mu(A_{s,k}); empty if N > 5
};

inline MatthewsReport matthews_check(const MapSystem& sys, const MeasureModel& m, const CoverTarget& target,
                                     std::size_t trials, std::uint64_t seed, std::size_t permutations = 2000,
                                     unsigned threads = default_threads(), std::uint64_t max_steps = 100000000) {
  const std::size_t n = target.cells.size();
  if (n < 2) throw ConfigError("matthews check needs at least two cells");
  MatthewsReport r;
  r.cells = n;
  r.harmonic = harmonic(n);
  auto visits = parallel_map<std::vector<std::uint64_t>>(trials, threads, [&](std::size_t i) {
    std::vector<std::uint64_t> fv;
    with_trajectory(sys, m, derive_seed(seed, 0, i),
                    [&](auto& t) { return cover_run(t, target.index, max_steps, &fv); });
    return fv;
  });
  double s = 0;
  for (const auto& fv : visits) s += static_cast<double>(*std::max_element(fv.begin(), fv.end()));
  r.mean_cover = s / trials;
  for (std::size_t c = 0; c < n; ++c) {
    const auto e = hitting_ensemble(sys, m, target.cells[c], trials, derive_seed(seed, 1, c), max_steps, threads);
    r.hit_means.push_back(e.mean);
    r.max_hit = std::max(r.max_hit, e.mean);
  }
  r.ratio = r.mean_cover / (r.harmonic * r.max_hit);
  if (n <= 5) {
    r.a_sk.assign(n, 0.0);
    Rng g = make_rng(derive_seed(seed, 2));
    std::vector<std::size_t> perm(n);
    for (std::size_t p = 0; p < permutations; ++p) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(g, i + 1)]);
      for (std::size_t k = 1; k <= n; ++k) {
        std::size_t hits = 0;
        for (const auto& fv : visits) {
          std::uint64_t best = 0;
          std::size_t arg = 0;
          for (std::size_t i = 0; i < k; ++i)
            if (i == 0 || fv[perm[i]] > best) {
              best = fv[perm[i]];
              arg = i;
            }
          if (arg == k - 1) ++hits;
        }
        r.a_sk[k - 1] += static_cast<double>(hits) / trials;
      }
    }
    for (auto& v : r.a_sk) v /= permutations;
  }
  return r;
}

// Exact delta-density time of an orbit against a grid of supp = [lo, hi]
// with spacing delta/100, using closed balls.
inline std::uint64_t brute_force_cover_time(const std::vector<double>& orbit, double delta,
                                            Interval supp = {0.0, 1.0}) {
  if (orbit.size() > 10000) throw ConfigError("brute force limited to 10^4 orbit points");
  const double h = delta / 100;
  const auto m = static_cast<std::size_t>(std::ceil(supp.length() / h));
  std::vector<char> cov(m + 1, 0);
  std::size_t left = m + 1;
  auto grid = [&](std::size_t j) { return std::min(supp.hi, supp.lo + j * h); };
  for (std::size_t n = 0; n < orbit.size(); ++n) {
    const double x = orbit[n];
    const double a = std::max(0.0, std::floor((x - delta - supp.lo) / h) - 1);
    const auto lo = static_cast<std::size_t>(a);
    for (std::size_t j = lo; j <= m; ++j) {
      const double y = grid(j);
      if (y > x + delta) break;
      if (!cov[j] && std::fabs(y - x) <= delta) {
        cov[j] = 1;
        --left;
      }
    }
    if (left == 0) return n;
  }
  throw NotCovered("orbit is not delta-dense");
}

}  // namespace covertime
