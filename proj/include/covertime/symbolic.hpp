#pragma once
// Symbolic coding: words, cylinder intervals, symbolic measures,
// quasi-Bernoulli diagnostics and inner/outer cylinder approximation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "map_core.hpp"
#include "rng.hpp"

namespace covertime {

using Word = std::vector<std::size_t>;

inline std::string word_to_string(const Word& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  return os.str();
}

inline void check_admissible(const MapSystem& sys, const Word& w) {
  for (auto s : w)
    if (!sys.valid_label(s))
      throw Inadmissible("symbol " + std::to_string(s) + " is not a label of " + sys.name());
}

// Pi([w]): inverse branches composed right to left, applied to [0,1].
inline Interval project_unchecked(const MapSystem& sys, const Word& w, std::size_t from = 0,
                                  std::size_t to = std::string::npos) {
  if (to > w.size()) to = w.size();
  Interval j{0.0, 1.0};
  for (std::size_t i = to; i > from; --i) j = sys.inverse_image(w[i - 1], j);
  return j;
}

inline Interval project(const MapSystem& sys, const Word& w, std::size_t max_depth = 64) {
  if (w.size() > max_depth)
    throw DepthExceeded("word depth " + std::to_string(w.size()) + " exceeds cap " +
                        std::to_string(max_depth));
  check_admissible(sys, w);
  return project_unchecked(sys, w);
}

// Forward itinerary of x, `depth` symbols.
inline Word itinerary(const MapSystem& sys, double x, std::size_t depth) {
  Word w;
  w.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    const auto k = sys.branch_of(x);
    if (!k) throw OutOfDomain("itinerary left the domain");
    w.push_back(*k);
    x = sys.forward(*k, x);
  }
  return w;
}

enum class SymKind { Bernoulli, Geometric, Gibbs, LebesgueCoded };

// A shift-invariant measure on the coding space, and its pushforward.
struct SymbolicMeasure {
  SymKind kind = SymKind::Bernoulli;
  std::size_t base = 0;
  std::vector<double> weights;  // Bernoulli: weight of label base+i
  std::vector<double> cumulative;
  // true when the pushforward is Lebesgue (doubling and linear full branches)
  bool lebesgue_equivalent = false;
  // Gibbs: distribution function of the pushforward and its inverse
  std::function<double(double)> cdf;
  std::function<double(double)> inv_cdf;
  std::function<double(double, double)> interval_mass;
  double quasi_bernoulli_constant_estimate = 1.0;

  bool bernoulli_kind() const { return kind == SymKind::Bernoulli || kind == SymKind::Geometric; }

  double symbol_weight(std::size_t k) const {
    if (kind == SymKind::Geometric) {
      if (k < base) return 0.0;
      return std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k - base + 1, 2000)));
    }
    if (kind != SymKind::Bernoulli) throw Unsupported("symbol weights need a Bernoulli measure");
    if (k < base || k - base >= weights.size()) return 0.0;
    return weights[k - base];
  }

  // P(symbol >= k)
  double tail_weight(std::size_t k) const {
    if (k <= base) return 1.0;
    if (kind == SymKind::Geometric)
      return std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k - base, 2000)));
    if (kind != SymKind::Bernoulli) throw Unsupported("tail weights need a Bernoulli measure");
    if (k - base >= weights.size()) return 0.0;
    return 1.0 - cumulative[k - base - 1];
  }

  std::size_t sample_symbol(Rng& g) const {
    if (kind == SymKind::Geometric) {
      std::size_t k = base;
      for (;;) {
        const std::uint64_t r = g();
        if (r != 0) return k + static_cast<std::size_t>(std::countr_zero(r));
        k += 64;
      }
    }
    if (kind != SymKind::Bernoulli) throw Unsupported("symbol streams need a Bernoulli measure");
    const double u = uniform01(g);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    if (i >= weights.size()) i = weights.size() - 1;
    while (weights[i] == 0.0 && i > 0) --i;
    return base + i;
  }

  // A symbol drawn conditionally on being >= k.
  std::size_t sample_symbol_at_least(Rng& g, std::size_t k) const {
    if (k <= base) return sample_symbol(g);
    if (kind == SymKind::Geometric) return k - base + sample_symbol(g);
    const double t = tail_weight(k);
    if (!(t > 0)) throw Unsupported("conditioning on a null event");
    const double u = 1.0 - t + t * uniform01(g);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    i = std::clamp<std::size_t>(i, k - base, weights.size() - 1);
    return base + i;
  }
};

inline SymbolicMeasure bernoulli_measure(std::size_t base, std::vector<double> w) {
  SymbolicMeasure m;
  m.kind = SymKind::Bernoulli;
  m.base = base;
  double tot = 0;
  for (double x : w) {
    if (x < 0) throw ConfigError("negative Bernoulli weight");
    tot += x;
  }
  if (std::fabs(tot - 1) > 1e-9) throw ConfigError("Bernoulli weights must sum to 1");
  m.weights = w;
  double acc = 0;
  for (double x : w) {
    acc += x;
    m.cumulative.push_back(acc);
  }
  m.cumulative.back() = 1.0;
  return m;
}

inline SymbolicMeasure geometric_measure(std::size_t base) {
  SymbolicMeasure m;
  m.kind = SymKind::Geometric;
  m.base = base;
  return m;
}

inline SymbolicMeasure gauss_measure_symbolic() {
  SymbolicMeasure m;
  m.kind = SymKind::Gibbs;
  m.base = 1;
  m.cdf = [](double x) { return std::log1p(std::clamp(x, 0.0, 1.0)) / std::numbers::ln2; };
  m.inv_cdf = [](double u) { return std::expm1(u * std::numbers::ln2); };
  m.interval_mass = [](double a, double b) {
    a = std::clamp(a, 0.0, 1.0);
    b = std::clamp(b, 0.0, 1.0);
    if (b <= a) return 0.0;
    return std::log1p((b - a) / (1 + a)) / std::numbers::ln2;
  };
  m.quasi_bernoulli_constant_estimate = NAN;
  return m;
}

inline SymbolicMeasure lebesgue_coded(const MapSystem& sys) {
  SymbolicMeasure m;
  m.kind = SymKind::LebesgueCoded;
  m.base = sys.label_base();
  m.lebesgue_equivalent = true;
  m.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  m.inv_cdf = [](double u) { return u; };
  m.interval_mass = [](double a, double b) {
    return std::max(0.0, std::min(b, 1.0) - std::max(a, 0.0));
  };
  return m;
}

// The measure each built-in is studied with, when it has a symbolic form.
inline SymbolicMeasure default_symbolic_measure(const MapSystem& sys) {
  switch (sys.kind()) {
    case MapKind::Doubling: {
      auto m = bernoulli_measure(0, {0.5, 0.5});
      m.lebesgue_equivalent = true;
      return m;
    }
    case MapKind::FullBranchedLinear: {
      auto m = bernoulli_measure(0, sys.widths());
      m.lebesgue_equivalent = true;
      return m;
    }
    case MapKind::SlowBernoulliLsv:
      return bernoulli_measure(1, {0.5, 0.5});
    case MapKind::QuadraticGap:
      return geometric_measure(1);
    case MapKind::Gauss:
      return gauss_measure_symbolic();
    case MapKind::Lsv:
      break;
  }
  throw Unsupported("the LSV absolutely continuous measure has no symbolic form");
}

inline double cylinder_measure(const MapSystem& sys, const SymbolicMeasure& m, const Word& w) {
  check_admissible(sys, w);
  if (m.bernoulli_kind()) {
    double p = 1.0;
    for (auto s : w) p *= m.symbol_weight(s);
    return p;
  }
  const Interval j = project_unchecked(sys, w);
  return m.interval_mass(j.lo, j.hi);
}

namespace detail {

// Bernoulli pushforward mass of U by descent through the branch structure.
// Needs increasing branch order; each level keeps at most one partial piece
// per endpoint, so the cost is linear in the depth reached.
inline void bernoulli_descend(const MapSystem& sys, const SymbolicMeasure& m, Interval u,
                              double mult, double& acc, int depth) {
  u = u.intersect({0.0, 1.0});
  if (u.length() <= 0 || mult <= 0) return;
  if (u.lo <= 0.0 && u.hi >= 1.0) {
    acc += mult;
    return;
  }
  if (depth > 4000 || mult < 1e-30 || (acc > 0 && mult < 1e-18 * acc)) return;
  const auto kl = sys.branch_of(u.lo);
  if (!kl) return;
  const auto kh_opt = sys.branch_of(u.hi);
  const bool open_top = !kh_opt || (sys.countable() && u.hi >= 1.0);
  const std::size_t kh = open_top ? std::string::npos : *kh_opt;
  if (kh == *kl) {
    const Interval d = sys.domain(*kl);
    const Interval piece = sys.forward_image(*kl, u.intersect(d));
    bernoulli_descend(sys, m, piece, mult * m.symbol_weight(*kl), acc, depth + 1);
    return;
  }
  {
    const Interval d = sys.domain(*kl);
    if (u.lo <= d.lo) {
      acc += mult * m.symbol_weight(*kl);
    } else {
      const Interval piece = sys.forward_image(*kl, Interval{u.lo, d.hi});
      bernoulli_descend(sys, m, piece, mult * m.symbol_weight(*kl), acc, depth + 1);
    }
  }
  if (open_top) {
    acc += mult * m.tail_weight(*kl + 1);
    return;
  }
  if (kh > *kl + 1) acc += mult * (m.tail_weight(*kl + 1) - m.tail_weight(kh));
  const Interval d = sys.domain(kh);
  if (u.hi >= d.hi) {
    acc += mult * m.symbol_weight(kh);
  } else {
    const Interval piece = sys.forward_image(kh, Interval{d.lo, u.hi});
    bernoulli_descend(sys, m, piece, mult * m.symbol_weight(kh), acc, depth + 1);
  }
}

}  // namespace detail

// mu(U) for the pushforward of m.
inline double interval_measure(const MapSystem& sys, const SymbolicMeasure& m, Interval u) {
  u = u.intersect({0.0, 1.0});
  if (u.length() <= 0) return 0.0;
  if (m.lebesgue_equivalent) return u.length();
  if (!m.bernoulli_kind()) return m.interval_mass(u.lo, u.hi);
  if (!sys.increasing_order()) throw Unsupported("descent needs increasing branch order");
  double acc = 0;
  detail::bernoulli_descend(sys, m, u, 1.0, acc, 0);
  return std::min(acc, 1.0);
}

inline Word sample_symbol_stream(const SymbolicMeasure& m, std::uint64_t seed, std::size_t length) {
  if (!m.bernoulli_kind()) throw Unsupported("symbol streams need a Bernoulli measure");
  Rng g = make_rng(seed);
  Word w(length);
  for (auto& s : w) s = m.sample_symbol(g);
  return w;
}

// ---------------------------------------------------------------------------
// Inner and outer cylinder approximation of an interval.

struct CylinderApprox {
  std::vector<Word> inner;
  std::vector<Word> outer;
  double target_measure = 0;
  double inner_measure = 0;
  double outer_measure = 0;
  // mass of countable-alphabet tails inside the outer set that were not listed
  double outer_tail_mass = 0;
  std::size_t depth_left = 0;
  std::size_t depth_right = 0;
};

namespace detail {

struct ChildScan {
  std::vector<std::size_t> labels;  // ordered by label
  double tail_mass = 0;             // mass of unlisted children meeting U
};

// Labels k with Pi([w k]) overlapping u in positive length.
inline ChildScan children_overlapping(const MapSystem& sys, const SymbolicMeasure& m,
                                      const Word& w, const Interval& u, double tol) {
  ChildScan out;
  Word c = w;
  c.push_back(0);
  auto overlaps = [&](std::size_t k) {
    c.back() = k;
    return project_unchecked(sys, c).overlaps(u);
  };
  if (!sys.countable()) {
    for (std::size_t k = sys.label_base(); k < sys.label_end(); ++k)
      if (overlaps(k)) out.labels.push_back(k);
    return out;
  }
  // Locate the label range through the forward image of u inside Pi([w]).
  const Interval j = project_unchecked(sys, w);
  const Interval v = u.intersect(j);
  if (v.length() <= 0) return out;
  double a = v.lo, b = v.hi;
  for (auto s : w) {
    a = sys.forward(s, a);
    b = sys.forward(s, b);
  }
  const Interval y{std::min(a, b), std::max(a, b)};
  const bool gauss = sys.kind() == MapKind::Gauss;
  const auto k1 = sys.branch_of(y.lo);
  const auto k2 = sys.branch_of(y.hi);
  std::size_t lo, hi;
  if (gauss) {
    lo = k2 ? *k2 : 1;
    hi = (k1 && y.lo > 0) ? *k1 + 1 : sys.label_end() - 1;
  } else {
    lo = k1 ? *k1 : sys.label_base();
    hi = (k2 && y.hi < 1) ? *k2 + 1 : sys.label_end() - 1;
  }
  lo = lo > sys.label_base() ? lo - 1 : sys.label_base();
  hi = std::min(hi, sys.label_end() - 1);
  // mass of the children with labels in [k0, hi]
  auto block_mass = [&](std::size_t k0) {
    Interval by = gauss ? Interval{1.0 / static_cast<double>(hi + 1), 1.0 / static_cast<double>(k0)}
                        : Interval{MapSystem::qg_a(k0 - 1), MapSystem::qg_a(hi)};
    for (std::size_t i = w.size(); i > 0; --i) by = sys.inverse_image(w[i - 1], by);
    return m.bernoulli_kind() ? interval_measure(sys, m, by) : m.interval_mass(by.lo, by.hi);
  };
  for (std::size_t k = lo; k <= hi; ++k) {
    if (k > lo + 4 && k < hi) {
      const double rest = block_mass(k);
      if (rest < tol) {
        out.tail_mass = rest;
        break;
      }
    }
    if (overlaps(k)) out.labels.push_back(k);
  }
  return out;
}

inline bool inside(const Interval& j, const Interval& u, double tol = 1e-15) {
  return j.lo >= u.lo - tol && j.hi <= u.hi + tol;
}

inline Word smallest_containing(const MapSystem& sys, const SymbolicMeasure& m, Word w,
                                const Interval& v, double tol, std::size_t cap) {
  while (w.size() < cap) {
    if (inside(project_unchecked(sys, w), v)) return w;
    const auto kids = children_overlapping(sys, m, w, v, tol);
    if (kids.labels.size() != 1 || kids.tail_mass > 0) return w;
    w.push_back(kids.labels[0]);
  }
  return w;
}

inline void refine_block(const MapSystem& sys, const SymbolicMeasure& m, const Word& node,
                         const Interval& u, std::size_t target_depth, double tol,
                         CylinderApprox& out) {
  const Interval j = project_unchecked(sys, node);
  if (!j.overlaps(u)) return;
  if (inside(j, u)) {
    const double mu = cylinder_measure(sys, m, node);
    out.inner.push_back(node);
    out.outer.push_back(node);
    out.inner_measure += mu;
    out.outer_measure += mu;
    return;
  }
  if (node.size() >= target_depth) {
    out.outer.push_back(node);
    out.outer_measure += cylinder_measure(sys, m, node);
    return;
  }
  const auto kids = children_overlapping(sys, m, node, u, tol);
  out.outer_tail_mass += kids.tail_mass;
  out.outer_measure += kids.tail_mass;
  Word c = node;
  c.push_back(0);
  for (auto k : kids.labels) {
    c.back() = k;
    refine_block(sys, m, c, u, target_depth, tol, out);
  }
}

}  // namespace detail

inline CylinderApprox approximate_interval_by_cylinders(const MapSystem& sys,
                                                        const SymbolicMeasure& m, Interval u,
                                                        double kappa, std::size_t max_depth = 64) {
  if (!(kappa > 0 && kappa < 1)) throw ConfigError("kappa must lie in (0,1)");
  u = u.intersect({0.0, 1.0});
  CylinderApprox res;
  res.target_measure = interval_measure(sys, m, u);
  if (!(res.target_measure > 0)) throw ConfigError("interval has zero measure");
  const double tol = 1e-9 * kappa * res.target_measure;

  // descend to the node where u splits
  Word w;
  detail::ChildScan kids;
  for (;;) {
    if (detail::inside(project_unchecked(sys, w), u)) {
      res.inner = res.outer = {w};
      res.inner_measure = res.outer_measure = cylinder_measure(sys, m, w);
      res.depth_left = res.depth_right = w.size();
      return res;
    }
    kids = detail::children_overlapping(sys, m, w, u, tol);
    if (kids.labels.size() == 1 && kids.tail_mass == 0 && w.size() < max_depth) {
      w.push_back(kids.labels[0]);
      continue;
    }
    break;
  }
  std::vector<Word> blocks;
  if (kids.labels.size() == 2 && kids.tail_mass == 0) {
    for (auto k : kids.labels) {
      Word c = w;
      c.push_back(k);
      const Interval part = u.intersect(project_unchecked(sys, c));
      blocks.push_back(detail::smallest_containing(sys, m, c, part, tol, max_depth));
    }
    // keep the left block first
    if (project_unchecked(sys, blocks[0]).lo > project_unchecked(sys, blocks[1]).lo)
      std::swap(blocks[0], blocks[1]);
  } else {
    blocks.push_back(w);
  }
  for (std::size_t extra = 0;; ++extra) {
    CylinderApprox trial;
    trial.target_measure = res.target_measure;
    std::size_t deepest = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::size_t target = blocks[b].size() + extra;
      deepest = std::max(deepest, target);
      detail::refine_block(sys, m, blocks[b], u, target, tol, trial);
      if (b == 0) trial.depth_left = target;
      trial.depth_right = target;
    }
    if (trial.inner_measure >= (1 - kappa) * res.target_measure &&
        trial.outer_measure <= (1 + kappa) * res.target_measure)
      return trial;
    if (deepest >= max_depth)
      throw DepthExceeded("cylinder approximation needs depth beyond " + std::to_string(max_depth));
  }
}

// ---------------------------------------------------------------------------
// Quasi-Bernoulli and adjacent-ratio diagnostics.

inline double estimate_quasi_bernoulli_constant(const MapSystem& sys, const SymbolicMeasure& m,
                                                std::size_t depth, std::size_t sample_count) {
  if (depth < 1) throw ConfigError("depth must be at least 1");
  if (m.bernoulli_kind() || m.lebesgue_equivalent) return 1.0;
  Rng g = make_rng(0x5eedc0ffeeULL);
  double worst = 1.0;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const Word a = itinerary(sys, m.inv_cdf(uniform_open(g)), depth);
    const Word b = itinerary(sys, m.inv_cdf(uniform_open(g)), depth);
    Word ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double r = cylinder_measure(sys, m, ab) /
                     (cylinder_measure(sys, m, a) * cylinder_measure(sys, m, b));
    if (std::isfinite(r) && r > 0) worst = std::max(worst, std::max(r, 1.0 / r));
  }
  return worst;
}

// Largest measure ratio between adjacent cylinders of the given depth, with
// every symbol restricted to [label_lo, label_hi].
inline double adjacent_cylinder_ratio_check(const MapSystem& sys, const SymbolicMeasure& m,
                                            std::size_t depth, std::size_t label_lo,
                                            std::size_t label_hi) {
  if (depth < 1) throw ConfigError("depth must be at least 1");
  label_lo = std::max(label_lo, sys.label_base());
  if (!sys.countable()) label_hi = std::min(label_hi, sys.label_end() - 1);
  const std::size_t span = label_hi - label_lo + 1;
  double count = std::pow(static_cast<double>(span), static_cast<double>(depth));
  if (count > 2e6) throw ConfigError("too many cylinders to enumerate");
  struct Cell {
    Interval j;
    double mu;
  };
  std::vector<Cell> cells;
  Word w(depth, label_lo);
  for (;;) {
    cells.push_back({project_unchecked(sys, w), cylinder_measure(sys, m, w)});
    std::size_t i = depth;
    while (i > 0) {
      if (w[i - 1] < label_hi) {
        ++w[i - 1];
        break;
      }
      w[i - 1] = label_lo;
      --i;
    }
    if (i == 0) break;
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.j.lo < b.j.lo; });
  double worst = 1.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (std::fabs(cells[i - 1].j.hi - cells[i].j.lo) > 1e-12) continue;
    const double r = cells[i - 1].mu / cells[i].mu;
    worst = std::max(worst, std::max(r, 1.0 / r));
  }
  return worst;
}

}  // namespace covertime
