#pragma once
// Hole families: uniform grids, the greedy cylinder sweep with nested
// refinement, word-tree families of separated cylinders, and property checks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "measures.hpp"
#include "montecarlo.hpp"
#include "stats.hpp"
#include "symbolic.hpp"

namespace covertime {

enum class Provenance { UniformGrid, PropU, PropUPrime };

inline std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::UniformGrid: return "uniform-grid";
    case Provenance::PropU: return "prop-u";
    case Provenance::PropUPrime: return "prop-u-prime";
  }
  return "";
}

struct HoleFamily {
  double delta = 0.0;
  std::vector<Interval> cells;
  std::vector<double> centers;
  double t = 1.0 / 3.0;
  double T = 1.0;
  Provenance provenance = Provenance::UniformGrid;
  // longest cylinder word used to describe each cell; 0 when unknown
  std::vector<std::size_t> depths;
  // cylinder-word union per cell, kept for families up to kWordLimit cells
  std::vector<std::string> words;
  static constexpr std::size_t kWordLimit = 20000;

  CoverTarget target() const {
    return cells_target(cells, delta, t, T,
                        provenance == Provenance::UniformGrid ? TargetKind::UniformBins
                                                              : TargetKind::PartitionFamily);
  }
};

// ceil(1/delta) equal cells; on the doubling map with delta = 2^-k they are
// the depth-k cylinders.
inline HoleFamily build_uniform_family(double delta, const MapSystem* sys = nullptr) {
  if (!(delta > 0 && delta <= 0.25)) throw ConfigError("delta must lie in (0, 1/4]");
  HoleFamily f;
  f.delta = delta;
  f.cells = uniform_bins(delta).cells;
  const std::size_t n = f.cells.size();
  const bool dyadic = sys && sys->kind() == MapKind::Doubling && (n & (n - 1)) == 0;
  const std::size_t k = dyadic ? static_cast<std::size_t>(std::countr_zero(n)) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    f.centers.push_back(f.cells[i].mid());
    f.depths.push_back(k);
    if (dyadic && n <= HoleFamily::kWordLimit) {
      Word w(k);
      for (std::size_t b = 0; b < k; ++b) w[b] = (i >> (k - 1 - b)) & 1;
      f.words.push_back("[" + word_to_string(w) + "]");
    }
  }
  return f;
}

// Constants of the sweep construction.
struct PropUConfig {
  std::size_t n1 = 0;  // 0 = smallest admissible value
  double beta_tilde = 0.9;
  double beta = 0.0;
  double c_m = 1.0;
  double C_m = 1.0;
  double C_bd = 1.0;
  double C_d = 0.0;
  double s = 1.0;
  double delta0 = 0.25;
  std::size_t n1_cap = 20;
  std::size_t depth_cap = 60;
  bool analytic = true;  // false when C_d, C_bd come from sampling
  bool n1_user_set = false;
};

namespace detail {

// sup over depth-n inverse branches of |h_w'|
inline double sup_exp_birkhoff(const MapSystem& sys, std::size_t n) {
  switch (sys.kind()) {
    case MapKind::Doubling:
      return std::ldexp(1.0, -static_cast<int>(n));
    case MapKind::FullBranchedLinear:
      return std::pow(*std::max_element(sys.widths().begin(), sys.widths().end()), static_cast<double>(n));
    case MapKind::QuadraticGap:
      return std::pow(MapSystem::qg_a(1), static_cast<double>(n));
    case MapKind::Gauss: {
      // all-ones word at y = 0: 1/F_{n+1}^2
      double a = 1, b = 1;
      for (std::size_t i = 1; i < n; ++i) {
        const double c = a + b;
        a = b;
        b = c;
      }
      return 1.0 / (b * b);
    }
    default: {
      double best = 0;
      for (std::size_t k = sys.label_base(); k < sys.label_end(); ++k) best = std::max(best, 1.0 / sys.derivative(k, sys.domain(k).lo));
      return std::pow(best, static_cast<double>(n));
    }
  }
}

}  // namespace detail

// Constants for the built-in maps; throws ConstantsInfeasible when no n1 up
// to the cap satisfies (2 n1 + 5)(C_d + 1) sup e^{S_n1 phi} < 1.
inline PropUConfig prop_u_config(const MapSystem& sys, std::size_t n1 = 0, double beta_tilde = 0.9) {
  PropUConfig c;
  c.beta_tilde = beta_tilde;
  switch (sys.kind()) {
    case MapKind::Doubling:
    case MapKind::FullBranchedLinear:
    case MapKind::QuadraticGap:
      c.C_d = 0.0;
      c.C_bd = 1.0;
      break;
    case MapKind::Gauss:
      // |h_w'(u)/h_w'(v)| = ((q + q'v)/(q + q'u))^2 with q' <= q
      c.C_d = 3.0;
      c.C_bd = 4.0;
      break;
    default:
      throw ConstantsInfeasible(sys.name() + " has a neutral fixed point: sup e^{S_n phi} = 1 for all n");
  }
  if (n1 == 0) {
    for (std::size_t n = 1; n <= c.n1_cap; ++n)
      if ((2.0 * n + 5) * (c.C_d + 1) * detail::sup_exp_birkhoff(sys, n) < 1) {
        n1 = n;
        break;
      }
    if (n1 == 0) throw ConstantsInfeasible("no admissible n1 up to " + std::to_string(c.n1_cap));
  } else {
    c.n1_user_set = true;
  }
  c.n1 = n1;
  if (!(c.beta_tilde > 0 && c.beta_tilde < c.c_m)) throw ConfigError("beta_tilde must lie in (0, c_m)");
  c.beta = c.beta_tilde * c.c_m /
           (c.C_m * std::pow(c.C_bd, c.s) * static_cast<double>(c.n1 + 1) * std::pow(1 + c.C_d, 3));
  return c;
}

namespace detail {

enum class PieceKind { U, L, R };

struct SweepPiece {
  Interval iv;
  PieceKind kind = PieceKind::U;
  std::size_t depth = 0;
  std::string words;
};

struct Child {
  Interval iv;
  std::size_t label = 0;
  bool tail = false;  // union of all labels >= label
};

inline std::string describe(const Word& parent, const Child& c) {
  std::string p = word_to_string(parent);
  if (!p.empty()) p += ",";
  return "[" + p + std::to_string(c.label) + (c.tail ? "+" : "") + "]";
}

// Children of Pi([w]) sorted left to right; for countable alphabets the
// labels past K are merged into one tail block shorter than tail_len.
inline std::vector<Child> sorted_children(const MapSystem& sys, const Word& w, double tail_len) {
  std::vector<Child> out;
  auto child_iv = [&](const Interval& dom) {
    Interval j = dom;
    for (std::size_t i = w.size(); i > 0; --i) j = sys.inverse_image(w[i - 1], j);
    return j;
  };
  std::size_t end = sys.label_end();
  if (sys.countable()) {
    auto tail_dom = [&](std::size_t k) {
      const Interval d = sys.domain(k);
      return sys.increasing_order() ? Interval{d.lo, 1.0} : Interval{0.0, d.hi};
    };
    std::size_t k = sys.label_base() + 1;
    while (child_iv(tail_dom(k)).length() >= tail_len) k *= 2;
    std::size_t lo = k / 2, hi = k;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (child_iv(tail_dom(mid)).length() < tail_len) hi = mid;
      else lo = mid;
    }
    end = std::max<std::size_t>(hi, sys.label_base() + 1);
    out.push_back({child_iv(tail_dom(end)), end, true});
  }
  for (std::size_t k = sys.label_base(); k < end; ++k) out.push_back({child_iv(sys.domain(k)), k, false});
  std::sort(out.begin(), out.end(), [](const Child& a, const Child& b) { return a.iv.lo < b.iv.lo; });
  return out;
}

struct Sweep {
  const MapSystem& sys;
  const PropUConfig& cfg;
  double delta;
  std::size_t terminal_depth;
  bool record_words;
  std::vector<SweepPiece> pieces;

  // Split Pi([w]) into pieces of length in [X/3, X], each a union of
  // depth-terminal_depth cylinders.
  void terminal_split(const Word& w, const Interval& jstar) {
    const double x = std::pow(cfg.beta / 4, static_cast<double>(cfg.n1)) * delta;
    double e = jstar.lo;
    std::vector<double> cuts = {e};
    for (;;) {
      const double y = e + x / 3;
      if (jstar.hi - y < x / 3) break;
      // right end of the depth-D cylinder containing y
      const Interval j = project_unchecked(sys, itinerary(sys, y, terminal_depth));
      const double c = std::min(j.hi, jstar.hi);
      if (jstar.hi - c < x / 3) break;
      cuts.push_back(c);
      e = c;
    }
    cuts.push_back(jstar.hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      SweepPiece p;
      p.iv = {cuts[i], cuts[i + 1]};
      p.kind = PieceKind::U;
      p.depth = terminal_depth;
      if (record_words)
        p.words = "depth-" + std::to_string(terminal_depth) + " cylinders of [" + word_to_string(w) + "] in [" +
                  std::to_string(p.iv.lo) + "," + std::to_string(p.iv.hi) + "]";
      pieces.push_back(std::move(p));
    }
  }

  // Level-n sweep over the n-cylinders inside Pi([w]).
  void level(const Word& w, std::size_t n) {
    const double lo_thr = n == 1 ? delta / 2 : delta * std::pow(cfg.beta / 4, static_cast<double>(n - 1));
    const double u_thr = n == 1 ? 1.5 * delta : 2 * lo_thr;
    const auto kids = sorted_children(sys, w, lo_thr / 2);
    std::size_t pos = 0;
    while (pos < kids.size()) {
      const std::size_t start = pos;
      double len = 0;
      std::string desc;
      while (pos < kids.size() && len < lo_thr) {
        len = kids[pos].iv.hi - kids[start].iv.lo;
        if (record_words) desc += (desc.empty() ? "" : "+") + describe(w, kids[pos]);
        ++pos;
      }
      const Interval uni{kids[start].iv.lo, kids[pos - 1].iv.hi};
      if (len < lo_thr) {
        pieces.push_back({uni, PieceKind::R, n, desc});
      } else if (len < u_thr) {
        pieces.push_back({uni, PieceKind::U, n, desc});
      } else {
        const Child& js = kids[pos - 1];
        if (js.iv.lo > uni.lo) {
          std::string ld;
          if (record_words)
            for (std::size_t i = start; i + 1 < pos; ++i) ld += (ld.empty() ? "" : "+") + describe(w, kids[i]);
          pieces.push_back({{uni.lo, js.iv.lo}, PieceKind::L, n, ld});
        }
        Word v = w;
        v.push_back(js.label);
        if (n < cfg.n1) level(v, n + 1);
        else terminal_split(v, js.iv);
      }
    }
  }
};

}  // namespace detail

inline HoleFamily build_prop_u_family(const MapSystem& sys, const PropUConfig& cfg, double delta) {
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  if (cfg.n1 < 1) throw ConfigError("n1 must be at least 1");
  // L_delta: every depth n1 + L cylinder has diameter <= (delta/3)(beta/4)^n1
  const double x = std::pow(cfg.beta / 4, static_cast<double>(cfg.n1)) * delta / 3;
  std::size_t depth = cfg.n1;
  while (sys.max_cylinder_diameter(depth) > x) {
    ++depth;
    if (depth > cfg.depth_cap)
      throw DepthOverflow("terminal depth exceeds cap " + std::to_string(cfg.depth_cap));
  }
  detail::Sweep sw{sys, cfg, delta, depth, 1 / (1.5 * x) <= HoleFamily::kWordLimit, {}};
  sw.level({}, 1);
  auto& p = sw.pieces;
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.iv.lo < b.iv.lo; });
  // left pieces join the nearest U to their right, then right pieces join
  // the nearest U to their left
  using detail::PieceKind;
  std::vector<detail::SweepPiece> merged;
  std::vector<detail::SweepPiece> pending;
  for (auto& q : p) {
    if (q.kind == PieceKind::L) {
      pending.push_back(std::move(q));
      continue;
    }
    if (q.kind == PieceKind::U && !pending.empty()) {
      for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
        q.iv.lo = std::min(q.iv.lo, it->iv.lo);
        q.depth = std::max(q.depth, it->depth);
        q.words = it->words + " + " + q.words;
      }
      pending.clear();
    }
    merged.push_back(std::move(q));
  }
  for (auto& q : pending) merged.push_back(std::move(q));
  std::vector<detail::SweepPiece> out;
  for (auto& q : merged) {
    if (q.kind != PieceKind::U && !out.empty()) {
      out.back().iv.hi = std::max(out.back().iv.hi, q.iv.hi);
      out.back().depth = std::max(out.back().depth, q.depth);
      out.back().words += " + " + q.words;
      continue;
    }
    out.push_back(std::move(q));
  }
  HoleFamily f;
  f.delta = delta;
  f.provenance = Provenance::PropU;
  // the shortest cell is a terminal piece of length at least X/3
  f.t = x / (2 * delta) * (1 - 1e-9);
  f.T = 2.0;
  const bool keep = out.size() <= HoleFamily::kWordLimit;
  for (auto& q : out) {
    f.cells.push_back(q.iv);
    f.centers.push_back(q.iv.mid());
    f.depths.push_back(q.depth);
    if (keep) f.words.push_back(std::move(q.words));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Word-tree family of separated cylinders [w a b^n3].

struct PropUPrimeReport {
  std::size_t n3 = 0;
  std::size_t candidates = 0;   // words passing the derivative rule
  std::size_t disjoint = 0;     // after disjointness thinning
  std::size_t separated = 0;    // after separation thinning
  std::vector<Word> words;      // full words w a b^n3 of the emitted cells
};

// K = 1 + sum_n sup_{Z in Z^n} mu(Z), truncated once terms drop below 1e-16
inline double cylinder_mass_sum(const MapSystem& sys, const SymbolicMeasure& m) {
  double k = 1;
  for (std::size_t n = 1; n < 200; ++n) {
    double s;
    if (m.bernoulli_kind()) {
      double w = 0;
      if (m.kind == SymKind::Geometric) w = 0.5;
      else w = *std::max_element(m.weights.begin(), m.weights.end());
      s = std::pow(w, static_cast<double>(n));
    } else {
      s = m.interval_mass(0.0, sys.max_cylinder_diameter(n)) * 2;
    }
    k += s;
    if (s < 1e-16) break;
  }
  return k;
}

// Smallest n3 with C_*^3 mu([a b^n3]) K < 1.
inline std::size_t minimal_n3(const MapSystem& sys, const SymbolicMeasure& m, std::size_t a, std::size_t b,
                              double c_star = 1.0) {
  const double k = cylinder_mass_sum(sys, m);
  for (std::size_t n = 0; n < 64; ++n) {
    Word w = {a};
    w.insert(w.end(), n, b);
    if (std::pow(c_star, 3) * cylinder_measure(sys, m, w) * k < 1) return n;
  }
  throw ConstantsInfeasible("no n3 below 64");
}

namespace detail {

// sup_y |h_w'(y)| over y in {0, 1/2, 1}
inline double sup_inverse_derivative(const MapSystem& sys, const Word& w) {
  double best = 0;
  for (double y0 : {0.0, 0.5, 1.0}) {
    double y = y0, d = 1;
    for (std::size_t i = w.size(); i > 0; --i) {
      d *= sys.inverse_derivative(w[i - 1], y);
      y = sys.inverse(w[i - 1], y);
    }
    best = std::max(best, d);
  }
  return best;
}

// f^i(Pi[u]) meets Pi[v] in more than a point iff one of the words u_i..,
// v is a prefix of the other
inline bool shifted_overlap(const Word& u, std::size_t i, const Word& v) {
  if (i >= u.size()) return true;
  const std::size_t n = std::min(u.size() - i, v.size());
  return std::equal(u.begin() + static_cast<long>(i), u.begin() + static_cast<long>(i + n), v.begin());
}

inline bool interacts(const Word& u, const Word& v, std::size_t n3, bool same) {
  for (std::size_t i = same ? 1 : 0; i <= n3; ++i)
    if (shifted_overlap(u, i, v) || (!same && shifted_overlap(v, i, u))) return true;
  return false;
}

inline bool is_subword(const Word& a, const Word& b) {
  return std::search(b.begin(), b.end(), a.begin(), a.end()) != b.end();
}

}  // namespace detail

inline HoleFamily build_prop_u_prime_family(const MapSystem& sys, double delta, std::size_t a, std::size_t b,
                                            std::size_t n3, PropUPrimeReport* report = nullptr) {
  if (!sys.valid_label(a) || !sys.valid_label(b) || a == b) throw ConfigError("a and b must be distinct labels");
  const Word tailw = [&] {
    Word t = {a};
    t.insert(t.end(), n3, b);
    return t;
  }();
  // words w over {a, b} with sup|h_w'| <= delta < sup|h_{w-}'|
  std::vector<Word> found, frontier = {Word{}};
  while (!frontier.empty()) {
    std::vector<Word> next;
    for (const auto& w : frontier) {
      if (detail::sup_inverse_derivative(sys, w) <= delta) {
        found.push_back(w);
        continue;
      }
      if (w.size() >= 60) throw DepthOverflow("word tree deeper than 60");
      for (std::size_t s : {a, b}) {
        Word c = w;
        c.push_back(s);
        next.push_back(std::move(c));
      }
    }
    frontier = std::move(next);
  }
  if (found.empty() || (found.size() == 1 && found[0].empty())) throw EmptyFamily("delta too large for a family");
  struct Cand {
    Word full;
    Interval iv;
  };
  std::vector<Cand> cands;
  for (const auto& w : found) {
    Word full = w;
    full.insert(full.end(), tailw.begin(), tailw.end());
    cands.push_back({full, project_unchecked(sys, full)});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.iv.lo < y.iv.lo; });
  // drop the later of any two cells that touch
  std::vector<Cand> disjoint;
  for (auto& c : cands)
    if (disjoint.empty() || c.iv.lo > disjoint.back().iv.hi) disjoint.push_back(std::move(c));
  // keep a cell when it does not interact with itself or any kept cell
  std::vector<Cand> kept;
  for (auto& c : disjoint) {
    if (detail::interacts(c.full, c.full, n3, true)) continue;
    bool ok = true;
    for (const auto& k : kept)
      if (detail::interacts(c.full, k.full, n3, false)) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(std::move(c));
  }
  if (kept.empty()) throw EmptyFamily("separation thinning removed every cell");
  HoleFamily f;
  f.delta = delta;
  f.provenance = Provenance::PropUPrime;
  double tmin = INFINITY, tmax = 0;
  for (const auto& c : kept) {
    f.cells.push_back(c.iv);
    f.centers.push_back(c.iv.mid());
    f.depths.push_back(c.full.size());
    if (kept.size() <= HoleFamily::kWordLimit) f.words.push_back("[" + word_to_string(c.full) + "]");
    tmin = std::min(tmin, c.iv.length() / 2 / delta);
    tmax = std::max(tmax, c.iv.length() / 2 / delta);
  }
  f.t = tmin * (1 - 1e-9);
  f.T = std::max(tmax * (1 + 1e-9), f.t * 2);
  if (report) {
    report->n3 = n3;
    report->candidates = cands.size();
    report->disjoint = disjoint.size();
    report->separated = kept.size();
    report->words.clear();
    for (const auto& c : kept) report->words.push_back(c.full);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Property checks.

struct PropertyReport {
  bool a = false, b = false, c = false, d = false, e = false;
  // (a): smallest inner and largest outer radius over cells, in units of delta
  double worst_t = 0.0, worst_T = 0.0;
  std::size_t a_witness = 0;
  // (b): first overlapping pair
  std::optional<std::pair<std::size_t, std::size_t>> overlap;
  // (c): largest uncovered gap
  double max_gap = 0.0;
  double gap_at = 0.0;
  // (d): largest proportion m(U ∩ Z)/m(Z) over cylinders Z not inside U
  double d_worst = 0.0;
  double d_bound = 0.0;
  std::size_t d_witness = 0;
  // (e): deepest describing word
  std::size_t max_depth = 0;
  double measure_sum = 0.0;
  bool all() const { return a && b && c && d && e; }
};

inline PropertyReport verify_properties(const HoleFamily& f, const MapSystem& sys, const MeasureModel& m,
                                        const PropUConfig& cfg, bool full_support = true,
                                        unsigned threads = default_threads()) {
  PropertyReport r;
  const std::size_t n = f.cells.size();
  if (n == 0) throw EmptyFamily("family has no cells");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return f.cells[x].lo < f.cells[y].lo; });
  // (a)
  r.worst_t = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const Interval u = f.cells[i];
    double rin, rout;
    if (u.lo <= 0 && u.hi >= 1) {
      rin = INFINITY;
      rout = 0.5;
    } else if (u.lo <= 0) {
      rin = u.hi;
      rout = u.hi;
    } else if (u.hi >= 1) {
      rin = 1 - u.lo;
      rout = 1 - u.lo;
    } else {
      rin = rout = u.length() / 2;
    }
    if (rin / f.delta < r.worst_t) {
      r.worst_t = rin / f.delta;
      r.a_witness = i;
    }
    r.worst_T = std::max(r.worst_T, rout / f.delta);
  }
  r.a = r.worst_t >= f.t && r.worst_T <= f.T;
  // (b)
  r.b = true;
  for (std::size_t k = 1; k < n; ++k) {
    const Interval& p = f.cells[order[k - 1]];
    const Interval& q = f.cells[order[k]];
    if (q.lo < p.hi - 1e-15) {
      r.b = false;
      r.overlap = std::make_pair(order[k - 1], order[k]);
      break;
    }
  }
  // (c)
  if (full_support) {
    double reach = 0;
    r.gap_at = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Interval& q = f.cells[order[k]];
      if (q.lo - reach > r.max_gap) {
        r.max_gap = q.lo - reach;
        r.gap_at = reach;
      }
      reach = std::max(reach, q.hi);
    }
    if (1 - reach > r.max_gap) {
      r.max_gap = 1 - reach;
      r.gap_at = reach;
    }
    r.c = r.max_gap <= 1e-12;
  } else {
    r.c = true;
  }
  // (d): only the cylinders holding an endpoint of U can meet U without
  // lying inside it
  r.d_bound = cfg.beta_tilde / (static_cast<double>(cfg.n1 + 1) * std::pow(1 + cfg.C_d, 2));
  const auto dv = parallel_map<double>(n, threads, [&](std::size_t i) {
    const Interval u = f.cells[i];
    double worst = 0;
    for (double x : {u.lo + 1e-9 * u.length(), u.hi - 1e-9 * u.length()}) {
      const Word w = itinerary(sys, x, cfg.n1);
      for (std::size_t d = 1; d <= cfg.n1; ++d) {
        const Interval z = project_unchecked(sys, Word(w.begin(), w.begin() + static_cast<long>(d)));
        if (z.lo >= u.lo - 1e-9 * z.length() && z.hi <= u.hi + 1e-9 * z.length()) break;
        worst = std::max(worst, u.intersect(z).length() / z.length());
      }
    }
    return worst;
  });
  for (std::size_t i = 0; i < n; ++i)
    if (dv[i] > r.d_worst) {
      r.d_worst = dv[i];
      r.d_witness = i;
    }
  r.d = r.d_worst <= r.d_bound;
  // (e)
  r.e = !f.depths.empty();
  for (auto d : f.depths) {
    if (d == 0) r.e = false;
    r.max_depth = std::max(r.max_depth, d);
  }
  for (const auto& u : f.cells) r.measure_sum += m.mass(u);
  return r;
}

struct DepthRegression {
  std::vector<double> deltas;
  std::vector<std::size_t> max_depths;
  LinearFit fit;  // max depth against log(1/delta)
  double max_ratio = 0.0;  // max depth / log(1/delta)
};

inline DepthRegression depth_regression(const std::vector<HoleFamily>& fams) {
  DepthRegression d;
  std::vector<double> x, y;
  for (const auto& f : fams) {
    std::size_t md = 0;
    for (auto v : f.depths) md = std::max(md, v);
    d.deltas.push_back(f.delta);
    d.max_depths.push_back(md);
    x.push_back(std::log(1 / f.delta));
    y.push_back(static_cast<double>(md));
    d.max_ratio = std::max(d.max_ratio, md / std::log(1 / f.delta));
  }
  d.fit = linear_fit(x, y);
  return d;
}

// Checks on a word-tree family: separation (b), size (c) via a regression
// over several deltas, radii (d), subword freedom (g).
struct PropUPrimeCheck {
  bool b = false, d = false, g = false;
  std::optional<std::pair<std::size_t, std::size_t>> b_witness;
  std::optional<std::pair<std::size_t, std::size_t>> g_witness;
};

inline PropUPrimeCheck verify_prop_u_prime(const HoleFamily& f, const MapSystem& sys,
                                           const PropUPrimeReport& rep) {
  PropUPrimeCheck c;
  const auto idx = CellIndex::from_cells(f.cells);
  c.b = true;
  for (std::size_t u = 0; u < f.cells.size() && c.b; ++u) {
    const Interval cell = f.cells[u];
    for (double frac : {0.25, 0.5, 0.75}) {
      double x = cell.lo + frac * cell.length();
      for (std::size_t i = 0; i <= rep.n3; ++i) {
        if (i > 0) x = sys.apply(x);
        const long v = idx.locate(x);
        if (v >= 0 && (i > 0 || static_cast<std::size_t>(v) != u)) {
          c.b = false;
          c.b_witness = std::make_pair(u, static_cast<std::size_t>(v));
          break;
        }
      }
      if (!c.b) break;
    }
  }
  c.d = true;
  for (const auto& u : f.cells)
    if (u.length() / 2 < f.t * f.delta || u.length() / 2 > f.T * f.delta) c.d = false;
  c.g = true;
  for (std::size_t i = 0; i < rep.words.size() && c.g; ++i)
    for (std::size_t j = 0; j < rep.words.size(); ++j)
      if (i != j && detail::is_subword(rep.words[i], rep.words[j])) {
        c.g = false;
        c.g_witness = std::make_pair(i, j);
        break;
      }
  return c;
}

}  // namespace covertime
