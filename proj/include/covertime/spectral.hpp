#pragma once
// Ulam discretization of the transfer operator, open operators with holes,
// escape eigenvalues and the eigenvalue checks built on them.

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "measures.hpp"
#include "montecarlo.hpp"
#include "parallel.hpp"

namespace covertime {

enum class Alignment { Uniform, Dyadic, Cylinder };

using SparseMat = Eigen::SparseMatrix<double>;

// Entry (i, j) = m(B_j ∩ f^{-1} B_i) / m(B_j) for Lebesgue m. The operator
// acts on bin-mass vectors.
struct UlamOperator {
  std::vector<double> edges;
  SparseMat matrix;
  std::size_t resolution = 0;
  Alignment alignment = Alignment::Uniform;
  std::size_t explicit_branches = 0;

  double width(std::size_t j) const { return edges[j + 1] - edges[j]; }

  std::size_t bin_of(double x) const {
    if (x >= edges.back()) return resolution - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(std::max<long>(0, it - edges.begin() - 1));
  }

  std::vector<double> column_sums() const {
    std::vector<double> s(resolution, 0.0);
    for (int j = 0; j < matrix.outerSize(); ++j)
      for (SparseMat::InnerIterator it(matrix, j); it; ++it) s[j] += it.value();
    return s;
  }
};

namespace detail {

inline std::vector<double> ulam_edges(const MapSystem& sys, std::size_t r, Alignment a) {
  std::vector<double> e;
  if (a == Alignment::Cylinder) {
    if (sys.countable()) throw Unsupported("cylinder bins need a finite alphabet");
    const std::size_t b = sys.label_count();
    std::size_t d = 0, n = 1;
    while (n < r) {
      n *= b;
      ++d;
    }
    if (n != r) throw ConfigError("resolution must be a power of the alphabet size");
    std::vector<Word> words = {Word{}};
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<Word> next;
      for (const auto& w : words)
        for (std::size_t k = sys.label_base(); k < sys.label_end(); ++k) {
          Word c = w;
          c.push_back(k);
          next.push_back(std::move(c));
        }
      words = std::move(next);
    }
    for (const auto& w : words) e.push_back(project_unchecked(sys, w).lo);
    e.push_back(1.0);
    std::sort(e.begin(), e.end());
    e.front() = 0.0;
    return e;
  }
  if (a == Alignment::Dyadic && (r & (r - 1)) != 0) throw ConfigError("dyadic resolution must be a power of two");
  for (std::size_t i = 0; i <= r; ++i) e.push_back(static_cast<double>(i) / static_cast<double>(r));
  return e;
}

}  // namespace detail

inline UlamOperator build_ulam(const MapSystem& sys, std::size_t resolution,
                               Alignment alignment = Alignment::Uniform, unsigned threads = default_threads()) {
  if (resolution < 2) throw ConfigError("resolution must be at least 2");
  UlamOperator op;
  op.resolution = resolution;
  op.alignment = alignment;
  op.edges = detail::ulam_edges(sys, resolution, alignment);
  const std::size_t r = resolution;

  // Countable systems: branches from K on all lie in the bin holding the
  // accumulation point and are summed in closed form.
  std::size_t kend = sys.label_end();
  std::size_t acc_bin = 0;
  if (sys.countable()) {
    const bool at_zero = !sys.increasing_order();
    acc_bin = at_zero ? 0 : r - 1;
    const Interval ab{op.edges[acc_bin], op.edges[acc_bin + 1]};
    std::size_t k = sys.label_base();
    while (!(sys.domain(k).lo >= ab.lo && sys.domain(k).hi <= ab.hi)) {
      ++k;
      if (k > 100000000) throw UnresolvedBranches("branch tail does not fit one bin");
    }
    kend = k;
  }
  op.explicit_branches = kend - sys.label_base();

  auto column = [&](std::size_t j) {
    std::vector<Eigen::Triplet<double>> out;
    const Interval bj{op.edges[j], op.edges[j + 1]};
    const double hj = bj.length();
    std::size_t klo = sys.label_base(), khi = kend - 1;
    if (sys.countable()) {
      const double x2 = std::nextafter(bj.hi, 0.0);
      const auto a = bj.lo > 0 ? sys.branch_of(bj.lo) : std::optional<std::size_t>{};
      const auto b = sys.branch_of(x2);
      const std::size_t ka = a ? *a : kend - 1, kb = b ? *b : kend - 1;
      klo = std::min(std::min(ka, kb), kend - 1);
      khi = std::min(std::max(ka, kb), kend - 1);
      if (j == acc_bin) khi = kend - 1;
    }
    for (std::size_t k = klo; k <= khi; ++k) {
      const Interval jj = bj.intersect(sys.domain(k));
      if (!(jj.hi > jj.lo)) continue;
      const Interval y = sys.forward_image(k, jj);
      for (std::size_t i = op.bin_of(y.lo); i < r && op.edges[i] < y.hi; ++i) {
        const Interval iy = y.intersect({op.edges[i], op.edges[i + 1]});
        if (!(iy.hi > iy.lo)) continue;
        const double w = sys.inverse_image(k, iy).length() / hj;
        if (w > 0) out.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
      }
    }
    if (sys.countable() && j == acc_bin)
      for (std::size_t i = 0; i < r; ++i) {
        const double w = sys.tail_preimage_length(kend, {op.edges[i], op.edges[i + 1]}) / hj;
        if (w > 0) out.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
      }
    return out;
  };
  const auto cols = parallel_map<std::vector<Eigen::Triplet<double>>>(r, threads, column);
  std::vector<Eigen::Triplet<double>> all;
  for (const auto& c : cols) all.insert(all.end(), c.begin(), c.end());
  op.matrix.resize(static_cast<int>(r), static_cast<int>(r));
  op.matrix.setFromTriplets(all.begin(), all.end());
  op.matrix.makeCompressed();
  return op;
}

struct OpenOperator {
  Interval hole;  // snapped outward to bin edges
  std::vector<char> mask;  // 1 off the hole
  double lambda = 1.0;
  std::vector<double> mass;     // leading vector as bin masses, sum 1
  std::vector<double> eigfun;   // density values, integral 1
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double hole_mass_of_eigfun = 0.0;  // integral of g_U over the hole
};

inline std::vector<char> hole_mask(const UlamOperator& op, const Interval& hole, Interval* snapped = nullptr) {
  std::vector<char> mask(op.resolution, 1);
  if (!(hole.hi > hole.lo)) {
    if (snapped) *snapped = {0.0, 0.0};
    return mask;
  }
  std::size_t a = op.bin_of(hole.lo);
  std::size_t b = op.bin_of(hole.hi);
  if (op.edges[b] >= hole.hi && b > a) --b;
  for (std::size_t j = a; j <= b; ++j) mask[j] = 0;
  if (snapped) *snapped = {op.edges[a], op.edges[b + 1]};
  return mask;
}

inline void masked_apply(const UlamOperator& op, const std::vector<char>& mask, const Eigen::VectorXd& v,
                         Eigen::VectorXd& out) {
  Eigen::VectorXd m = v;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (!mask[j]) m[static_cast<int>(j)] = 0.0;
  out = op.matrix * m;
}

inline OpenOperator open_leading_pair(const UlamOperator& op, const Interval& hole, double tol = 1e-12,
                                      std::size_t max_iter = 100000) {
  OpenOperator o;
  o.mask = hole_mask(op, hole, &o.hole);
  const int r = static_cast<int>(op.resolution);
  Eigen::VectorXd v(r), u(r);
  for (int j = 0; j < r; ++j) v[j] = op.width(j);
  v /= v.sum();
  double lambda = 0;
  for (o.iterations = 1; o.iterations <= max_iter; ++o.iterations) {
    masked_apply(op, o.mask, v, u);
    lambda = u.sum();
    if (!(lambda > 0)) {
      o.residual = 0;
      o.converged = true;
      break;
    }
    o.residual = (u - lambda * v).lpNorm<1>();
    v = u / lambda;
    if (o.residual < tol) {
      o.converged = true;
      break;
    }
  }
  if (o.iterations > max_iter) o.iterations = max_iter;
  o.lambda = lambda;
  o.mass.assign(v.data(), v.data() + r);
  o.eigfun.resize(r);
  for (int j = 0; j < r; ++j) {
    o.eigfun[j] = v[j] / op.width(j);
    if (!o.mask[j]) o.hole_mass_of_eigfun += v[j];
  }
  return o;
}

struct EigRatio {
  Interval hole;
  double mu_u = 0.0;
  double lambda = 0.0;
  double ratio = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool flagged = false;  // ratio outside [0.05, 20]
};

struct EigScan {
  std::vector<EigRatio> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t resolution = 0;
};

inline EigScan eig_measure_ratio_scan(const MapSystem& sys, const MeasureModel& m, const std::vector<Interval>& holes,
                                      std::size_t resolution, unsigned threads = default_threads(),
                                      Alignment alignment = Alignment::Uniform) {
  const auto op = build_ulam(sys, resolution, alignment, threads);
  EigScan s;
  s.resolution = resolution;
  s.rows = parallel_map<EigRatio>(holes.size(), threads, [&](std::size_t i) {
    const auto o = open_leading_pair(op, holes[i]);
    EigRatio e;
    e.hole = o.hole;
    e.mu_u = m.mass(o.hole);
    if (!(e.mu_u > 0)) throw ConfigError("hole has zero measure");
    e.lambda = o.lambda;
    e.ratio = (1 - o.lambda) / e.mu_u;
    e.residual = o.residual;
    e.iterations = o.iterations;
    e.flagged = e.ratio < 0.05 || e.ratio > 20;
    return e;
  });
  s.min_ratio = s.max_ratio = s.rows.empty() ? 0.0 : s.rows[0].ratio;
  for (const auto& e : s.rows) {
    s.min_ratio = std::min(s.min_ratio, e.ratio);
    s.max_ratio = std::max(s.max_ratio, e.ratio);
  }
  return s;
}

// Invariant bin masses of the closed operator.
inline Eigen::VectorXd closed_invariant(const UlamOperator& op) {
  const auto o = open_leading_pair(op, {0.0, 0.0});
  return Eigen::Map<const Eigen::VectorXd>(o.mass.data(), static_cast<int>(o.mass.size()));
}

struct SurvivalComparison {
  Interval hole;
  double lambda = 0.0;
  std::vector<double> matrix;  // index n-1: mu(x, ..., f^{n-1}x avoid U)
  std::vector<double> mc;
  std::vector<double> mc_se;
  std::vector<double> matrix_ratio;  // matrix / lambda^n
  std::vector<double> mc_ratio;
};

inline SurvivalComparison survival_vs_eigenvalue(const MapSystem& sys, const MeasureModel& m, const Interval& u,
                                                 std::size_t n_max, std::size_t resolution,
                                                 std::size_t mc_trials = 0, std::uint64_t seed = 1,
                                                 unsigned threads = default_threads()) {
  const auto op = build_ulam(sys, resolution, Alignment::Uniform, threads);
  const auto o = open_leading_pair(op, u);
  if (n_max * (1 - o.lambda) > 50) throw ConfigError("n_max too large for this hole");
  SurvivalComparison c;
  c.hole = o.hole;
  c.lambda = o.lambda;
  Eigen::VectorXd v = closed_invariant(op), w;
  for (std::size_t n = 1; n <= n_max; ++n) {
    masked_apply(op, o.mask, v, w);
    v = w;
    c.matrix.push_back(v.sum());
    c.matrix_ratio.push_back(v.sum() / std::pow(o.lambda, static_cast<double>(n)));
  }
  if (mc_trials > 0) {
    c.mc = avoidance_curve(sys, m, o.hole, n_max, mc_trials, seed, threads);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double p = c.mc[n - 1];
      c.mc_se.push_back(std::sqrt(p * (1 - p) / mc_trials));
      c.mc_ratio.push_back(p / std::pow(o.lambda, static_cast<double>(n)));
    }
  }
  return c;
}

// 1 - sum_{k<n} lambda^{-k} q_k
inline double kl_rhs(double lambda, const std::vector<double>& q, std::size_t n) {
  double s = 0;
  for (std::size_t k = 0; k < n && k < q.size(); ++k) s += std::pow(lambda, -static_cast<double>(k)) * q[k];
  return 1 - s;
}

struct KlReport {
  Interval hole;
  double mu_u = 0.0;
  double lambda = 0.0;
  std::size_t n = 0;
  std::vector<double> q;
  double lhs = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double gap = 0.0;
  bool pass = false;
  // 1 - lambda against the integral of g_U over the hole
  double escape_identity_gap = 0.0;
};

inline KlReport kl_identity_check(const MapSystem& sys, const MeasureModel& m, const Interval& u, std::size_t n,
                                  std::size_t resolution, std::size_t trials, std::uint64_t seed,
                                  unsigned threads = default_threads()) {
  const auto op = build_ulam(sys, resolution, Alignment::Uniform, threads);
  const auto o = open_leading_pair(op, u);
  KlReport r;
  r.hole = o.hole;
  r.mu_u = m.mass(o.hole);
  if (n > 1.0 / r.mu_u) throw ConfigError("n must not exceed 1/mu(U)");
  r.lambda = o.lambda;
  r.n = n;
  r.lhs = (1 - o.lambda) / r.mu_u;
  r.escape_identity_gap = std::fabs((1 - o.lambda) - o.hole_mass_of_eigfun);
  r.q.assign(n, 0.0);
  if (n > 0 && trials > 0) {
    const auto e = return_ensemble(sys, m, o.hole, trials, seed, n + 1, threads);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      double z = 0;
      if (!e.censored[i] && e.values[i] <= n) {
        const std::size_t k = e.values[i] - 1;
        r.q[k] += 1.0 / trials;
        z = std::pow(o.lambda, -static_cast<double>(k));
      }
      s += z;
      s2 += z * z;
    }
    const double mean = s / trials;
    r.rhs_se = std::sqrt(std::max(0.0, s2 / trials - mean * mean) / trials);
  }
  r.rhs = kl_rhs(o.lambda, r.q, n);
  r.gap = std::fabs(r.lhs - r.rhs);
  r.pass = r.gap < 0.1 + 2 * r.rhs_se;
  return r;
}

}  // namespace covertime
