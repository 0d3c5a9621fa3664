#pragma once
// Interval maps: branch structure, pointwise dynamics, potentials.
//
// Branch domains are half-open [l, r); the rightmost branch of a finite
// system is closed. Labels are 0-based for doubling and full-branched
// linear maps, 1-based for Gauss, LSV and the quadratic-gap map.

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace covertime {

enum class MapKind { Doubling, FullBranchedLinear, Gauss, Lsv, SlowBernoulliLsv, QuadraticGap };

struct Branch {
  std::size_t label = 0;
  Interval domain;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;
  bool is_full = true;
};

namespace detail {

// Solves x + a x^{1+alpha} = y on [0, 1/2].
inline double lsv_left_inverse(double a, double alpha, double y) {
  if (y <= 0) return 0.0;
  if (y >= 1) return 0.5;
  double x = y / (1 + a * std::pow(y, alpha));
  for (int i = 0; i < 100; ++i) {
    const double xa = std::pow(x, alpha);
    const double g = x + a * x * xa - y;
    const double d = 1 + (1 + alpha) * a * xa;
    double nx = x - g / d;
    if (nx <= 0) nx = 0.5 * x;
    if (nx > 0.5) nx = 0.5;
    const bool done = std::fabs(nx - x) <= 4e-16 * nx;
    x = nx;
    if (done) break;
  }
  return x;
}

inline constexpr double kQgC = std::numbers::pi * std::numbers::pi / 6.0;

}  // namespace detail

class MapSystem {
 public:
  static MapSystem doubling() {
    MapSystem s;
    s.kind_ = MapKind::Doubling;
    s.name_ = "doubling";
    s.base_ = 0;
    s.nbranch_ = 2;
    s.cuts_ = {0.0, 0.5, 1.0};
    s.gamma_inv_ = 2.0;
    return s;
  }

  // Full linear branches with the given domain widths, left to right.
  static MapSystem full_branched_linear(std::vector<double> widths) {
    if (widths.size() < 2) throw ConfigError("full_branched_linear needs at least two widths");
    double tot = 0;
    for (double w : widths) {
      if (!(w > 0)) throw ConfigError("full_branched_linear widths must be positive");
      tot += w;
    }
    if (std::fabs(tot - 1) > 1e-9) throw ConfigError("full_branched_linear widths must sum to 1");
    MapSystem s;
    s.kind_ = MapKind::FullBranchedLinear;
    s.name_ = "fbl";
    s.base_ = 0;
    s.nbranch_ = widths.size();
    s.cuts_.assign(1, 0.0);
    double acc = 0;
    double wmax = 0;
    for (double w : widths) {
      acc += w / tot;
      s.cuts_.push_back(acc);
      wmax = std::max(wmax, w / tot);
    }
    s.cuts_.back() = 1.0;
    s.widths_ = widths;
    for (auto& w : s.widths_) w /= tot;
    s.gamma_inv_ = 1.0 / wmax;
    return s;
  }

  static MapSystem gauss(std::size_t cap = 1000000) {
    MapSystem s;
    s.kind_ = MapKind::Gauss;
    s.name_ = "gauss";
    s.base_ = 1;
    s.nbranch_ = cap;
    s.countable_ = true;
    s.increasing_ = false;
    s.gamma_inv_ = 1.0;  // |Df| = 1/x^2 >= 1, equality only at x = 1
    s.uniform_ = false;
    return s;
  }

  static MapSystem lsv(double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("lsv alpha must lie in (0,1)");
    MapSystem s;
    s.kind_ = MapKind::Lsv;
    s.name_ = "lsv";
    s.base_ = 1;
    s.nbranch_ = 2;
    s.alpha_ = alpha;
    s.a2_ = std::pow(2.0, alpha);
    s.cuts_ = {0.0, 0.5, 1.0};
    s.uniform_ = false;
    s.gamma_inv_ = NAN;
    return s;
  }

  static MapSystem slow_bernoulli_lsv(double alpha) {
    MapSystem s = lsv(alpha);
    s.kind_ = MapKind::SlowBernoulliLsv;
    s.name_ = "slow_lsv";
    return s;
  }

  static MapSystem quadratic_gap(std::size_t cap = 1000000) {
    MapSystem s;
    s.kind_ = MapKind::QuadraticGap;
    s.name_ = "quadratic_gap";
    s.base_ = 1;
    s.nbranch_ = cap;
    s.countable_ = true;
    s.gamma_inv_ = detail::kQgC;
    return s;
  }

  MapKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double alpha() const { return alpha_; }
  std::size_t label_base() const { return base_; }
  bool countable() const { return countable_; }
  // number of labels (the enumeration cap for countable systems)
  std::size_t label_count() const { return nbranch_; }
  std::size_t label_end() const { return base_ + nbranch_; }
  bool valid_label(std::size_t k) const { return k >= base_ && (countable_ || k < base_ + nbranch_); }
  // true when the domain of label k lies to the left of label k+1
  bool increasing_order() const { return increasing_; }
  bool uniformly_expanding() const { return uniform_; }
  // gamma^{-1}; NaN marks the non-uniform LSV family
  double expanding_constant() const { return gamma_inv_; }
  bool piecewise_linear() const {
    return kind_ == MapKind::Doubling || kind_ == MapKind::FullBranchedLinear ||
           kind_ == MapKind::QuadraticGap;
  }
  bool is_lsv() const { return kind_ == MapKind::Lsv || kind_ == MapKind::SlowBernoulliLsv; }
  const std::vector<double>& widths() const { return widths_; }

  // a_n for the quadratic-gap map; a_0 = 0
  static double qg_a(std::size_t n) { return n == 0 ? 0.0 : 1.0 - qg_tail(n); }
  // 1 - a_n, computed without cancellation
  static double qg_tail(std::size_t n) {
    if (n == 0) return 1.0;
    static const std::vector<double> table = [] {
      std::vector<double> t(1 << 16);
      for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = boost::math::trigamma(static_cast<double>(i) + 1.0) / detail::kQgC;
      return t;
    }();
    if (n < table.size()) return table[n];
    return boost::math::trigamma(static_cast<double>(n) + 1.0) / detail::kQgC;
  }

  Interval domain(std::size_t k) const {
    if (!valid_label(k)) throw Inadmissible("label " + std::to_string(k) + " not in " + name_);
    switch (kind_) {
      case MapKind::Gauss:
        return {1.0 / static_cast<double>(k + 1), 1.0 / static_cast<double>(k)};
      case MapKind::QuadraticGap:
        return {qg_a(k - 1), qg_a(k)};
      default:
        return {cuts_[k - base_], cuts_[k - base_ + 1]};
    }
  }

  std::optional<std::size_t> branch_of(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) return std::nullopt;
    switch (kind_) {
      case MapKind::Gauss: {
        if (x <= 0.0) return std::nullopt;
        double r = std::floor(1.0 / x);
        if (r > 9.0e15) return std::nullopt;
        std::size_t n = r < 1 ? 1 : static_cast<std::size_t>(r);
        while (n > 1 && x >= 1.0 / static_cast<double>(n)) --n;
        while (x < 1.0 / static_cast<double>(n + 1)) ++n;
        return n;
      }
      case MapKind::QuadraticGap: {
        if (x >= 1.0) return std::nullopt;
        const double g = 1.0 / (detail::kQgC * (1.0 - x)) - 0.5;
        if (g > 1e15) return std::nullopt;
        // smallest n with a_n > x, bracketed around the asymptotic guess
        std::size_t lo = g < 4 ? 1 : static_cast<std::size_t>(g / 2);
        std::size_t hi = static_cast<std::size_t>(2 * g) + 4;
        while (lo > 1 && qg_a(lo - 1) > x) lo /= 2;
        while (qg_a(hi) <= x) hi *= 2;
        while (lo < hi) {
          const std::size_t mid = lo + (hi - lo) / 2;
          if (qg_a(mid) > x) hi = mid;
          else lo = mid + 1;
        }
        return lo;
      }
      default: {
        if (x >= 1.0) return base_ + nbranch_ - 1;
        const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), x);
        return base_ + static_cast<std::size_t>(it - cuts_.begin()) - 1;
      }
    }
  }

  double forward(std::size_t k, double x) const {
    switch (kind_) {
      case MapKind::Doubling:
        return k == 0 ? 2 * x : 2 * x - 1;
      case MapKind::FullBranchedLinear: {
        const double l = cuts_[k], w = widths_[k];
        return std::clamp((x - l) / w, 0.0, 1.0);
      }
      case MapKind::Gauss: {
        const double y = std::fma(-static_cast<double>(k), x, 1.0) / x;
        return std::clamp(y, 0.0, 1.0);
      }
      case MapKind::QuadraticGap: {
        const double kk = static_cast<double>(k);
        return std::clamp(detail::kQgC * kk * kk * (x - qg_a(k - 1)), 0.0, 1.0);
      }
      default:
        if (k == 1) return x + a2_ * std::pow(x, 1 + alpha_);
        return 2 * x - 1;
    }
  }

  double inverse(std::size_t k, double y) const {
    switch (kind_) {
      case MapKind::Doubling:
        return 0.5 * (y + static_cast<double>(k));
      case MapKind::FullBranchedLinear:
        return cuts_[k] + widths_[k] * y;
      case MapKind::Gauss:
        return 1.0 / (static_cast<double>(k) + y);
      case MapKind::QuadraticGap: {
        const double kk = static_cast<double>(k);
        return qg_a(k - 1) + y / (detail::kQgC * kk * kk);
      }
      default:
        if (k == 1) return detail::lsv_left_inverse(a2_, alpha_, y);
        return 0.5 * (y + 1);
    }
  }

  double derivative(std::size_t k, double x) const {
    switch (kind_) {
      case MapKind::Doubling:
        return 2.0;
      case MapKind::FullBranchedLinear:
        return 1.0 / widths_[k];
      case MapKind::Gauss:
        return -1.0 / (x * x);
      case MapKind::QuadraticGap: {
        const double kk = static_cast<double>(k);
        return detail::kQgC * kk * kk;
      }
      default:
        if (k == 1) return 1 + (1 + alpha_) * a2_ * std::pow(x, alpha_);
        return 2.0;
    }
  }

  // |h_k'(y)|, the inverse-branch derivative
  double inverse_derivative(std::size_t k, double y) const {
    return 1.0 / std::fabs(derivative(k, inverse(k, y)));
  }

  Interval inverse_image(std::size_t k, const Interval& j) const {
    const double a = inverse(k, j.lo), b = inverse(k, j.hi);
    return {std::min(a, b), std::max(a, b)};
  }

  Interval forward_image(std::size_t k, const Interval& j) const {
    const double a = forward(k, j.lo), b = forward(k, j.hi);
    return {std::min(a, b), std::max(a, b)};
  }

  double apply(double x) const {
    const auto k = branch_of(x);
    if (!k) throw OutOfDomain("x = " + std::to_string(x) + " outside the domain of " + name_);
    return forward(*k, x);
  }

  std::vector<double> orbit(double x0, std::size_t n) const {
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(x0);
    double x = x0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = branch_of(x);
      if (!k) throw EscapedAtStep(i);
      x = forward(*k, x);
      out.push_back(x);
    }
    return out;
  }

  double potential(double x) const {
    const auto k = branch_of(x);
    if (!k) throw OutOfDomain("potential outside domain");
    return -std::log(std::fabs(derivative(*k, x)));
  }

  double potential_sum(double x, std::size_t n) const {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = branch_of(x);
      if (!k) throw OutOfDomain("potential_sum: orbit left the domain");
      s -= std::log(std::fabs(derivative(*k, x)));
      x = forward(*k, x);
    }
    return s;
  }

  Branch branch(std::size_t k) const {
    Branch b;
    b.label = k;
    b.domain = domain(k);
    const MapSystem self = *this;
    b.forward = [self, k](double x) { return self.forward(k, x); };
    b.inverse = [self, k](double y) { return self.inverse(k, y); };
    b.derivative = [self, k](double x) { return self.derivative(k, x); };
    b.is_full = true;
    return b;
  }

  // Sum over labels k >= first of the Lebesgue length of h_k(B).
  double tail_preimage_length(std::size_t first, const Interval& b) const {
    using boost::math::digamma;
    const double n = static_cast<double>(first);
    switch (kind_) {
      case MapKind::Gauss:
        return digamma(n + b.hi) - digamma(n + b.lo);
      case MapKind::QuadraticGap:
        return b.length() * boost::math::trigamma(n) / detail::kQgC;
      default: {
        double s = 0;
        for (std::size_t k = std::max(first, base_); k < label_end(); ++k)
          s += inverse_image(k, b).length();
        return s;
      }
    }
  }

  // Largest diameter of a cylinder of the given depth.
  double max_cylinder_diameter(std::size_t depth) const {
    const double d = static_cast<double>(depth);
    switch (kind_) {
      case MapKind::Doubling:
        return std::ldexp(1.0, -static_cast<int>(depth));
      case MapKind::FullBranchedLinear:
        return std::pow(1.0 / gamma_inv_, d);
      case MapKind::Gauss: {
        // the all-ones cylinder: 1/(F_{d+1} F_{d+2})
        double f1 = 1, f2 = 1;
        for (std::size_t i = 1; i < depth; ++i) {
          const double t = f1 + f2;
          f1 = f2;
          f2 = t;
        }
        return 1.0 / (f2 * (f1 + f2));
      }
      case MapKind::QuadraticGap:
        return std::pow(1.0 / detail::kQgC, d);
      default: {
        // for LSV the widest cylinder of depth d is [0, h_1^{d-1}(1/2)]
        if (depth == 0) return 1.0;
        double z = 0.5;
        for (std::size_t i = 1; i < depth; ++i) z = inverse(1, z);
        return z;
      }
    }
  }

 private:
  MapKind kind_ = MapKind::Doubling;
  std::string name_;
  std::size_t base_ = 0;
  std::size_t nbranch_ = 0;
  bool countable_ = false;
  bool increasing_ = true;
  bool uniform_ = true;
  double gamma_inv_ = 2.0;
  double alpha_ = 0.0;
  double a2_ = 1.0;
  std::vector<double> cuts_;
  std::vector<double> widths_;
};

}  // namespace covertime
