#pragma once
// Common types and error classes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace covertime {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi > lo ? hi - lo : 0.0; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& o) const { return o.lo >= lo && o.hi <= hi; }
  bool overlaps(const Interval& o) const { return std::max(lo, o.lo) < std::min(hi, o.hi); }
  Interval intersect(const Interval& o) const {
    return {std::max(lo, o.lo), std::min(hi, o.hi)};
  }
  bool operator==(const Interval&) const = default;
};

inline Interval unit_interval() { return {0.0, 1.0}; }

#define COVERTIME_ERROR(name)                                  \
  struct name : std::runtime_error {                           \
    explicit name(const std::string& m) : std::runtime_error(m) {} \
  };

COVERTIME_ERROR(OutOfDomain)
COVERTIME_ERROR(Inadmissible)
COVERTIME_ERROR(DepthExceeded)
COVERTIME_ERROR(DegenerateFit)
COVERTIME_ERROR(Unsupported)
COVERTIME_ERROR(RejectionStarved)
COVERTIME_ERROR(NoConvergence)
COVERTIME_ERROR(UnresolvedBranches)
COVERTIME_ERROR(DepthOverflow)
COVERTIME_ERROR(ConstantsInfeasible)
COVERTIME_ERROR(EmptyFamily)
COVERTIME_ERROR(NotCovered)
COVERTIME_ERROR(ConfigError)

#undef COVERTIME_ERROR

// Raised by orbit() on repellers; carries the step at which the point left.
struct EscapedAtStep : std::runtime_error {
  std::size_t step;
  explicit EscapedAtStep(std::size_t k)
      : std::runtime_error("orbit escaped at step " + std::to_string(k)), step(k) {}
};

inline constexpr std::uint64_t kNoCap = std::numeric_limits<std::uint64_t>::max();

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > kNoCap - b ? kNoCap : a + b;
}

}  // namespace covertime
