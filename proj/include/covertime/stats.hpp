#pragma once
// Trial aggregation, confidence intervals, least-squares fits.

#include <cmath>
#include <cstdint>
#include <vector>

#include "core.hpp"

namespace covertime {

struct TrialResult {
  std::uint64_t value = 0;
  bool censored = false;
};

struct TrialEnsemble {
  std::uint64_t master_seed = 0;
  std::size_t trial_count = 0;
  std::vector<std::uint64_t> values;
  std::vector<char> censored;
  double mean = 0.0;
  double variance = 0.0;
  double ci_lo = NAN;
  double ci_hi = NAN;
  double censored_fraction = 0.0;
  // true when some trials hit the cap; mean is then only a lower bound
  bool lower_bound = false;
};

inline TrialEnsemble make_ensemble(std::uint64_t seed, const std::vector<TrialResult>& r) {
  TrialEnsemble e;
  e.master_seed = seed;
  e.trial_count = r.size();
  e.values.reserve(r.size());
  e.censored.reserve(r.size());
  long double s = 0, s2 = 0;
  std::size_t nc = 0;
  for (const auto& t : r) {
    e.values.push_back(t.value);
    e.censored.push_back(t.censored ? 1 : 0);
    if (t.censored) ++nc;
    const long double v = static_cast<long double>(t.value);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(r.size());
  if (n > 0) {
    e.mean = static_cast<double>(s / n);
    e.variance = n > 1 ? static_cast<double>((s2 - s * s / n) / (n - 1)) : 0.0;
    if (e.variance < 0) e.variance = 0;
    e.censored_fraction = nc / n;
  }
  e.lower_bound = nc > 0;
  if (!e.lower_bound && n > 1) {
    const double half = 1.959963984540054 * std::sqrt(e.variance / n);
    e.ci_lo = e.mean - half;
    e.ci_hi = e.mean + half;
  }
  return e;
}

struct Wilson {
  double lo, hi;
};

inline Wilson wilson_interval(double successes, double n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double p = successes / n;
  const double z2 = z * z;
  const double den = 1 + z2 / n;
  const double c = (p + z2 / (2 * n)) / den;
  const double h = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / den;
  return {successes <= 0 ? 0.0 : std::max(0.0, c - h), successes >= n ? 1.0 : std::min(1.0, c + h)};
}

struct LinearFit {
  double slope = NAN;
  double intercept = NAN;
  double residual = NAN;  // root mean square of residuals
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw DegenerateFit("need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw DegenerateFit("x values coincide");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  f.residual = std::sqrt(rss / n);
  return f;
}

inline double harmonic(std::size_t n) {
  double h = 0;
  for (std::size_t k = 1; k <= n; ++k) h += 1.0 / k;
  return h;
}

}  // namespace covertime
