#pragma once
// Invariant measures, ball measures, minimum-ball curves and Minkowski fits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "stats.hpp"
#include "symbolic.hpp"

namespace covertime {

enum class MeasureKind { LebesgueDensity, SymbolicPushforward, Empirical };
enum class SampleMode { InverseCdf, SymbolStream, BurnIn, Resample };

struct MeasureModel {
  MeasureKind kind = MeasureKind::LebesgueDensity;
  SampleMode sampling = SampleMode::InverseCdf;
  std::string name;
  // LebesgueDensity
  std::function<double(double)> density;
  std::function<double(double)> cdf;
  std::function<double(double)> inv_cdf;
  // SymbolicPushforward
  std::shared_ptr<const MapSystem> sys;
  SymbolicMeasure sym;
  // Empirical: sorted samples, weight 1/N each
  std::shared_ptr<const std::vector<double>> samples;
  // BurnIn sampling: discarded iterations from a Lebesgue start
  std::size_t burn_in = 10000;

  // mu([a,b]) clipped to [0,1]
  double mass(double a, double b) const {
    a = std::max(a, 0.0);
    b = std::min(b, 1.0);
    if (!(b > a)) return 0.0;
    switch (kind) {
      case MeasureKind::LebesgueDensity:
        return std::max(0.0, cdf(b) - cdf(a));
      case MeasureKind::SymbolicPushforward:
        if (sym.lebesgue_equivalent) return b - a;
        return interval_measure(*sys, sym, {a, b});
      case MeasureKind::Empirical: {
        const auto& s = *samples;
        const auto lo = std::lower_bound(s.begin(), s.end(), a);
        const auto hi = std::upper_bound(s.begin(), s.end(), b);
        return static_cast<double>(hi - lo) / static_cast<double>(s.size());
      }
    }
    return 0.0;
  }
  double mass(const Interval& u) const { return mass(u.lo, u.hi); }

  bool symbolic() const { return kind == MeasureKind::SymbolicPushforward; }
};

inline MeasureModel lebesgue_measure() {
  MeasureModel m;
  m.name = "lebesgue";
  m.density = [](double) { return 1.0; };
  m.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  m.inv_cdf = [](double u) { return u; };
  return m;
}

inline MeasureModel gauss_measure() {
  MeasureModel m;
  m.name = "gauss";
  m.density = [](double x) { return 1.0 / (std::numbers::ln2 * (1.0 + x)); };
  m.cdf = [](double x) { return std::log1p(std::clamp(x, 0.0, 1.0)) / std::numbers::ln2; };
  m.inv_cdf = [](double u) { return std::expm1(u * std::numbers::ln2); };
  return m;
}

inline MeasureModel symbolic_pushforward(const MapSystem& sys, SymbolicMeasure sym) {
  if (!sym.bernoulli_kind()) throw Unsupported("symbol-stream sampling needs a Bernoulli measure");
  MeasureModel m;
  m.kind = MeasureKind::SymbolicPushforward;
  m.sampling = SampleMode::SymbolStream;
  m.name = sys.name() + "-symbolic";
  m.sys = std::make_shared<const MapSystem>(sys);
  m.sym = std::move(sym);
  return m;
}

inline MeasureModel empirical_measure(std::vector<double> samples, std::string name = "empirical") {
  if (samples.empty()) throw ConfigError("empirical measure needs samples");
  std::sort(samples.begin(), samples.end());
  MeasureModel m;
  m.kind = MeasureKind::Empirical;
  m.sampling = SampleMode::Resample;
  m.name = std::move(name);
  m.samples = std::make_shared<const std::vector<double>>(std::move(samples));
  return m;
}

// Occupation measure of one long orbit after burn-in; sampling uses burn-in
// from a uniform start rather than resampling the stored orbit.
inline MeasureModel orbit_measure(const MapSystem& sys, std::size_t length, std::uint64_t seed,
                                  std::size_t burn_in = 10000) {
  Rng g = make_rng(seed);
  double x = uniform_open(g);
  for (std::size_t i = 0; i < burn_in; ++i) x = sys.apply(x);
  std::vector<double> s(length);
  for (auto& v : s) {
    v = x;
    x = sys.apply(x);
  }
  auto m = empirical_measure(std::move(s), sys.name() + "-acip");
  m.sampling = SampleMode::BurnIn;
  m.burn_in = burn_in;
  return m;
}

inline MeasureModel default_measure(const MapSystem& sys, std::uint64_t seed = 1,
                                    std::size_t orbit_length = 2000000) {
  switch (sys.kind()) {
    case MapKind::Gauss:
      return gauss_measure();
    case MapKind::Lsv:
      return orbit_measure(sys, orbit_length, seed);
    default:
      return symbolic_pushforward(sys, default_symbolic_measure(sys));
  }
}

// A point drawn from mu; symbolic kinds project a random word to 60 symbols.
inline double sample_point(const MapSystem& sys, const MeasureModel& m, Rng& g) {
  switch (m.sampling) {
    case SampleMode::InverseCdf:
      return m.inv_cdf(uniform01(g));
    case SampleMode::SymbolStream: {
      Word w(60);
      for (auto& s : w) s = m.sym.sample_symbol(g);
      const Interval j = project_unchecked(sys, w);
      return j.lo + (j.hi - j.lo) * uniform01(g);
    }
    case SampleMode::BurnIn: {
      double x = uniform_open(g);
      for (std::size_t i = 0; i < m.burn_in; ++i) x = sys.apply(x);
      return x;
    }
    case SampleMode::Resample: {
      const auto& s = *m.samples;
      return s[uniform_index(g, s.size())];
    }
  }
  return 0.0;
}

inline double ball_measure(const MeasureModel& m, double x, double delta) {
  if (!(delta > 0)) throw ConfigError("ball radius must be positive");
  return m.mass(x - delta, x + delta);
}

struct MinBall {
  double value = 0.0;
  double argmin = 0.0;
};

// Branch-domain endpoints in [0,1], truncated for countable systems.
inline std::vector<double> support_breaks(const MapSystem& sys, std::size_t cap = 256) {
  std::vector<double> b = {0.0, 1.0};
  const std::size_t end = sys.countable() ? sys.label_base() + cap : sys.label_end();
  for (std::size_t k = sys.label_base(); k < end; ++k) {
    const Interval d = sys.domain(k);
    b.push_back(d.lo);
    b.push_back(d.hi);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

inline MinBall min_ball_measure(const MeasureModel& m, double delta, double scan_resolution = 0.0,
                                const std::vector<double>& extra_points = {},
                                unsigned threads = 1) {
  if (!(delta > 0)) throw ConfigError("ball radius must be positive");
  if (scan_resolution <= 0) scan_resolution = delta / 16;
  if (scan_resolution > delta / 8) throw ConfigError("scan resolution must be at most delta/8");
  const std::size_t n = static_cast<std::size_t>(std::ceil(1.0 / scan_resolution));
  std::vector<double> pts;
  pts.reserve(n + 1 + extra_points.size());
  for (std::size_t i = 0; i <= n; ++i) pts.push_back(std::min(1.0, i * scan_resolution));
  for (double p : extra_points)
    if (p >= 0 && p <= 1) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const auto vals = parallel_map<double>(pts.size(), threads, [&](std::size_t i) {
    return ball_measure(m, pts[i], delta);
  });
  MinBall r{vals[0], pts[0]};
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (vals[i] < r.value) r = {vals[i], pts[i]};
  return r;
}

struct MinBallCurve {
  std::vector<double> deltas;
  std::vector<double> values;
  std::vector<double> argmins;
  std::string method = "grid-scan";
  bool monotone = true;  // M is non-decreasing in delta
};

inline MinBallCurve min_ball_curve(const MeasureModel& m, std::vector<double> deltas,
                                   const std::vector<double>& extra_points = {}, unsigned threads = 1) {
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  MinBallCurve c;
  c.deltas = deltas;
  for (double d : deltas) {
    const auto r = min_ball_measure(m, d, 0.0, extra_points, threads);
    c.values.push_back(r.value);
    c.argmins.push_back(r.argmin);
  }
  for (std::size_t i = 1; i < c.values.size(); ++i)
    if (c.values[i] > c.values[i - 1] * (1 + 1e-12)) c.monotone = false;
  return c;
}

struct MinkowskiFit {
  double slope = NAN;
  double residual = NAN;
  std::vector<double> err_curve;
  MinBallCurve curve;
  bool finite_fit = true;  // false when the residual exceeds 0.1
};

inline MinkowskiFit minkowski_dimension_estimate(const MeasureModel& m, const std::vector<double>& deltas,
                                                 const std::vector<double>& extra_points = {},
                                                 unsigned threads = 1) {
  if (deltas.size() < 4) throw ConfigError("need at least four deltas");
  MinkowskiFit f;
  f.curve = min_ball_curve(m, deltas, extra_points, threads);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < f.curve.deltas.size(); ++i) {
    if (!(f.curve.values[i] > 0)) throw DegenerateFit("zero ball measure at delta " +
                                                      std::to_string(f.curve.deltas[i]));
    lx.push_back(std::log(f.curve.deltas[i]));
    ly.push_back(std::log(f.curve.values[i]));
  }
  const auto lf = linear_fit(lx, ly);
  f.slope = lf.slope;
  f.residual = lf.residual;
  for (std::size_t i = 0; i < lx.size(); ++i) f.err_curve.push_back(std::fabs(f.slope - ly[i] / lx[i]));
  f.finite_fit = f.residual <= 0.1;
  return f;
}

}  // namespace covertime
