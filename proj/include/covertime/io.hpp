#pragma once
// CSV and JSON emission, config hashing and run manifests.

#include <Eigen/Core>
#include <boost/version.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "inducing.hpp"
#include "partitions.hpp"
#include "spectral.hpp"

namespace covertime {

using json = nlohmann::ordered_json;

// Round-trip exact decimal form.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(std::move(header)); }

  template <class... Ts>
  void row(const Ts&... v) {
    if (sizeof...(Ts) != cols_) throw ConfigError("csv row width mismatch");
    std::vector<std::string> cells;
    (cells.push_back(cell(v)), ...);
    row_strings(std::move(cells));
  }
  void row_strings(std::vector<std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }
  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << out_.str();
  }

 private:
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(float v) { return fmt17(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <class T>
    requires std::is_integral_v<T>
  static std::string cell(T v) {
    return std::to_string(v);
  }

  std::size_t cols_;
  std::ostringstream out_;
};

// 64-bit FNV-1a
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string config_hash(const json& resolved) { return hex64(fnv1a(resolved.dump())); }

inline json versions() {
  return {{"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)},
          {"cxx", __cplusplus}};
}

inline json manifest(const json& resolved, std::uint64_t seed, double wall_seconds,
                     const std::vector<std::string>& artifacts) {
  return {{"config", resolved},
          {"config_hash", config_hash(resolved)},
          {"seed", seed},
          {"versions", versions()},
          {"wall_seconds", wall_seconds},
          {"artifacts", artifacts}};
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(2) << '\n';
}

inline json interval_json(const Interval& u) { return json::array({u.lo, u.hi}); }

inline json to_json(const TrialEnsemble& e) {
  return {{"master_seed", e.master_seed},   {"trial_count", e.trial_count}, {"mean", e.mean},
          {"variance", e.variance},         {"ci_lo", e.ci_lo},             {"ci_hi", e.ci_hi},
          {"censored_fraction", e.censored_fraction}, {"lower_bound", e.lower_bound}};
}

inline json to_json(const HoleFamily& f) {
  json cells = json::array();
  for (std::size_t i = 0; i < f.cells.size(); ++i) {
    json c = {{"cell", interval_json(f.cells[i])}, {"center", f.centers[i]}};
    if (i < f.depths.size()) c["depth"] = f.depths[i];
    if (i < f.words.size()) c["words"] = f.words[i];
    cells.push_back(std::move(c));
  }
  return {{"delta", f.delta}, {"t", f.t}, {"T", f.T}, {"provenance", provenance_name(f.provenance)},
          {"cells", std::move(cells)}};
}

inline json to_json(const PropertyReport& r) {
  json j = {{"a", r.a},
            {"b", r.b},
            {"c", r.c},
            {"d", r.d},
            {"e", r.e},
            {"worst_t", r.worst_t},
            {"worst_T", r.worst_T},
            {"a_witness", r.a_witness},
            {"max_gap", r.max_gap},
            {"gap_at", r.gap_at},
            {"d_worst", r.d_worst},
            {"d_bound", r.d_bound},
            {"d_witness", r.d_witness},
            {"max_depth", r.max_depth},
            {"measure_sum", r.measure_sum}};
  if (r.overlap) j["overlap"] = json::array({r.overlap->first, r.overlap->second});
  return j;
}

inline json to_json(const KlReport& r) {
  return {{"hole", interval_json(r.hole)}, {"mu_u", r.mu_u}, {"lambda", r.lambda}, {"n", r.n},
          {"q", r.q},          {"lhs", r.lhs},   {"rhs", r.rhs},       {"rhs_se", r.rhs_se},
          {"gap", r.gap},      {"pass", r.pass}, {"escape_identity_gap", r.escape_identity_gap}};
}

inline json induced_summary(const InducedSystem& ind, const KacReport& k, const TailCurve& t) {
  return {{"alpha", ind.sys().alpha()},       {"Y", interval_json(ind.y)}, {"mu_Y_mass", ind.mu_y_mass},
          {"kac_gap", k.gap},                 {"tail_exponent", t.exponent}, {"tail_cap", ind.tail_cap},
          {"tail_mass_beyond_cap", ind.tail_mass}};
}

inline json to_json(const BridgeReport& r) {
  return {{"delta", r.delta},
          {"kappa", r.kappa},
          {"trials", r.trials},
          {"E_tau", r.e_tau},
          {"E_T_delta", r.e_t_delta},
          {"E_T_kappa_delta", r.e_t_kappa},
          {"E_tau_Y_kappa_delta", r.e_tau_kappa},
          {"c", r.c_lower},
          {"C", r.c_upper},
          {"lower_ok", r.lower_ok},
          {"upper_ok", r.upper_ok},
          {"pathwise_ok", r.pathwise_ok},
          {"pathwise_violations", r.pathwise_violations},
          {"E_mu_tau", r.e_tau_mu},
          {"mu_bound_ok", r.mu_bound_ok},
          {"R", r.r_estimate},
          {"censored_fraction", r.censored_fraction},
          {"confirmable", r.confirmable}};
}

}  // namespace covertime
