// covertime: experiment driver.
// Exit status: 0 success, 1 error, 2 acceptance failure in selftest.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "covertime/acceptance.hpp"
#include "covertime/io.hpp"

using namespace covertime;
namespace fs = std::filesystem;

namespace {

// Every key with its default; unknown keys are rejected.
json defaults() {
  return {{"map", "doubling"},
          {"alpha", 0.3},
          {"widths", {0.2, 0.3, 0.5}},
          {"deltas", "2^-4..2^-8"},
          {"delta", 0.03125},
          {"trials", 200},
          {"seed", 7},
          {"max_steps", 0},
          {"hole", {0.0, 0.25}},
          {"resolution", 256},
          {"n_max", 50},
          {"n", 0},
          {"family", "prop-u"},
          {"n1", 1},
          {"n3", -1},
          {"samples", 100000},
          {"orbit", 10000000},
          {"quick", false},
          {"only", json::array()},
          {"out", "."},
          {"threads", 0}};
}

void check_type(const std::string& key, const json& v, const json& def) {
  const auto bad = [&](const char* want) { throw ConfigError("/" + key + ": expected " + want); };
  if (def.is_number() && !v.is_number()) bad("a number");
  if (def.is_number_integer() && v.is_number_float()) bad("an integer");
  if (def.is_boolean() && !v.is_boolean()) bad("a boolean");
  if (def.is_array() && !v.is_array()) bad("an array");
  if (key != "deltas" && def.is_string() && !v.is_string()) bad("a string");
  if (key == "deltas" && !v.is_string() && !v.is_array()) bad("a string or an array");
  if (def.is_array())
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!v[i].is_number()) throw ConfigError("/" + key + "/" + std::to_string(i) + ": expected a number");
}

void merge(json& cfg, const json& src) {
  if (!src.is_object()) throw ConfigError(": config must be a JSON object");
  const auto def = defaults();
  for (const auto& [k, v] : src.items()) {
    if (!def.contains(k)) throw ConfigError("/" + k + ": unknown key");
    check_type(k, v, def[k]);
    cfg[k] = v;
  }
}

double parse_number(const std::string& s, const std::string& key = "deltas") {
  static const std::regex pow2(R"(\s*2\^(-?\d+)\s*)");
  std::smatch m;
  if (std::regex_match(s, m, pow2)) return std::ldexp(1.0, std::stoi(m[1]));
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("/" + key + ": cannot parse '" + s + "'");
  return v;
}

// "a..b" expands geometrically with ratio 1/2 from a down to b; commas
// separate explicit values.
std::vector<double> parse_deltas(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else {
    const std::string s = j.get<std::string>();
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
      const double a = parse_number(s.substr(0, dots));
      const double b = parse_number(s.substr(dots + 2));
      if (!(a > 0 && b > 0)) throw ConfigError("/deltas: endpoints must be positive");
      const double hi = std::max(a, b), lo = std::min(a, b);
      for (double d = hi; d >= lo * (1 - 1e-12); d /= 2) out.push_back(d);
    } else {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(parse_number(tok));
    }
  }
  if (out.empty()) throw ConfigError("/deltas: empty grid");
  for (double d : out)
    if (!(d > 0 && d < 1)) throw ConfigError("/deltas: values must lie in (0,1)");
  return out;
}

MapSystem make_map(const json& cfg) {
  const auto name = cfg["map"].get<std::string>();
  const double alpha = cfg["alpha"].get<double>();
  if (name == "doubling") return MapSystem::doubling();
  if (name == "fbl") return MapSystem::full_branched_linear(cfg["widths"].get<std::vector<double>>());
  if (name == "gauss") return MapSystem::gauss();
  if (name == "lsv") return MapSystem::lsv(alpha);
  if (name == "slow_lsv") return MapSystem::slow_bernoulli_lsv(alpha);
  if (name == "quadratic_gap") return MapSystem::quadratic_gap();
  throw ConfigError("/map: unknown map '" + name + "' (doubling, fbl, gauss, lsv, slow_lsv, quadratic_gap)");
}

Interval hole_of(const json& cfg) {
  const auto h = cfg["hole"].get<std::vector<double>>();
  if (h.size() != 2 || !(h[0] < h[1]) || h[0] < 0 || h[1] > 1) throw ConfigError("/hole: expected [a, b] in [0,1]");
  return {h[0], h[1]};
}

struct Run {
  std::string sub;
  json cfg;
  std::string hash;
  fs::path out;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;

  void csv(const std::string& name, const Csv& c) {
    c.write((out / name).string());
    artifacts.push_back(name);
  }
  void json_file(const std::string& name, json j) {
    j["config_hash"] = hash;
    write_json((out / name).string(), j);
    artifacts.push_back(name);
  }
  std::size_t sz(const char* k) const {
    const auto v = cfg[k].get<long long>();
    if (v < 0) throw ConfigError(std::string("/") + k + ": must be non-negative");
    return static_cast<std::size_t>(v);
  }
};

int cmd_cover(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto deltas = parse_deltas(r.cfg["deltas"]);
  const auto c = expected_cover_time(sys, m, deltas, r.sz("trials"), r.seed, r.threads, r.sz("max_steps"));
  Csv csv({"delta", "trials", "mean", "variance", "ci_lo", "ci_hi", "censored_fraction", "min_ball", "normalized",
           "config_hash"});
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto& e = c.ensembles[i];
    csv.row(deltas[i], e.trial_count, e.mean, e.variance, e.ci_lo, e.ci_hi, e.censored_fraction, c.min_ball[i],
            c.normalized[i], r.hash);
  }
  r.csv("cover.csv", csv);
  r.json_file("cover.json", {{"slope", c.fit.slope}, {"intercept", c.fit.intercept}, {"residual", c.fit.residual}});
  std::cout << "slope " << fmt17(c.fit.slope) << "\n";
  return 0;
}

int cmd_hit(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto u = hole_of(r.cfg);
  const std::uint64_t cap = r.sz("max_steps") ? r.sz("max_steps") : 100000000;
  const auto e = hitting_ensemble(sys, m, u, r.sz("trials"), r.seed, cap, r.threads);
  const auto ret = return_ensemble(sys, m, u, r.sz("trials"), derive_seed(r.seed, 1), cap, r.threads);
  const double mu = m.mass(u);
  Csv csv({"lo", "hi", "mu_u", "trials", "hit_mean", "hit_ci_lo", "hit_ci_hi", "return_mean", "return_times_mu",
           "config_hash"});
  csv.row(u.lo, u.hi, mu, e.trial_count, e.mean, e.ci_lo, e.ci_hi, ret.mean, ret.mean * mu, r.hash);
  r.csv("hit.csv", csv);
  std::cout << "E(tau_U) " << fmt17(e.mean) << "  E_U(tau_U) mu(U) " << fmt17(ret.mean * mu) << "\n";
  return 0;
}

int cmd_survival(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto u = hole_of(r.cfg);
  const auto s = return_survival(sys, m, u, r.sz("n_max"), r.sz("trials"), r.seed, r.threads);
  const auto op = build_ulam(sys, r.sz("resolution"), Alignment::Uniform, r.threads);
  const double lam = open_leading_pair(op, u).lambda;
  Csv csv({"n", "survival", "wilson_lo", "wilson_hi", "lambda_pow_n", "config_hash"});
  for (std::size_t n = 1; n <= s.survival.size(); ++n)
    csv.row(n, s.survival[n - 1], s.wilson_lo[n - 1], s.wilson_hi[n - 1], std::pow(lam, static_cast<double>(n)),
            r.hash);
  r.csv("survival.csv", csv);
  std::cout << "lambda " << fmt17(lam) << "\n";
  return 0;
}

int cmd_spectrum(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto u = hole_of(r.cfg);
  const auto op = build_ulam(sys, r.sz("resolution"), Alignment::Uniform, r.threads);
  const auto o = open_leading_pair(op, u);
  const double mu = m.mass(o.hole);
  Csv csv({"bin_lo", "bin_hi", "eigfun", "config_hash"});
  for (std::size_t i = 0; i < o.eigfun.size(); ++i) csv.row(op.edges[i], op.edges[i + 1], o.eigfun[i], r.hash);
  r.csv("eigfun.csv", csv);
  r.json_file("spectrum.json", {{"hole", interval_json(o.hole)},
                                {"lambda", o.lambda},
                                {"mu_u", mu},
                                {"ratio", (1 - o.lambda) / mu},
                                {"iterations", o.iterations},
                                {"residual", o.residual},
                                {"converged", o.converged}});
  std::cout << "lambda " << fmt17(o.lambda) << "\n";
  return 0;
}

int cmd_klcheck(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto u = hole_of(r.cfg);
  std::size_t n = r.sz("n");
  if (n == 0) n = static_cast<std::size_t>(std::floor(1 / m.mass(u)));
  const auto k = kl_identity_check(sys, m, u, n, r.sz("resolution"), r.sz("trials"), r.seed, r.threads);
  r.json_file("klcheck.json", to_json(k));
  std::cout << "lhs " << fmt17(k.lhs) << " rhs " << fmt17(k.rhs) << " gap " << fmt17(k.gap) << "\n";
  return 0;
}

int cmd_partition(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const double delta = r.cfg["delta"].get<double>();
  const auto fam_name = r.cfg["family"].get<std::string>();
  const auto cfg = prop_u_config(sys, r.sz("n1"));
  HoleFamily fam;
  json extra;
  if (fam_name == "uniform") {
    fam = build_uniform_family(delta, &sys);
  } else if (fam_name == "prop-u") {
    fam = build_prop_u_family(sys, cfg, delta);
  } else if (fam_name == "prop-u-prime") {
    const std::size_t a = sys.label_base(), b = sys.label_base() + 1;
    const long long n3c = r.cfg["n3"].get<long long>();
    const std::size_t n3 = n3c < 0 ? minimal_n3(sys, default_symbolic_measure(sys), a, b) : n3c;
    PropUPrimeReport rep;
    fam = build_prop_u_prime_family(sys, delta, a, b, n3, &rep);
    const auto v = verify_prop_u_prime(fam, sys, rep);
    extra = {{"n3", n3}, {"candidates", rep.candidates}, {"disjoint", rep.disjoint}, {"separated", rep.separated},
             {"b", v.b}, {"d", v.d}, {"g", v.g}};
  } else {
    throw ConfigError("/family: expected uniform, prop-u or prop-u-prime");
  }
  const auto rep = verify_properties(fam, sys, m, cfg, fam.provenance != Provenance::PropUPrime, r.threads);
  Csv csv({"lo", "hi", "center", "depth", "config_hash"});
  for (std::size_t i = 0; i < fam.cells.size(); ++i)
    csv.row(fam.cells[i].lo, fam.cells[i].hi, fam.centers[i], fam.depths[i], r.hash);
  r.csv("family.csv", csv);
  json j = {{"family", provenance_name(fam.provenance)}, {"cells", fam.cells.size()}, {"t", fam.t}, {"T", fam.T},
            {"n1", cfg.n1}, {"beta", cfg.beta}, {"properties", to_json(rep)}};
  if (!extra.is_null()) j["prime"] = extra;
  if (fam.cells.size() <= HoleFamily::kWordLimit) j["family_detail"] = to_json(fam);
  r.json_file("partition.json", j);
  std::cout << fam.cells.size() << " cells; (a)-(e): " << rep.a << rep.b << rep.c << rep.d << rep.e << "\n";
  return 0;
}

int cmd_induce(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto ind = make_induced(sys, r.seed, r.sz("orbit"));
  const auto k = kac_check(ind, r.sz("samples"), derive_seed(r.seed, 1), r.threads);
  const auto t = return_tail(ind, r.sz("n_max"), r.sz("samples"), derive_seed(r.seed, 2), r.threads);
  Csv csv({"n", "survival", "config_hash"});
  for (std::size_t i = 0; i < t.n.size(); ++i) csv.row(t.n[i], t.survival[i], r.hash);
  r.csv("return_tail.csv", csv);
  json j = induced_summary(ind, k, t);
  const auto br = bridge_check(ind, r.cfg["delta"].get<double>(), r.sz("trials"), derive_seed(r.seed, 3), r.threads);
  j["bridge"] = to_json(br);
  r.json_file("induced.json", j);
  std::cout << "kac gap " << fmt17(k.gap) << "  tail exponent " << fmt17(t.exponent) << "\n";
  return 0;
}

int cmd_minball(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto deltas = parse_deltas(r.cfg["deltas"]);
  const auto f = minkowski_dimension_estimate(m, deltas, support_breaks(sys), r.threads);
  Csv csv({"delta", "min_ball", "argmin", "err", "config_hash"});
  for (std::size_t i = 0; i < f.curve.deltas.size(); ++i)
    csv.row(f.curve.deltas[i], f.curve.values[i], f.curve.argmins[i], f.err_curve[i], r.hash);
  r.csv("minball.csv", csv);
  r.json_file("minball.json", {{"slope", f.slope}, {"residual", f.residual}, {"finite_fit", f.finite_fit},
                               {"monotone", f.curve.monotone}});
  std::cout << "slope " << fmt17(f.slope) << "\n";
  return 0;
}

int cmd_matthews(Run& r) {
  const auto sys = make_map(r.cfg);
  const auto m = default_measure(sys, r.seed);
  const auto target = uniform_bins(r.cfg["delta"].get<double>());
  const auto rep = matthews_check(sys, m, target, r.sz("trials"), r.seed, 2000, r.threads);
  r.json_file("matthews.json", {{"cells", rep.cells},
                                {"mean_cover", rep.mean_cover},
                                {"max_hit", rep.max_hit},
                                {"harmonic", rep.harmonic},
                                {"ratio", rep.ratio},
                                {"hit_means", rep.hit_means},
                                {"a_sk", rep.a_sk}});
  std::cout << "ratio " << fmt17(rep.ratio) << "\n";
  return 0;
}

int cmd_selftest(Run& r) {
  using namespace acceptance;
  Profile p;
  p.seed = r.seed;
  p.threads = r.threads;
  p.quick = r.cfg["quick"].get<bool>();
  std::set<int> only;
  for (const auto& v : r.cfg["only"]) only.insert(v.get<int>());
  const auto rs = all_runners();
  std::vector<Criterion> done;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    if (p.quick && id == 15) continue;
    done.push_back(run_one(rs[i], p, id));
    std::cout << line(done.back()) << std::endl;
  }
  Csv csv({"criterion", "metric", "value", "config_hash"});
  for (const auto& c : done) {
    csv.row(c.id, std::string("pass"), c.pass ? 1.0 : 0.0, r.hash);
    for (const auto& [k, v] : c.metrics) csv.row(c.id, k, v, r.hash);
  }
  r.csv("selftest.csv", csv);
  int failed = 0;
  for (const auto& c : done) failed += !c.pass;
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covertime: cover, hitting and escape experiments for interval maps"};
  app.require_subcommand(1);
  std::string config_path;
  // flag values are kept as strings and merged as JSON
  std::map<std::string, std::string> flags;
  const std::vector<std::pair<std::string, std::string>> options = {
      {"map", "doubling|fbl|gauss|lsv|slow_lsv|quadratic_gap"},
      {"alpha", "LSV exponent"},
      {"widths", "FBL branch widths, comma separated"},
      {"deltas", "delta grid: 'a..b' halves from a to b, or a comma list; 2^-k accepted"},
      {"delta", "single delta"},
      {"trials", "trials per point"},
      {"seed", "master seed"},
      {"max-steps", "trial step cap (0 = default)"},
      {"hole", "hole a,b"},
      {"resolution", "Ulam resolution"},
      {"n-max", "largest n"},
      {"n", "kl truncation (0 = floor(1/mu(U)))"},
      {"family", "uniform|prop-u|prop-u-prime"},
      {"n1", "sweep depth"},
      {"n3", "tail length b^n3 (-1 = smallest admissible)"},
      {"samples", "return-time samples"},
      {"orbit", "orbit length for mu(Y)"},
      {"out", "output directory"},
      {"threads", "worker threads"},
      {"only", "selftest criteria, comma separated"}};
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"cover", "expected cover time over a delta grid"},
      {"hit", "hitting and return times of a hole"},
      {"survival", "return survival against lambda_U^n"},
      {"spectrum", "escape eigenvalue of a hole (Ulam)"},
      {"klcheck", "kl identity for a hole"},
      {"partition", "hole family and its property report"},
      {"induce", "first-return system on [1/2,1]"},
      {"minball", "smallest delta-ball measure"},
      {"matthews", "Matthews bound on a hole family"},
      {"selftest", "acceptance criteria"}};
  bool quick = false;
  for (const auto& [s, about] : subs) {
    auto* sc = app.add_subcommand(s, about);
    sc->add_option("--config", config_path, "JSON config file; flags override it");
    for (const auto& [k, help] : options) sc->add_option("--" + k, flags[k], help);
    if (s == "selftest") sc->add_flag("--quick", quick, "reduced trial counts");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Run r;
    r.sub = app.get_subcommands().front()->get_name();
    r.cfg = defaults();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError(": cannot open " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string(": ") + e.what());
      }
      merge(r.cfg, j);
    }
    json fj = json::object();
    auto* sc = app.get_subcommands().front();
    for (const auto& [k, help] : options) {
      if (sc->count("--" + k) == 0) continue;
      std::string key = k;
      std::replace(key.begin(), key.end(), '-', '_');
      const std::string& v = flags[k];
      const json& def = r.cfg[key];
      if (key == "deltas" || def.is_string()) {
        fj[key] = v;
      } else if (def.is_array()) {
        json arr = json::array();
        std::stringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) arr.push_back(key == "only" ? json(std::stoi(tok)) : json(std::stod(tok)));
        fj[key] = arr;
      } else if (key == "delta") {
        try {
          fj[key] = parse_number(v, key);
        } catch (const std::logic_error&) {
          throw ConfigError("/delta: cannot parse '" + v + "'");
        }
      } else {
        try {
          fj[key] = json::parse(v);
        } catch (const json::parse_error&) {
          throw ConfigError("/" + key + ": cannot parse '" + v + "'");
        }
      }
    }
    if (quick) fj["quick"] = true;
    merge(r.cfg, fj);
    if (const char* s = std::getenv("COVERTIME_SEED")) r.cfg["seed"] = std::strtoull(s, nullptr, 10);
    r.seed = r.cfg["seed"].get<std::uint64_t>();
    const long long th = r.cfg["threads"].get<long long>();
    r.threads = th > 0 ? static_cast<unsigned>(th) : default_threads();
    r.cfg["threads"] = r.threads;
    r.out = r.cfg["out"].get<std::string>();
    fs::create_directories(r.out);
    // results do not depend on threads or the output location
    json hashed = r.cfg;
    hashed.erase("threads");
    hashed.erase("out");
    hashed["subcommand"] = r.sub;
    r.hash = config_hash(hashed);
    int rc = 0;
    if (r.sub == "cover") rc = cmd_cover(r);
    else if (r.sub == "hit") rc = cmd_hit(r);
    else if (r.sub == "survival") rc = cmd_survival(r);
    else if (r.sub == "spectrum") rc = cmd_spectrum(r);
    else if (r.sub == "klcheck") rc = cmd_klcheck(r);
    else if (r.sub == "partition") rc = cmd_partition(r);
    else if (r.sub == "induce") rc = cmd_induce(r);
    else if (r.sub == "minball") rc = cmd_minball(r);
    else if (r.sub == "matthews") rc = cmd_matthews(r);
    else if (r.sub == "selftest") rc = cmd_selftest(r);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json resolved = r.cfg;
    resolved["subcommand"] = r.sub;
    write_json((r.out / "manifest.json").string(), manifest(resolved, r.seed, wall, r.artifacts));
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
