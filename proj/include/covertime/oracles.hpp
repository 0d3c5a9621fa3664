#pragma once
// Exact small-instance values for the doubling map with dyadic holes.
// A hole of depth k is a set of k-bit words; a point's window at time n is
// the k-bit word of its binary digits n+1 .. n+k.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "core.hpp"

namespace covertime::oracle {

// Words w (most significant digit first) whose cylinders lie in [a, b).
inline std::vector<char> dyadic_hole(double a, double b, unsigned k) {
  const std::size_t n = std::size_t{1} << k;
  std::vector<char> h(n, 0);
  for (std::size_t w = 0; w < n; ++w) {
    const double lo = std::ldexp(static_cast<double>(w), -static_cast<int>(k));
    const double hi = std::ldexp(static_cast<double>(w + 1), -static_cast<int>(k));
    if (lo >= a && hi <= b) h[w] = 1;
    else if (lo < b && hi > a) throw ConfigError("hole is not a union of depth-k dyadic cylinders");
  }
  return h;
}

// Leading eigenvalue of the survivor chain: one step appends a fair bit.
inline double survivor_lambda(const std::vector<char>& hole, unsigned k) {
  const std::size_t n = std::size_t{1} << k;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t w = 0; w < n; ++w) {
    if (hole[w]) continue;
    for (std::size_t b = 0; b < 2; ++b) {
      const std::size_t v = ((w << 1) | b) & (n - 1);
      if (!hole[v]) a(v, w) += 0.5;
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  double best = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    best = std::max(best, std::abs(es.eigenvalues()(i)));
  return best;
}

// E(tau_U) for a Lebesgue start, tau_U = first n >= 1 with window in the hole.
inline double absorbing_hitting_time(const std::vector<char>& hole, unsigned k) {
  const std::size_t n = std::size_t{1} << k;
  // h(w) = expected steps to reach the hole from window w (h = 0 in the hole
  // only after at least one step, so solve for the outside states)
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t b = 0; b < 2; ++b) {
      const std::size_t v = ((w << 1) | b) & (n - 1);
      if (!hole[v]) a(w, v) -= 0.5;
    }
  const Eigen::VectorXd h = a.partialPivLu().solve(rhs);
  return h.mean();
}

// mu_U(tau_U = j) for j = 1..n_max, exact over digit prefixes.
inline std::vector<double> return_law(const std::vector<char>& hole, unsigned k, std::size_t n_max) {
  const std::size_t n = std::size_t{1} << k;
  std::vector<double> p(n, 0.0), law;
  double mass = 0;
  for (std::size_t w = 0; w < n; ++w)
    if (hole[w]) {
      p[w] = 1.0;
      mass += 1.0;
    }
  for (auto& v : p) v /= mass;
  for (std::size_t j = 1; j <= n_max; ++j) {
    std::vector<double> q(n, 0.0);
    double hit = 0;
    for (std::size_t w = 0; w < n; ++w) {
      if (p[w] == 0) continue;
      for (std::size_t b = 0; b < 2; ++b) {
        const std::size_t v = ((w << 1) | b) & (n - 1);
        if (hole[v]) hit += 0.5 * p[w];
        else q[v] += 0.5 * p[w];
      }
    }
    law.push_back(hit);
    p.swap(q);
  }
  return law;
}

// mu_U(tau_U >= n) for n = 1..n_max.
inline std::vector<double> return_survival(const std::vector<char>& hole, unsigned k, std::size_t n_max) {
  const auto law = return_law(hole, k, n_max);
  std::vector<double> s(n_max);
  double acc = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    s[n - 1] = acc;
    acc -= law[n - 1];
  }
  return s;
}

// q_{j,U} = mu_U(tau_U = j + 1) by enumerating all digit strings of length
// k + j + 1 that start in the hole.
inline double enumerated_q(const std::vector<char>& hole, unsigned k, unsigned j) {
  const unsigned len = k + j + 1;
  if (len > 30) throw ConfigError("prefix too long for enumeration");
  const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  std::uint64_t in_u = 0, good = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << len); ++s) {
    auto window = [&](unsigned t) { return (s >> (len - k - t)) & mask; };
    if (!hole[window(0)]) continue;
    ++in_u;
    bool ok = true;
    for (unsigned t = 1; t <= j && ok; ++t) ok = !hole[window(t)];
    if (ok && hole[window(j + 1)]) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(in_u);
}

// E(cover time) of the 2^k dyadic bins for a Lebesgue start, counting the
// start as step 0. State: (visited set, current window).
inline double cover_time_dp(unsigned k) {
  if (k > 4) throw ConfigError("cover-time recursion limited to 16 bins");
  const std::size_t n = std::size_t{1} << k;
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<double> e((full + 1) * n, 0.0);
  for (std::size_t s = full; s-- > 1;) {
    // windows w in s; unknowns e(s, w) coupled through moves that stay in s
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    for (std::size_t w = 0; w < n; ++w) {
      if (!((s >> w) & 1)) continue;
      for (std::size_t b = 0; b < 2; ++b) {
        const std::size_t v = ((w << 1) | b) & (n - 1);
        const std::size_t t = s | (std::size_t{1} << v);
        if (t == s) a(w, v) -= 0.5;
        else if (t != full) rhs(w) += 0.5 * e[t * n + v];
      }
    }
    const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    for (std::size_t w = 0; w < n; ++w)
      if ((s >> w) & 1) e[s * n + w] = x(w);
  }
  double tot = 0;
  for (std::size_t w = 0; w < n; ++w) tot += e[(std::size_t{1} << w) * n + w];
  return tot / n;
}

}  // namespace covertime::oracle
