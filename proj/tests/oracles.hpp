#pragma once

// Independent test oracles. Everything here is deliberately written against
// the mathematical definitions (pair counting, series expansions, quadrature,
// exhaustive enumeration) and shares no code with the library implementations
// it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

// ---- Kendall's tau-b by O(n^2) pair counting -------------------------------
inline double kendalls_tau_bruteforce(std::span<const double> x,
                                      std::span<const double> y) {
  const std::size_t n = x.size();
  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) ++concordant; else ++discordant;
    }
  }
  const std::int64_t n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (n0 == ties_x || n0 == ties_y) return 0.0;
  const double num = static_cast<double>(concordant - discordant);
  const double den = std::sqrt(static_cast<double>(n0 - ties_x)) *
                     std::sqrt(static_cast<double>(n0 - ties_y));
  return std::clamp(num / den, -1.0, 1.0);
}

// ---- standard normal cdf from the error-function Taylor series -------------
inline double erf_series(double x) {
  double sum = 0.0, term = x;
  for (int k = 0;; ++k) {
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum)) && k > 3) break;
    term *= -x * x / (k + 1);
    if (k > 300) break;
  }
  return 2.0 / std::sqrt(M_PI) * sum;
}

inline double normal_cdf_series(double z) {
  return 0.5 * (1.0 + erf_series(z / std::sqrt(2.0)));
}

inline double normal_quantile_bisect(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf_series(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---- composite Simpson quadrature ------------------------------------------
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

// ---- Richardson-extrapolated central finite differences --------------------
inline double central_diff(const std::function<double(double)>& f, double t,
                           int order, double h) {
  double s = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    const double sign = (k % 2) ? -1.0 : 1.0;
    s += sign * binom * f(t + (order / 2.0 - k) * h);
    binom = binom * (order - k) / (k + 1);
  }
  return s / std::pow(h, order);
}

inline double derivative_richardson(const std::function<double(double)>& f,
                                    double t, int order, double h) {
  return (4.0 * central_diff(f, t, order, h / 2) - central_diff(f, t, order, h)) / 3.0;
}

// ---- exhaustive maximum spanning tree --------------------------------------
struct OracleEdge {
  int a, b;
  double w;
};

// enumerates every (n_nodes-1)-subset of edges and keeps the best spanning tree
inline double best_spanning_tree_weight(int n_nodes,
                                        const std::vector<OracleEdge>& edges,
                                        std::vector<int>* best_edges = nullptr) {
  const int m = static_cast<int>(edges.size());
  const int need = n_nodes - 1;
  std::vector<int> pick(need);
  double best = -1.0;
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == need) {
      std::vector<int> parent(n_nodes);
      for (int i = 0; i < n_nodes; ++i) parent[i] = i;
      std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
      };
      int merged = 0;
      double w = 0.0;
      for (int k = 0; k < need; ++k) {
        const auto& e = edges[pick[k]];
        const int ra = find(e.a), rb = find(e.b);
        if (ra == rb) return;
        parent[ra] = rb;
        ++merged;
        w += e.w;
      }
      if (merged == need && w > best) {
        best = w;
        if (best_edges) *best_edges = pick;
      }
      return;
    }
    for (int i = start; i <= m - (need - depth); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// ---- misc -------------------------------------------------------------------
inline double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace oracles
