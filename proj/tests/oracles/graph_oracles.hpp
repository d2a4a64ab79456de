#pragma once

// Independent reference computations for the graph measures. None of these
// share code paths with src/centrality.cpp.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tradenet/trade_graph.hpp"

namespace oracle {

/// Betweenness by explicit enumeration of simple paths. For every ordered
/// pair (j, k), paths of length L = 1, 2, ... are enumerated until some
/// exist; those are the geodesics. Terms are accumulated over (j, k) in
/// ascending order, matching the pair order used by the library, so
/// results are comparable exactly.
inline std::vector<double> betweenness_by_enumeration(const tradenet::YearlyTradeGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> count_through(n * n, std::vector<std::size_t>(n, 0));
  std::vector<std::size_t> total(n * n, 0);

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      for (std::size_t len = 1; len < n; ++len) {
        std::vector<std::size_t> path{j};
        std::vector<bool> used(n, false);
        used[j] = true;
        std::function<void()> extend = [&] {
          const std::size_t v = path.back();
          if (path.size() == len + 1) {
            if (v != k) return;
            ++total[j * n + k];
            for (std::size_t p = 1; p + 1 < path.size(); ++p) ++count_through[j * n + k][path[p]];
            return;
          }
          for (std::size_t w = 0; w < n; ++w) {
            if (used[w] || !g.has_edge(v, w)) continue;
            if (w == k && path.size() != len) continue;
            used[w] = true;
            path.push_back(w);
            extend();
            path.pop_back();
            used[w] = false;
          }
        };
        extend();
        if (total[j * n + k] > 0) break;
      }
    }
  }

  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j || total[j * n + k] == 0 || count_through[j * n + k][i] == 0) continue;
        b[i] += static_cast<double>(count_through[j * n + k][i]) / static_cast<double>(total[j * n + k]);
      }
    }
  }
  return b;
}

/// Random-walk betweenness from the absorbing Markov chain. For each source
/// s and target t in one component, the walk on the undirected projection is
/// absorbed at t; expected visits N_s. to transient states come from solving
/// (I - Q) directly. Expected net crossings of edge (i, j) are
/// |N_si / k_i - N_sj / k_j|; node throughput is half the sum over its edges.
inline std::vector<double> rwb_absorbing_chain(const tradenet::YearlyTradeGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) return out;
  const auto& nbrs = g.undirected_neighbors();

  // reachability by repeated relaxation (no BFS shared with the library)
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = true;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (!reach[i][v]) continue;
        for (std::size_t w : nbrs[v]) {
          if (!reach[i][w]) reach[i][w] = changed = true;
        }
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      if (!reach[s][t]) continue;
      std::vector<std::size_t> states;
      for (std::size_t v = 0; v < n; ++v) {
        if (reach[s][v] && v != t) states.push_back(v);
      }
      const auto m = static_cast<Eigen::Index>(states.size());
      std::vector<Eigen::Index> pos(n, -1);
      for (Eigen::Index a = 0; a < m; ++a) pos[states[static_cast<std::size_t>(a)]] = a;
      Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t v = states[static_cast<std::size_t>(a)];
        const double k = static_cast<double>(nbrs[v].size());
        for (std::size_t w : nbrs[v]) {
          if (pos[w] >= 0) system(a, pos[w]) -= 1.0 / k;
        }
      }
      // Row s of the fundamental matrix: solve (I - Q)^T x = e_s.
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e(pos[s]) = 1.0;
      const Eigen::VectorXd visits = system.transpose().fullPivLu().solve(e);
      std::vector<double> v(n, 0.0);
      for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t node = states[static_cast<std::size_t>(a)];
        v[node] = visits(a) / static_cast<double>(nbrs[node].size());
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == s || i == t || !reach[s][i]) continue;
        double through = 0.0;
        for (std::size_t w : nbrs[i]) through += std::fabs(v[i] - v[w]);
        out[i] += 0.5 * through;
      }
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  for (auto& x : out) x /= pairs;
  return out;
}

/// PageRank as the dominant eigenvector of the dense Google matrix.
inline std::vector<double> pagerank_dense_eigen(const tradenet::YearlyTradeGraph& g, double d, bool weighted) {
  const std::size_t n = g.size();
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd google(N, N);
  for (std::size_t j = 0; j < n; ++j) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += weighted ? g.weight(j, i) : (g.has_edge(j, i) ? 1.0 : 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double p = 0.0;
      if (out == 0.0) {
        p = 1.0 / static_cast<double>(n);
      } else {
        p = (weighted ? g.weight(j, i) : (g.has_edge(j, i) ? 1.0 : 0.0)) / out;
      }
      google(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * p + (1.0 - d) / static_cast<double>(n);
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(google);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < N; ++k) {
    if (solver.eigenvalues()(k).real() > solver.eigenvalues()(best).real()) best = k;
  }
  Eigen::VectorXd vec = solver.eigenvectors().col(best).real();
  vec /= vec.sum();
  return {vec.data(), vec.data() + n};
}

/// Checks the k-core property: every node with shell >= k has at least k
/// neighbours with shell >= k. Returns the number of violations.
inline std::size_t kcore_violations(const tradenet::YearlyTradeGraph& g, const std::vector<int>& shell) {
  std::size_t bad = 0;
  int max_shell = 0;
  for (int s : shell) max_shell = std::max(max_shell, s);
  for (int k = 1; k <= max_shell; ++k) {
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (shell[v] < k) continue;
      int deg = 0;
      for (std::size_t w : g.undirected_neighbors()[v]) deg += shell[w] >= k ? 1 : 0;
      if (deg < k) ++bad;
    }
  }
  return bad;
}

/// Brute-force maximality check: the k-core computed by repeated deletion
/// of nodes with degree < k must equal {v : shell(v) >= k}.
inline bool kcore_matches_repeated_deletion(const tradenet::YearlyTradeGraph& g, const std::vector<int>& shell) {
  const std::size_t n = g.size();
  int max_shell = 0;
  for (int s : shell) max_shell = std::max(max_shell, s);
  for (int k = 0; k <= max_shell + 1; ++k) {
    std::vector<bool> alive(n, true);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        int deg = 0;
        for (std::size_t w : g.undirected_neighbors()[v]) deg += alive[w] ? 1 : 0;
        if (deg < k) alive[v] = false, changed = true;
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (alive[v] != (shell[v] >= k)) return false;
    }
  }
  return true;
}

}  // namespace oracle
