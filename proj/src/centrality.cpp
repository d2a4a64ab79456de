#include "tradenet/centrality.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "tradenet/csv.hpp"
#include "tradenet/kernels.hpp"

namespace tradenet {

std::vector<int> degree(const YearlyTradeGraph& graph, Direction direction) {
  const std::size_t n = graph.size();
  std::vector<int> k(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (graph.has_edge(i, j)) ++k[direction == Direction::out ? i : j];
    }
  }
  return k;
}

std::vector<double> strength(const YearlyTradeGraph& graph, Direction direction) {
  const std::size_t n = graph.size();
  std::vector<double> s(n, 0.0);
  if (direction == Direction::out) {
    for (std::size_t i = 0; i < n; ++i) s[i] = kernels::sum(graph.weight_row(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) kernels::add_scaled(1.0, graph.weight_row(i), s);
  }
  return s;
}

PageRankConvergenceError::PageRankConvergenceError(int iterations, double residual)
    : ComputationError("pagerank did not converge after " + std::to_string(iterations) +
                       " iterations (last L1 residual " + csv::format(residual) + ")"),
      residual_(residual) {}

std::vector<double> pagerank(const YearlyTradeGraph& graph, const PageRankOptions& options) {
  const double d = options.damping;
  if (!(d > 0.0 && d < 1.0)) throw ValidationError("damping must lie in (0, 1)");
  if (!(options.tolerance > 0.0)) throw ValidationError("pagerank tolerance must be positive");
  const std::size_t n = graph.size();
  if (n == 0) return {};

  // Row i of `transition` holds p_ji for all j: the share of j's rank sent to i.
  std::vector<double> transition(n * n, 0.0);
  std::vector<std::size_t> dangling;
  for (std::size_t j = 0; j < n; ++j) {
    double out_total = 0.0;
    if (options.mode == PageRankMode::weighted) {
      out_total = kernels::sum(graph.weight_row(j));
    } else {
      for (std::size_t i = 0; i < n; ++i) out_total += graph.has_edge(j, i) ? 1.0 : 0.0;
    }
    if (out_total == 0.0) {
      dangling.push_back(j);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!graph.has_edge(j, i)) continue;
      const double numer = options.mode == PageRankMode::weighted ? graph.weight(j, i) : 1.0;
      transition[i * n + j] = numer / out_total;
    }
  }

  const double nd = static_cast<double>(n);
  const double teleport = (1.0 - d) / nd;
  std::vector<double> rank(n, 1.0 / nd);
  std::vector<double> next(n, 0.0);
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double dangling_mass = 0.0;
    for (std::size_t j : dangling) dangling_mass += rank[j];
    const double spread = dangling_mass / nd;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = teleport + d * (kernels::dot({transition.data() + i * n, n}, rank) + spread);
    }
    residual = kernels::l1_distance(next, rank);
    rank.swap(next);
    if (residual < options.tolerance) {
      const double total = kernels::sum(rank);
      for (auto& r : rank) r /= total;
      return rank;
    }
  }
  throw PageRankConvergenceError(options.max_iterations, residual);
}

std::vector<double> clustering_coefficient(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  const auto& nbrs = graph.undirected_neighbors();
  std::vector<std::uint8_t> linked(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nbrs[i]) linked[i * n + j] = 1;
  }
  std::vector<double> cc(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = nbrs[i].size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) links += linked[nbrs[i][a] * n + nbrs[i][b]];
    }
    cc[i] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return cc;
}

std::vector<double> weighted_clustering_onnela(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<double> sym(n * n, 0.0);
  double max_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sym[i * n + j] = graph.weight(i, j) + graph.weight(j, i);
      max_w = std::max(max_w, sym[i * n + j]);
    }
  }
  std::vector<double> cc(n, 0.0);
  if (max_w == 0.0) return cc;
  for (auto& v : sym) v /= max_w;
  const auto& nbrs = graph.undirected_neighbors();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = nbrs[i].size();
    if (k < 2) continue;
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        const std::size_t u = nbrs[i][a];
        const std::size_t v = nbrs[i][b];
        total += std::cbrt(sym[i * n + u] * sym[i * n + v] * sym[u * n + v]);
      }
    }
    cc[i] = 2.0 * total / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return cc;
}

namespace {

// Hop distances from `source` over the undirected projection; -1 = unreachable.
std::vector<int> undirected_bfs(const YearlyTradeGraph& graph, std::size_t source) {
  const auto& nbrs = graph.undirected_neighbors();
  std::vector<int> dist(graph.size(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : nbrs[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> closeness(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<double> c(n, 0.0);
  if (n < 2) return c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = undirected_bfs(graph, i);
    long long total = 0;
    std::size_t reached = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[j] > 0) {
        total += dist[j];
        ++reached;
      }
    }
    if (reached == 0) continue;
    const double r = static_cast<double>(reached);
    c[i] = (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
  }
  return c;
}

BetweennessScores betweenness(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  // All-pairs hop distances and shortest-path counts on the directed graph.
  std::vector<int> dist(n * n, -1);
  std::vector<double> sigma(n * n, 0.0);
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (graph.has_edge(i, j)) out[i].push_back(j);
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    int* ds = dist.data() + s * n;
    double* ss = sigma.data() + s * n;
    ds[s] = 0;
    ss[s] = 1.0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w : out[v]) {
        if (ds[w] < 0) {
          ds[w] = ds[v] + 1;
          queue.push_back(w);
        }
        if (ds[w] == ds[v] + 1) ss[w] += ss[v];
      }
    }
  }

  // A geodesic j -> k passes through i iff d(j,i) + d(i,k) = d(j,k); the
  // number of such geodesics is sigma(j,i) * sigma(i,k).
  BetweennessScores scores{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || dist[j * n + i] < 0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const int djk = dist[j * n + k];
        const int dik = dist[i * n + k];
        if (djk < 0 || dik < 0 || dist[j * n + i] + dik != djk) continue;
        total += (sigma[j * n + i] * sigma[i * n + k]) / sigma[j * n + k];
      }
    }
    scores.raw[i] = total;
  }
  if (n >= 3) {
    const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (std::size_t i = 0; i < n; ++i) scores.normalized[i] = scores.raw[i] / norm;
  }
  return scores;
}

std::vector<double> random_walk_betweenness(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<double> rwb(n, 0.0);
  if (n < 3) return rwb;

  // Connected components of the undirected projection, each in node order.
  std::vector<int> component(n, -1);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    const auto dist = undirected_bfs(graph, s);
    members.emplace_back();
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] >= 0) {
        component[v] = static_cast<int>(members.size() - 1);
        members.back().push_back(v);
      }
    }
  }

  const auto& nbrs = graph.undirected_neighbors();
  for (const auto& nodes : members) {
    const std::size_t c = nodes.size();
    if (c < 3) continue;
    std::vector<std::size_t> local(n, 0);
    for (std::size_t a = 0; a < c; ++a) local[nodes[a]] = a;

    // Dense local adjacency (row-major) and Laplacian.
    std::vector<double> adj(c * c, 0.0);
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c),
                                                      static_cast<Eigen::Index>(c));
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t v : nbrs[nodes[a]]) {
        const std::size_t b = local[v];
        adj[a * c + b] = 1.0;
        laplacian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = -1.0;
      }
      laplacian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) =
          static_cast<double>(nbrs[nodes[a]].size());
    }

    // Ground the last node: the reduced Laplacian is SPD on a connected graph.
    const auto m = static_cast<Eigen::Index>(c - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(laplacian.topLeftCorner(m, m));
    if (llt.info() != Eigen::Success) throw ComputationError("random-walk betweenness: Laplacian factorisation failed");
    const Eigen::MatrixXd reduced_inverse = llt.solve(Eigen::MatrixXd::Identity(m, m));
    std::vector<double> potentials(c * c, 0.0);  // row-major, grounded row/col stay 0
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        potentials[static_cast<std::size_t>(a) * c + static_cast<std::size_t>(b)] = reduced_inverse(a, b);
      }
    }

    std::vector<double> flow(c, 0.0);
    std::vector<double> voltage(c, 0.0);
    for (std::size_t s = 0; s < c; ++s) {
      for (std::size_t t = s + 1; t < c; ++t) {
        // Unit current in at s, out at t.
        std::copy_n(potentials.data() + s * c, c, voltage.data());
        kernels::add_scaled(-1.0, {potentials.data() + t * c, c}, voltage);
        for (std::size_t i = 0; i < c; ++i) {
          if (i == s || i == t) continue;
          flow[i] += 0.5 * kernels::weighted_abs_deviation({adj.data() + i * c, c}, voltage, voltage[i]);
        }
      }
    }
    for (std::size_t a = 0; a < c; ++a) rwb[nodes[a]] = flow[a];
  }

  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  for (auto& v : rwb) v /= pairs;
  return rwb;
}

std::vector<int> kcore_decomposition(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  const auto& nbrs = graph.undirected_neighbors();
  std::vector<int> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = static_cast<int>(nbrs[i].size());
  std::vector<int> shell(n, 0);
  std::vector<bool> removed(n, false);
  int level = 0;
  for (std::size_t step = 0; step < n; ++step) {
    // Lowest residual degree first, ties in node (code) order.
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!removed[i] && (pick == n || deg[i] < deg[pick])) pick = i;
    }
    level = std::max(level, deg[pick]);
    shell[pick] = level;
    removed[pick] = true;
    for (std::size_t w : nbrs[pick]) {
      if (!removed[w]) --deg[w];
    }
  }
  return shell;
}

double CentralityRecord::measure(const std::string& name) const {
  if (name == "k_in") return k_in;
  if (name == "k_out") return k_out;
  if (name == "s_in") return s_in;
  if (name == "s_out") return s_out;
  if (name == "pagerank") return pagerank;
  if (name == "betweenness") return betweenness;
  if (name == "betweenness_norm") return betweenness_norm;
  if (name == "rwb") return rwb;
  if (name == "closeness") return closeness;
  if (name == "clustering") return clustering;
  if (name == "kcore") return kcore;
  throw ValidationError("unknown centrality measure '" + name + "'");
}

const std::vector<std::string>& centrality_measure_names() {
  static const std::vector<std::string> names = {
      "k_in",        "k_out", "s_in",      "s_out",      "pagerank", "betweenness",
      "betweenness_norm", "rwb", "closeness", "clustering", "kcore"};
  return names;
}

std::vector<CentralityRecord> compute_all(const YearlyTradeGraph& graph, const CentralityOptions& options) {
  const std::size_t n = graph.size();
  const auto k_in = degree(graph, Direction::in);
  const auto k_out = degree(graph, Direction::out);
  const auto s_in = strength(graph, Direction::in);
  const auto s_out = strength(graph, Direction::out);
  const auto pr = pagerank(graph, options.pagerank);
  const auto btw = betweenness(graph);
  const auto rw = random_walk_betweenness(graph);
  const auto cl = closeness(graph);
  const auto cc = options.clustering == ClusteringVariant::binary ? clustering_coefficient(graph)
                                                                  : weighted_clustering_onnela(graph);
  const auto core = kcore_decomposition(graph);

  std::vector<CentralityRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.country = graph.nodes()[i];
    r.year = graph.year();
    r.k_in = k_in[i];
    r.k_out = k_out[i];
    r.s_in = s_in[i];
    r.s_out = s_out[i];
    r.pagerank = pr[i];
    r.betweenness = btw.raw[i];
    r.betweenness_norm = btw.normalized[i];
    r.rwb = rw[i];
    r.closeness = cl[i];
    r.clustering = cc[i];
    r.kcore = core[i];
  }
  return records;
}

std::string centrality_csv(std::span<const CentralityRecord> records) {
  std::vector<std::string> header{"country", "year"};
  for (const auto& m : centrality_measure_names()) header.push_back(m);
  csv::Writer w(header);
  for (const auto& r : records) {
    w.add({r.country.str(), std::to_string(r.year), std::to_string(r.k_in), std::to_string(r.k_out),
           csv::format(r.s_in), csv::format(r.s_out), csv::format(r.pagerank), csv::format(r.betweenness),
           csv::format(r.betweenness_norm), csv::format(r.rwb), csv::format(r.closeness),
           csv::format(r.clustering), std::to_string(r.kcore)});
  }
  return w.str();
}

}  // namespace tradenet
