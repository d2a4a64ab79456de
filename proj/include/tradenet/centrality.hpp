#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tradenet/country.hpp"
#include "tradenet/error.hpp"
#include "tradenet/trade_graph.hpp"

namespace tradenet {

// All per-node results are vectors aligned with graph.nodes().
//
// Domains: degree, strength, PageRank and betweenness use the directed
// graph; clustering, closeness, random-walk betweenness and k-core use the
// undirected projection.

enum class Direction { in, out };

std::vector<int> degree(const YearlyTradeGraph& graph, Direction direction);
std::vector<double> strength(const YearlyTradeGraph& graph, Direction direction);

enum class PageRankMode { binary, weighted };

struct PageRankOptions {
  double damping = 0.85;
  PageRankMode mode = PageRankMode::weighted;
  double tolerance = 1e-12;  // L1 change between iterates
  int max_iterations = 1000;
};

class PageRankConvergenceError : public ComputationError {
 public:
  PageRankConvergenceError(int iterations, double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Power iteration on PR_i = (1-d)/N + d * sum_j p_ji PR_j, where p_ji is
/// a_ji / k_j^out (binary) or w_ji / s_j^out (weighted). Rank held by
/// nodes without out-edges is spread uniformly.
std::vector<double> pagerank(const YearlyTradeGraph& graph, const PageRankOptions& options = {});

/// cc_i = 2 e_i / (k_i (k_i - 1)), 0 when k_i < 2.
std::vector<double> clustering_coefficient(const YearlyTradeGraph& graph);

/// Onnela et al. weighted variant on symmetrised weights normalised by the
/// largest one. Not used by the panel unless explicitly requested.
std::vector<double> weighted_clustering_onnela(const YearlyTradeGraph& graph);

/// Hop-count closeness. For a node reaching r - 1 others the value is
/// ((r-1)/sum d) * ((r-1)/(N-1)); isolated nodes get 0.
std::vector<double> closeness(const YearlyTradeGraph& graph);

struct BetweennessScores {
  std::vector<double> raw;
  std::vector<double> normalized;  // raw / ((N-1)(N-2))
};

/// Shortest-path betweenness over ordered pairs of the directed graph with
/// unit edge lengths.
BetweennessScores betweenness(const YearlyTradeGraph& graph);

/// Newman's random-walk (current-flow) betweenness: for every unordered
/// source/target pair in the same component, the net current through each
/// intermediate node when a unit current enters at the source and leaves at
/// the target. Summed and divided by N(N-1)/2.
std::vector<double> random_walk_betweenness(const YearlyTradeGraph& graph);

/// Shell index of every node.
std::vector<int> kcore_decomposition(const YearlyTradeGraph& graph);

enum class ClusteringVariant { binary, onnela };

struct CentralityOptions {
  PageRankOptions pagerank;
  ClusteringVariant clustering = ClusteringVariant::binary;
};

struct CentralityRecord {
  CountryCode country;
  int year = 0;
  int k_in = 0;
  int k_out = 0;
  double s_in = 0.0;
  double s_out = 0.0;
  double pagerank = 0.0;
  double betweenness = 0.0;
  double betweenness_norm = 0.0;
  double rwb = 0.0;
  double closeness = 0.0;
  double clustering = 0.0;
  int kcore = 0;

  /// Looks a measure up by its column name (e.g. "pagerank", "kcore").
  double measure(const std::string& name) const;
};

/// Names accepted by CentralityRecord::measure, in CSV column order.
const std::vector<std::string>& centrality_measure_names();

std::vector<CentralityRecord> compute_all(const YearlyTradeGraph& graph,
                                          const CentralityOptions& options = {});

std::string centrality_csv(std::span<const CentralityRecord> records);

}  // namespace tradenet
