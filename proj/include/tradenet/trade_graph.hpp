#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tradenet/country.hpp"

namespace tradenet {

/// One bilateral trade observation, value in thousands of USD.
struct FlowRecord {
  CountryCode origin;
  CountryCode destination;
  int year = 0;
  double value = 0.0;
  std::size_t line = 0;  // source line, 0 when not read from a file
};

struct FlowReadOptions {
  bool skip_malformed = false;
};

struct FlowReadResult {
  std::vector<FlowRecord> records;
  std::vector<std::string> skipped;  // one message per skipped line
};

/// Reads `origin,destination,year,value_kusd`. Malformed rows raise
/// ValidationError with the line number unless `skip_malformed` is set.
FlowReadResult read_flows_csv(const std::filesystem::path& path, const FlowReadOptions& options = {});
FlowReadResult parse_flows_csv(std::string_view text, const std::string& source,
                               const FlowReadOptions& options = {});

/// 25th percentile with linear interpolation between closest ranks
/// (h = 0.25 (n-1)). Throws ComputationError("no flows for year") on empty input.
double quartile_threshold(std::span<const double> values);

enum class EdgeFilter { off, first_quartile };
enum class QuartileScope { per_year, pooled };

/// Immutable weighted directed graph for one year. Nodes are sorted by code;
/// weights are row-major N x N with w(i, j) the flow from i to j.
class YearlyTradeGraph {
 public:
  YearlyTradeGraph() = default;
  /// Validates shape, zero diagonal and non-negativity.
  YearlyTradeGraph(int year, std::vector<CountryCode> nodes, std::vector<double> weights);

  /// Convenience for tests and fixtures: edges given as (from, to, weight).
  static YearlyTradeGraph from_edges(int year, std::vector<CountryCode> nodes,
                                     const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);

  int year() const { return year_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<CountryCode>& nodes() const { return nodes_; }
  std::optional<std::size_t> index_of(const CountryCode& code) const;

  double weight(std::size_t from, std::size_t to) const { return weights_[from * size() + to]; }
  bool has_edge(std::size_t from, std::size_t to) const { return adjacency_[from * size() + to] != 0; }
  std::span<const double> weight_row(std::size_t from) const {
    return {weights_.data() + from * size(), size()};
  }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::uint8_t>& adjacency() const { return adjacency_; }
  std::size_t edge_count() const { return edge_count_; }

  /// Undirected projection: i ~ j iff a_ij = 1 or a_ji = 1. Sorted lists.
  const std::vector<std::vector<std::size_t>>& undirected_neighbors() const { return undirected_; }

  /// Same graph with every weight multiplied by `factor` (> 0).
  YearlyTradeGraph scaled(double factor) const;

 private:
  int year_ = 0;
  std::vector<CountryCode> nodes_;
  std::vector<double> weights_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<std::size_t>> undirected_;
  std::size_t edge_count_ = 0;
};

struct GraphBuildOptions {
  EdgeFilter filter = EdgeFilter::first_quartile;
  /// When set, used instead of the per-year quartile (pooled scope).
  std::optional<double> threshold;
};

/// Builds the network for `year` from the records of that year (others are
/// ignored). Duplicate (origin, destination) pairs are summed first; with the
/// filter on, an edge survives iff its summed value strictly exceeds the
/// threshold. Every active universe country is a node.
YearlyTradeGraph build_yearly_graph(std::span<const FlowRecord> flows, int year,
                                    const CountryUniverse& universe,
                                    const GraphBuildOptions& options = {});

/// Quartile of all positive summed pair flows across `years`.
double pooled_quartile_threshold(std::span<const FlowRecord> flows, std::span<const int> years);

/// Builds one graph per year in [first_year, last_year].
std::vector<YearlyTradeGraph> build_graph_series(std::span<const FlowRecord> flows, int first_year,
                                                 int last_year, const CountryUniverse& universe,
                                                 EdgeFilter filter, QuartileScope scope);

struct NetworkStats {
  int year = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double average_degree = 0.0;
  double density = 0.0;
  double average_clustering = 0.0;
};

/// Throws ComputationError("degenerate graph") when N < 2.
NetworkStats network_stats(const YearlyTradeGraph& graph);

/// Throws ValidationError on duplicate or unsorted years.
std::vector<NetworkStats> evolution_series(std::span<const YearlyTradeGraph> graphs);

std::string evolution_csv(std::span<const NetworkStats> series);

}  // namespace tradenet
