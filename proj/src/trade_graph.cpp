#include "tradenet/trade_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include "tradenet/centrality.hpp"
#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"

namespace tradenet {

FlowReadResult parse_flows_csv(std::string_view text, const std::string& source,
                               const FlowReadOptions& options) {
  const auto table = csv::parse(text);
  const auto c_origin = table.require_column("origin", source);
  const auto c_dest = table.require_column("destination", source);
  const auto c_year = table.require_column("year", source);
  const auto c_value = table.require_column("value_kusd", source);

  FlowReadResult result;
  result.records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    try {
      if (row.fields.size() != table.header.size()) {
        throw ValidationError("line " + std::to_string(row.line) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(row.fields.size()));
      }
      FlowRecord r;
      if (!CountryCode::is_valid(row.fields[c_origin]) || !CountryCode::is_valid(row.fields[c_dest])) {
        throw ValidationError("line " + std::to_string(row.line) + ": invalid country code");
      }
      r.origin = CountryCode(row.fields[c_origin]);
      r.destination = CountryCode(row.fields[c_dest]);
      r.year = static_cast<int>(csv::parse_int(row.fields[c_year], row.line, "year"));
      r.value = csv::parse_double(row.fields[c_value], row.line, "value_kusd");
      r.line = row.line;
      if (r.origin == r.destination) {
        throw ValidationError("line " + std::to_string(row.line) + ": origin equals destination");
      }
      if (!std::isfinite(r.value) || r.value < 0.0) {
        throw ValidationError("line " + std::to_string(row.line) + ": negative or non-finite value");
      }
      result.records.push_back(r);
    } catch (const ValidationError& e) {
      if (!options.skip_malformed) throw ValidationError(source + ": " + e.what());
      result.skipped.push_back(source + ": " + e.what());
    }
  }
  return result;
}

FlowReadResult read_flows_csv(const std::filesystem::path& path, const FlowReadOptions& options) {
  std::ifstream probe(path);
  if (!probe) throw ValidationError("cannot open '" + path.string() + "'");
  probe.close();
  const auto table_text = [&] {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  return parse_flows_csv(table_text, path.string(), options);
}

double quartile_threshold(std::span<const double> values) {
  if (values.empty()) throw ComputationError("no flows for year");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = 0.25 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

YearlyTradeGraph::YearlyTradeGraph(int year, std::vector<CountryCode> nodes, std::vector<double> weights)
    : year_(year), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  const std::size_t n = nodes_.size();
  if (!std::is_sorted(nodes_.begin(), nodes_.end()) ||
      std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ValidationError("graph nodes must be sorted and unique");
  }
  if (weights_.size() != n * n) throw ValidationError("weight matrix must be N x N");
  adjacency_.assign(n * n, 0);
  undirected_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights_[i * n + j];
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be finite and >= 0");
      if (i == j && w != 0.0) throw ValidationError("weight matrix diagonal must be zero");
      if (w > 0.0) {
        adjacency_[i * n + j] = 1;
        ++edge_count_;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (adjacency_[i * n + j] || adjacency_[j * n + i])) undirected_[i].push_back(j);
    }
  }
}

YearlyTradeGraph YearlyTradeGraph::from_edges(
    int year, std::vector<CountryCode> nodes,
    const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n * n, 0.0);
  for (const auto& [from, to, value] : edges) {
    if (from >= n || to >= n) throw ValidationError("edge endpoint out of range");
    w[from * n + to] += value;
  }
  return YearlyTradeGraph(year, std::move(nodes), std::move(w));
}

std::optional<std::size_t> YearlyTradeGraph::index_of(const CountryCode& code) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), code);
  if (it == nodes_.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

YearlyTradeGraph YearlyTradeGraph::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scale factor must be positive");
  std::vector<double> w(weights_);
  for (auto& v : w) v *= factor;
  return YearlyTradeGraph(year_, nodes_, std::move(w));
}

namespace {

using PairKey = std::pair<CountryCode, CountryCode>;

// Sums duplicate (origin, destination) records of one year, checking codes.
std::map<PairKey, double> summed_pairs(std::span<const FlowRecord> flows, int year,
                                       const CountryUniverse& universe) {
  std::map<PairKey, double> pairs;
  for (const auto& f : flows) {
    if (f.year != year) continue;
    for (const auto* code : {&f.origin, &f.destination}) {
      if (!universe.contains(*code, year)) {
        throw ValidationError("unknown country code '" + code->str() + "' in " + std::to_string(year) +
                              (f.line ? " at line " + std::to_string(f.line) : std::string{}));
      }
    }
    if (f.origin == f.destination) {
      throw ValidationError("self-flow for '" + f.origin.str() + "'" +
                            (f.line ? " at line " + std::to_string(f.line) : std::string{}));
    }
    if (!(f.value >= 0.0) || !std::isfinite(f.value)) {
      throw ValidationError("negative or non-finite flow value" +
                            (f.line ? " at line " + std::to_string(f.line) : std::string{}));
    }
    pairs[{f.origin, f.destination}] += f.value;
  }
  return pairs;
}

std::vector<double> positive_values(const std::map<PairKey, double>& pairs) {
  std::vector<double> out;
  for (const auto& [key, value] : pairs) {
    if (value > 0.0) out.push_back(value);
  }
  return out;
}

}  // namespace

YearlyTradeGraph build_yearly_graph(std::span<const FlowRecord> flows, int year,
                                    const CountryUniverse& universe, const GraphBuildOptions& options) {
  auto nodes = universe.active(year);
  const auto pairs = summed_pairs(flows, year, universe);

  double threshold = 0.0;
  if (options.filter == EdgeFilter::first_quartile) {
    if (options.threshold) {
      threshold = *options.threshold;
    } else {
      const auto values = positive_values(pairs);
      if (values.empty()) throw ComputationError("no flows for year " + std::to_string(year));
      threshold = quartile_threshold(values);
    }
  }

  const std::size_t n = nodes.size();
  std::vector<double> w(n * n, 0.0);
  auto index = [&](const CountryCode& c) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), c) - nodes.begin());
  };
  for (const auto& [key, value] : pairs) {
    if (value > threshold) w[index(key.first) * n + index(key.second)] = value;
  }
  return YearlyTradeGraph(year, std::move(nodes), std::move(w));
}

double pooled_quartile_threshold(std::span<const FlowRecord> flows, std::span<const int> years) {
  std::map<std::tuple<int, CountryCode, CountryCode>, double> pairs;
  for (const auto& f : flows) {
    if (std::find(years.begin(), years.end(), f.year) == years.end()) continue;
    pairs[{f.year, f.origin, f.destination}] += f.value;
  }
  std::vector<double> values;
  for (const auto& [key, value] : pairs) {
    if (value > 0.0) values.push_back(value);
  }
  return quartile_threshold(values);
}

std::vector<YearlyTradeGraph> build_graph_series(std::span<const FlowRecord> flows, int first_year,
                                                 int last_year, const CountryUniverse& universe,
                                                 EdgeFilter filter, QuartileScope scope) {
  if (last_year < first_year) throw ValidationError("empty year range");
  GraphBuildOptions options;
  options.filter = filter;
  if (filter == EdgeFilter::first_quartile && scope == QuartileScope::pooled) {
    std::vector<int> years;
    for (int y = first_year; y <= last_year; ++y) years.push_back(y);
    options.threshold = pooled_quartile_threshold(flows, years);
  }
  std::vector<YearlyTradeGraph> graphs;
  for (int y = first_year; y <= last_year; ++y) {
    graphs.push_back(build_yearly_graph(flows, y, universe, options));
  }
  return graphs;
}

NetworkStats network_stats(const YearlyTradeGraph& graph) {
  const std::size_t n = graph.size();
  if (n < 2) throw ComputationError("degenerate graph");
  NetworkStats s;
  s.year = graph.year();
  s.node_count = n;
  s.edge_count = graph.edge_count();
  s.density = static_cast<double>(s.edge_count) / (static_cast<double>(n) * static_cast<double>(n - 1));
  std::size_t degree_total = 0;
  for (const auto& nbrs : graph.undirected_neighbors()) degree_total += nbrs.size();
  s.average_degree = static_cast<double>(degree_total) / static_cast<double>(n);
  const auto cc = clustering_coefficient(graph);
  double total = 0.0;
  for (double c : cc) total += c;
  s.average_clustering = total / static_cast<double>(n);
  return s;
}

std::vector<NetworkStats> evolution_series(std::span<const YearlyTradeGraph> graphs) {
  std::vector<NetworkStats> out;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (i > 0 && graphs[i].year() <= graphs[i - 1].year()) {
      throw ValidationError(graphs[i].year() == graphs[i - 1].year()
                                ? "duplicate year " + std::to_string(graphs[i].year())
                                : "graphs must be sorted by year");
    }
    out.push_back(network_stats(graphs[i]));
  }
  return out;
}

std::string evolution_csv(std::span<const NetworkStats> series) {
  csv::Writer w({"year", "nodes", "edges", "average_degree", "density", "average_clustering"});
  for (const auto& s : series) {
    w.add({std::to_string(s.year), std::to_string(s.node_count), std::to_string(s.edge_count),
           csv::format(s.average_degree), csv::format(s.density), csv::format(s.average_clustering)});
  }
  return w.str();
}

}  // namespace tradenet
