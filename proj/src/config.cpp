#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/pipeline.hpp"

namespace tradenet {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Typed access to one section; remembers which keys were read so that
/// unknown keys can be reported.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return trim(tree_->find(key)->second.data());
  }

  std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) {
    return has(key) ? split_list(text(key, "")) : (used_.insert(key), fallback);
  }

  long long integer(const std::string& key, long long fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(where(key) + ": expected an integer, got '" + s + "'");
  }

  double real(const std::string& key, double fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    return csv::parse_double(s, 0, where(key));
  }

  bool flag(const std::string& key, bool fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
    if (s == "off" || s == "false" || s == "no" || s == "0") return false;
    throw ValidationError(where(key) + ": expected on/off, got '" + s + "'");
  }

  template <typename E>
  E choice(const std::string& key, E fallback, const std::vector<std::pair<std::string, E>>& options) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (name == s) return value;
      allowed += (allowed.empty() ? "" : ", ") + name;
    }
    throw ValidationError(where(key) + ": '" + s + "' is not one of " + allowed);
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) throw ValidationError("config: unknown key '" + name_ + "." + key + "'");
    }
  }

  std::string where(const std::string& key) const { return "config " + name_ + "." + key; }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return Section(it == root.not_found() ? nullptr : &it->second, name);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> n = {"pooled_ols", "fixed_effects", "random_effects", "system_gmm",
                                             "difference_gmm"};
  return n;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const std::vector<std::string>& default_measures() {
  static const std::vector<std::string> m = {"s_in", "s_out",      "pagerank", "betweenness",
                                             "rwb",  "clustering", "kcore",    "closeness"};
  return m;
}

std::vector<std::string> default_endogenous(const std::string& measure) {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"s_in", {"rgdpc", "hc"}},
      {"s_out", {"rgdpc", "hc", "tc"}},
      {"pagerank", {"rgdpc"}},
      {"betweenness", {"rgdpc", "hc", "tc"}},
      {"rwb", {"rgdpc", "hc", "iqi"}},
      {"clustering", {"rgdpc", "iqi"}},
      {"kcore", {"rgdpc", "hc", "tc"}},
      {"closeness", {"rgdpc", "hc"}},
  };
  const auto it = table.find(measure);
  return it == table.end() ? std::vector<std::string>{"rgdpc"} : it->second;
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [key, value] : overrides) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw ValidationError("config override '" + key + "' must be section.key");
    }
    // Section names may contain dots (model.<measure>); the key is the last part.
    const auto last = key.rfind('.');
    const std::string name = key.substr(0, last);
    const auto it = root.find(name);
    auto& target = it == root.not_found() ? root.push_back({name, pt::ptree()})->second : it->second;
    target.put(pt::ptree::path_type(key.substr(last + 1), '\x1f'), value);
  }

  PipelineConfig c;
  std::set<std::string> known_sections = {"data",       "years",    "network", "indicators", "estimation",
                                          "endogenous", "reports",  "series",  "output"};

  auto data = section(root, "data");
  c.flows = resolve(base_dir, data.text("flows", ""));
  c.macro = resolve(base_dir, data.text("macro", ""));
  c.memberships = resolve(base_dir, data.text("memberships", ""));
  c.tariffs = resolve(base_dir, data.text("tariffs", ""));
  c.universe = resolve(base_dir, data.text("universe", ""));
  c.skip_malformed_flows = data.flag("skip_malformed", false);
  data.reject_unknown();

  auto years = section(root, "years");
  c.first_year = static_cast<int>(years.integer("first", c.first_year));
  c.last_year = static_cast<int>(years.integer("last", c.last_year));
  c.panel_first_year = static_cast<int>(years.integer("panel_first", std::min(c.first_year + 2, c.last_year)));
  years.reject_unknown();

  auto net = section(root, "network");
  c.filter = net.choice<EdgeFilter>("filter", EdgeFilter::first_quartile,
                                    {{"on", EdgeFilter::first_quartile}, {"off", EdgeFilter::off}});
  c.quartile = net.choice<QuartileScope>("quartile", QuartileScope::per_year,
                                         {{"per_year", QuartileScope::per_year}, {"pooled", QuartileScope::pooled}});
  c.centrality.pagerank.mode = net.choice<PageRankMode>(
      "pagerank", PageRankMode::weighted, {{"weighted", PageRankMode::weighted}, {"binary", PageRankMode::binary}});
  c.centrality.pagerank.damping = net.real("damping", 0.85);
  c.centrality.pagerank.tolerance = net.real("tolerance", c.centrality.pagerank.tolerance);
  c.centrality.pagerank.max_iterations =
      static_cast<int>(net.integer("max_iterations", c.centrality.pagerank.max_iterations));
  c.centrality.clustering = net.choice<ClusteringVariant>(
      "clustering", ClusteringVariant::binary,
      {{"binary", ClusteringVariant::binary}, {"onnela", ClusteringVariant::onnela}});
  net.reject_unknown();

  auto ind = section(root, "indicators");
  c.epsilon = ind.real("epsilon", c.epsilon);
  c.covariates.overlap = ind.choice<OverlapFormula>(
      "overlap", OverlapFormula::excess_over_one,
      {{"excess_over_one", OverlapFormula::excess_over_one}, {"share", OverlapFormula::share}});
  c.covariates.trade_cost = ind.choice<TradeCostFormula>(
      "trade_cost", TradeCostFormula::per_country,
      {{"per_country", TradeCostFormula::per_country}, {"share_of_total", TradeCostFormula::share_of_total}});
  c.balance = ind.choice<BalanceMode>("balance", BalanceMode::strict,
                                      {{"strict", BalanceMode::strict}, {"passthrough", BalanceMode::passthrough}});
  ind.reject_unknown();

  auto est = section(root, "estimation");
  c.measures = est.list("measures", default_measures());
  c.estimators = est.list("estimators", {"pooled_ols", "fixed_effects", "random_effects", "system_gmm"});
  const auto regressors = est.list("regressors", covariate_names());
  const bool year_dummies = est.flag("year_dummies", true);
  c.static_year_dummies = est.flag("static_year_dummies", false);
  const auto cov_choices = std::vector<std::pair<std::string, CovarianceType>>{
      {"conventional", CovarianceType::conventional}, {"hc1", CovarianceType::hc1}, {"cluster", CovarianceType::cluster}};
  c.static_covariance = est.choice<CovarianceType>("static_covariance", CovarianceType::cluster, cov_choices);
  GmmOptions gmm;
  gmm.lag_min = static_cast<int>(est.integer("lag_min", gmm.lag_min));
  gmm.lag_max = static_cast<int>(est.integer("lag_max", gmm.lag_max));
  gmm.collapse = est.flag("collapse", gmm.collapse);
  gmm.steps = est.choice<GmmSteps>("steps", gmm.steps, {{"one", GmmSteps::one}, {"two", GmmSteps::two}});
  gmm.windmeijer = est.flag("windmeijer", gmm.windmeijer);
  c.external_instrument = est.flag("external_instrument", false);
  c.endogeneity_candidates =
      est.list("endogeneity_candidates", {"rgdpc", "hc", "pop", "tc", "infra", "iqi", "rta", "fdi"});
  est.reject_unknown();

  auto endo = section(root, "endogenous");
  for (const auto& m : c.measures) {
    RegressionSpec s;
    s.dependent = m;
    s.regressors = regressors;
    s.include_lagged_dependent = true;
    s.endogenous = endo.list(m, default_endogenous(m));
    s.year_dummies = year_dummies;
    s.gmm = gmm;
    s.covariance = CovarianceType::cluster;

    const std::string name = "model." + m;
    known_sections.insert(name);
    auto model = section(root, name);
    s.regressors = model.list("regressors", s.regressors);
    s.endogenous = model.list("endogenous", s.endogenous);
    s.year_dummies = model.flag("year_dummies", s.year_dummies);
    s.gmm.lag_min = static_cast<int>(model.integer("lag_min", s.gmm.lag_min));
    s.gmm.lag_max = static_cast<int>(model.integer("lag_max", s.gmm.lag_max));
    s.gmm.collapse = model.flag("collapse", s.gmm.collapse);
    s.gmm.steps = model.choice<GmmSteps>("steps", s.gmm.steps, {{"one", GmmSteps::one}, {"two", GmmSteps::two}});
    s.gmm.windmeijer = model.flag("windmeijer", s.gmm.windmeijer);
    model.reject_unknown();
    c.models[m] = s;
  }
  // Keys in [endogenous] must name a configured measure.
  endo.reject_unknown();

  auto rep = section(root, "reports");
  c.top_k = static_cast<std::size_t>(std::max<long long>(0, rep.integer("top_k", 10)));
  c.ranking_measures = rep.list("rankings", default_measures());
  rep.reject_unknown();

  auto ser = section(root, "series");
  c.series_countries = ser.list("countries", {});
  c.series_measures = ser.list("measures", default_measures());
  ser.reject_unknown();

  auto out = section(root, "output");
  c.out_dir = resolve(base_dir, out.text("dir", "out"));
  const auto seed = out.integer("seed", 42);
  if (seed < 0) throw ValidationError("config output.seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  out.reject_unknown();

  for (const auto& [name, child] : root) {
    if (!known_sections.count(name)) throw ValidationError("config: unknown section [" + name + "]");
  }

  // Canonical listing: sections and keys sorted, output directory left out so
  // that the hash does not depend on where results are written.
  std::map<std::string, std::map<std::string, std::string>> sorted;
  for (const auto& [name, child] : root) {
    for (const auto& [key, value] : child) {
      if (name == "output" && key == "dir") continue;
      sorted[name][key] = trim(value.data());
    }
  }
  for (const auto& [name, keys] : sorted) {
    c.canonical += "[" + name + "]\n";
    for (const auto& [key, value] : keys) c.canonical += key + " = " + value + "\n";
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), overrides);
}

void PipelineConfig::validate() const {
  if (last_year < first_year) throw ValidationError("config: empty year range");
  if (panel_first_year < first_year || panel_first_year > last_year) {
    throw ValidationError("config: years.panel_first must lie in [years.first, years.last]");
  }
  const double d = centrality.pagerank.damping;
  if (!(d > 0.0 && d < 1.0)) throw ValidationError("config: network.damping must lie in (0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("config: indicators.epsilon must be positive");

  const std::vector<std::pair<const char*, const std::filesystem::path*>> files = {
      {"data.flows", &flows}, {"data.macro", &macro}, {"data.memberships", &memberships}, {"data.tariffs", &tariffs}};
  for (const auto& [key, p] : files) {
    if (p->empty()) throw ValidationError(std::string("config: ") + key + " is required");
    if (!std::filesystem::is_regular_file(*p)) {
      throw ValidationError(std::string("config: ") + key + " file '" + p->string() + "' does not exist");
    }
  }
  if (!universe.empty() && !std::filesystem::is_regular_file(universe)) {
    throw ValidationError("config: data.universe file '" + universe.string() + "' does not exist");
  }

  const auto& columns = panel_base_columns();
  auto check_measure = [&](const std::string& m, const char* where) {
    if (!contains(columns, m) || contains(covariate_names(), m)) {
      throw ValidationError(std::string("config: ") + where + ": unknown measure '" + m + "'");
    }
  };
  for (const auto& m : measures) check_measure(m, "estimation.measures");
  for (const auto& m : ranking_measures) check_measure(m, "reports.rankings");
  for (const auto& m : series_measures) check_measure(m, "series.measures");
  for (const auto& e : estimators) {
    if (!contains(estimator_names(), e)) throw ValidationError("config: unknown estimator '" + e + "'");
  }
  for (const auto& v : endogeneity_candidates) {
    if (!contains(covariate_names(), v)) throw ValidationError("config: unknown endogeneity candidate '" + v + "'");
  }
  for (const auto& [m, spec] : models) {
    for (const auto& r : spec.regressors) {
      if (!contains(columns, r)) throw ValidationError("config: model " + m + ": unknown regressor '" + r + "'");
      if (r == m) throw ValidationError("config: model " + m + ": the dependent variable is also a regressor");
    }
    if (spec.gmm.lag_min < 1 || spec.gmm.lag_max < spec.gmm.lag_min) {
      throw ValidationError("config: model " + m + ": need 1 <= lag_min <= lag_max");
    }
    spec.validate();
  }
}

}  // namespace tradenet
