#include "tradenet/pipeline.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/system_gmm.hpp"

namespace tradenet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Centrality records name the normalised betweenness `betweenness_norm`;
/// the panel calls it `betweenness` and keeps the count as `betweenness_raw`.
std::string record_measure(const std::string& panel_name) {
  if (panel_name == "betweenness") return "betweenness_norm";
  if (panel_name == "betweenness_raw") return "betweenness";
  return panel_name;
}

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const ComputationError& e) {
    throw ComputationError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw ComputationError(std::string(name) + ": " + e.what());
  }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool time_invariant(const PanelDataset& panel, const std::string& column) {
  const auto& v = panel.column(column);
  for (std::size_t i = 0; i < panel.country_count(); ++i) {
    double first = kNaN;
    for (int t = 0; t < panel.years(); ++t) {
      const double x = v[panel.row(i, t)];
      if (!std::isfinite(x)) continue;
      if (!std::isfinite(first)) {
        first = x;
      } else if (x != first) {
        return false;
      }
    }
  }
  return true;
}

bool constant_column(const PanelDataset& panel, const std::string& column) {
  double first = kNaN;
  for (double x : panel.column(column)) {
    if (!std::isfinite(x)) continue;
    if (!std::isfinite(first)) {
      first = x;
    } else if (x != first) {
      return false;
    }
  }
  return true;
}

NamedTest guarded_test(const std::string& measure, const std::string& name, const std::function<TestResult()>& f) {
  try {
    return {measure, name, f()};
  } catch (const Error& e) {
    warn(measure + ": " + name + " not available: " + e.what());
    TestResult r;
    r.statistic = r.p_value = kNaN;
    r.flagged = true;
    r.note = e.what();
    return {measure, name, r};
  }
}

std::string tests_csv(const std::vector<NamedTest>& tests, const char* name_column, bool with_decision) {
  std::vector<std::string> header = {"measure", name_column, "statistic", "df", "p_value", "flagged", "note"};
  if (with_decision) header.insert(header.begin() + 5, "endogenous");
  csv::Writer w(header);
  for (const auto& t : tests) {
    std::vector<std::string> row = {t.measure, t.name, csv::format(t.result.statistic),
                                    csv::format(static_cast<double>(t.result.df)), csv::format(t.result.p_value),
                                    t.result.flagged ? "1" : "0", t.result.note};
    for (auto& c : row.back()) {
      if (c == ',') c = ';';
    }
    if (with_decision) row.insert(row.begin() + 5, t.result.p_value < 0.05 ? "1" : "0");
    w.add(std::move(row));
  }
  return w.str();
}

/// Wide table for one estimator: one estimate and standard-error column per
/// measure, followed by the headline diagnostics.
std::string estimator_table(const std::vector<const RegressionResult*>& results) {
  std::vector<std::string> header = {"term"};
  std::vector<std::string> terms;
  for (const auto* r : results) {
    header.push_back(r->dependent + "_estimate");
    header.push_back(r->dependent + "_se");
    for (const auto& n : r->names)
      if (!contains(terms, n)) terms.push_back(n);
  }
  csv::Writer w(header);
  for (const auto& term : terms) {
    std::vector<std::string> row = {term};
    for (const auto* r : results) {
      row.push_back(r->has(term) ? csv::format(r->coef(term)) : "");
      row.push_back(r->has(term) ? csv::format(r->se(term)) : "");
    }
    w.add(std::move(row));
  }
  auto diag_row = [&](const std::string& name, auto getter) {
    std::vector<std::string> row = {name};
    for (const auto* r : results) {
      row.push_back(getter(*r));
      row.push_back("");
    }
    w.add(std::move(row));
  };
  diag_row("obs", [](const RegressionResult& r) { return std::to_string(r.diagnostics.n_obs); });
  diag_row("groups", [](const RegressionResult& r) { return std::to_string(r.diagnostics.n_groups); });
  diag_row("instruments", [](const RegressionResult& r) { return std::to_string(r.diagnostics.instrument_count); });
  diag_row("hansen_p", [](const RegressionResult& r) { return csv::format(r.diagnostics.hansen_p); });
  diag_row("ar1_p", [](const RegressionResult& r) { return csv::format(r.diagnostics.ar1_p); });
  diag_row("ar2_p", [](const RegressionResult& r) { return csv::format(r.diagnostics.ar2_p); });
  diag_row("wald_p", [](const RegressionResult& r) { return csv::format(r.diagnostics.wald_p); });
  diag_row("r2_adjusted", [](const RegressionResult& r) { return csv::format(r.diagnostics.r2_adjusted); });
  return w.str();
}

}  // namespace

Inputs ingest(const PipelineConfig& config) {
  Inputs in;
  in.universe = config.universe.empty() ? african_universe() : CountryUniverse::from_csv(config.universe.string());
  auto flows = read_flows_csv(config.flows, {config.skip_malformed_flows});
  if (!flows.skipped.empty()) {
    warn(std::to_string(flows.skipped.size()) + " malformed flow rows skipped; first: " + flows.skipped.front());
  }
  for (const auto& f : flows.records) {
    if (f.year < config.first_year || f.year > config.last_year) {
      throw ValidationError(config.flows.filename().string() + ": line " + std::to_string(f.line) + ": year " +
                            std::to_string(f.year) + " outside the configured range");
    }
  }
  in.flows = std::move(flows.records);
  in.macro = read_macro_csv(config.macro);
  in.memberships = MembershipMatrix::from_csv(config.memberships);
  in.tariffs = read_tariffs_csv(config.tariffs);
  return in;
}

std::vector<YearlyTradeGraph> build_graphs(const PipelineConfig& config, const Inputs& inputs) {
  return build_graph_series(inputs.flows, config.first_year, config.last_year, inputs.universe, config.filter,
                            config.quartile);
}

std::vector<CentralityRecord> compute_centralities(const PipelineConfig& config,
                                                   const std::vector<YearlyTradeGraph>& graphs) {
  std::vector<CentralityRecord> out;
  for (const auto& g : graphs) {
    auto recs = compute_all(g, config.centrality);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

std::vector<CovariateRecord> compute_indices(const PipelineConfig& config, const Inputs& inputs) {
  return build_covariates(inputs.macro, inputs.memberships, inputs.tariffs, config.covariates);
}

PanelBundle build_panel(const PipelineConfig& config, const std::vector<CentralityRecord>& centrality,
                        const std::vector<CovariateRecord>& covariates) {
  auto panel = assemble(centrality, covariates, config.panel_first_year, config.last_year, config.balance);
  if (config.balance == BalanceMode::strict) {
    std::set<CountryCode> seen;
    for (const auto& r : centrality) seen.insert(r.country);
    const auto dropped = seen.size() - panel.country_count();
    if (dropped > 0) {
      warn(std::to_string(dropped) + " countries dropped by the balancing rule; " +
           std::to_string(panel.country_count()) + " retained");
    }
  }

  std::map<std::pair<CountryCode, int>, const CentralityRecord*> cen;
  for (const auto& r : centrality) cen[{r.country, r.year}] = &r;
  std::map<std::pair<CountryCode, int>, const CovariateRecord*> cov;
  for (const auto& r : covariates) cov[{r.country, r.year}] = &r;
  const PresampleLookup presample = [&](const CountryCode& c, int year, const std::string& var) {
    if (contains(covariate_names(), var)) {
      const auto it = cov.find({c, year});
      return it == cov.end() ? kNaN : it->second->value(var);
    }
    const auto it = cen.find({c, year});
    return it == cen.end() ? kNaN : it->second->measure(record_measure(var));
  };

  std::vector<std::string> lagged;
  auto add = [&](const std::string& v) {
    if (!contains(lagged, v)) lagged.push_back(v);
  };
  for (const auto& m : config.measures) add(m);
  for (const auto& [m, spec] : config.models)
    for (const auto& r : spec.regressors) add(r);
  for (const auto& v : config.endogeneity_candidates) add(v);
  const int max_lag = std::min(std::max(1, config.panel_first_year - config.first_year), panel.years() - 1);

  PanelBundle out;
  out.levels = max_lag >= 1 ? add_lags(panel, lagged, max_lag, presample) : panel;
  out.model = apply_log_policy(out.levels, config.epsilon);
  return out;
}

Estimates run_estimators(const PipelineConfig& config, const Inputs& inputs, const PanelBundle& bundle) {
  Estimates out;
  for (const auto& measure : config.measures) {
    RegressionSpec dynamic = config.models.at(measure);
    {
      std::vector<std::string> kept;
      for (const auto& r : dynamic.regressors) {
        if (constant_column(bundle.model, r)) {
          warn(measure + ": '" + r + "' is constant over the panel; left out of every model");
        } else {
          kept.push_back(r);
        }
      }
      std::erase_if(dynamic.endogenous, [&](const std::string& e) { return !contains(kept, e); });
      dynamic.regressors = std::move(kept);
    }
    const PanelDataset* panel = &bundle.model;
    PanelDataset augmented;
    if (config.external_instrument) {
      augmented = bundle.model;
      for (const auto& e : dynamic.endogenous) {
        const std::string name = "xiv_" + e;
        if (!augmented.has_column(name)) augmented.set_column(name, build_external_instrument(inputs.flows, augmented, e));
        dynamic.gmm.extra_instruments.push_back(name);
      }
      panel = &augmented;
    }

    RegressionSpec pooled = dynamic;
    pooled.include_lagged_dependent = false;
    pooled.endogenous.clear();
    pooled.gmm.extra_instruments.clear();
    pooled.year_dummies = config.static_year_dummies;
    pooled.covariance = config.static_covariance;

    RegressionSpec within = pooled;
    within.regressors.clear();
    for (const auto& r : pooled.regressors) {
      if (time_invariant(*panel, r)) {
        warn(measure + ": '" + r + "' has no within-country variation; left out of fixed effects");
      } else {
        within.regressors.push_back(r);
      }
    }

    const RegressionResult* ols = nullptr;
    const RegressionResult* fe = nullptr;
    const RegressionResult* re = nullptr;
    std::vector<RegressionResult> results;
    results.reserve(config.estimators.size());
    for (const auto& e : config.estimators) {
      if (e == "pooled_ols") {
        results.push_back(pooled_ols(*panel, pooled));
      } else if (e == "fixed_effects") {
        results.push_back(fixed_effects_within(*panel, within));
      } else if (e == "random_effects") {
        results.push_back(random_effects_gls(*panel, pooled));
      } else if (e == "system_gmm") {
        results.push_back(system_gmm(*panel, dynamic));
      } else if (e == "difference_gmm") {
        auto d = dynamic;
        d.gmm.equations = GmmEquations::difference;
        results.push_back(system_gmm(*panel, d));
      }
    }
    for (const auto& r : results) {
      if (r.estimator == "pooled_ols") ols = &r;
      if (r.estimator == "fixed_effects") fe = &r;
      if (r.estimator == "random_effects") re = &r;
    }
    if (ols) {
      out.static_tests.push_back(guarded_test(measure, "breusch_pagan_lm", [&] { return breusch_pagan_lm(*ols); }));
      out.static_tests.push_back(
          guarded_test(measure, "heteroskedasticity", [&] { return heteroskedasticity_test(*ols); }));
      out.static_tests.push_back(
          guarded_test(measure, "breusch_godfrey_1", [&] { return breusch_godfrey(*ols, 1); }));
    }
    if (fe && re) {
      out.static_tests.push_back(guarded_test(measure, "hausman", [&] { return hausman_test(*fe, *re); }));
    }
    const int instrument_lag = panel->has_column("L2." + measure) ? 2 : 1;
    for (const auto& v : config.endogeneity_candidates) {
      if (!contains(pooled.regressors, v)) continue;
      const std::string inst = "L" + std::to_string(instrument_lag) + "." + v;
      out.endogeneity.push_back(
          guarded_test(measure, v, [&] { return durbin_wu_hausman(*panel, pooled, v, {inst}); }));
    }
    for (auto& r : results) out.results.push_back(std::move(r));
  }
  return out;
}

std::string figure_series_csv(const std::vector<CentralityRecord>& records, const std::vector<std::string>& measures,
                              const std::vector<std::string>& countries) {
  std::set<CountryCode> present;
  for (const auto& r : records) present.insert(r.country);
  std::vector<CountryCode> selected;
  if (countries.empty()) {
    selected.assign(present.begin(), present.end());
  } else {
    for (const auto& c : countries) {
      if (!CountryCode::is_valid(c) || !present.count(CountryCode(c))) {
        warn("series: unknown country '" + c + "' skipped");
        continue;
      }
      if (std::find(selected.begin(), selected.end(), CountryCode(c)) == selected.end()) {
        selected.emplace_back(c);
      }
    }
  }
  std::map<std::pair<CountryCode, int>, const CentralityRecord*> index;
  for (const auto& r : records) index[{r.country, r.year}] = &r;
  csv::Writer w({"measure", "country", "year", "value"});
  for (const auto& m : measures) {
    const std::string field = record_measure(m);
    for (const auto& c : selected) {
      for (auto it = index.lower_bound({c, std::numeric_limits<int>::min()}); it != index.end() && it->first.first == c;
           ++it) {
        w.add({m, c.str(), std::to_string(it->first.second), csv::format(it->second->measure(field))});
      }
    }
  }
  return w.str();
}

std::vector<Artifact> render_reports(const PipelineConfig& config, const std::vector<YearlyTradeGraph>& graphs,
                                     const std::vector<CentralityRecord>& centrality, const PanelBundle& panel,
                                     const Estimates& estimates) {
  std::vector<Artifact> out;
  out.push_back({"evolution.csv", evolution_csv(evolution_series(graphs))});
  for (const auto& g : graphs) {
    std::vector<CentralityRecord> year;
    for (const auto& r : centrality)
      if (r.year == g.year()) year.push_back(r);
    out.push_back({"centrality/centrality_" + std::to_string(g.year()) + ".csv", centrality_csv(year)});
  }
  for (const auto& m : config.ranking_measures) {
    out.push_back({"rankings_" + m + ".csv", rankings_csv(centrality, record_measure(m), config.top_k)});
  }
  out.push_back({"corr.csv", correlation_matrix(panel.levels, config.measures).to_csv()});
  std::vector<std::string> described = config.measures;
  for (const auto& c : covariate_names())
    if (!contains(described, c)) described.push_back(c);
  out.push_back({"descriptives.csv", descriptives_csv(descriptive_stats(panel.levels, described))});
  out.push_back({"panel.csv", panel.model.to_csv()});
  out.push_back({"series.csv", figure_series_csv(centrality, config.series_measures, config.series_countries)});

  for (const auto& r : estimates.results) {
    out.push_back({"results/results_" + r.dependent + "_" + r.estimator + ".csv", r.to_csv()});
  }
  for (const auto& e : config.estimators) {
    std::vector<const RegressionResult*> rs;
    for (const auto& r : estimates.results)
      if (r.estimator == e) rs.push_back(&r);
    if (!rs.empty()) out.push_back({"results/table_" + e + ".csv", estimator_table(rs)});
  }
  out.push_back({"diagnostics/static_tests.csv", tests_csv(estimates.static_tests, "test", false)});
  out.push_back({"diagnostics/endogeneity.csv", tests_csv(estimates.endogeneity, "variable", true)});
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

Artifact manifest(const PipelineConfig& config, const std::vector<Artifact>& artifacts) {
  csv::Writer w({"kind", "name", "sha256", "bytes"});
  w.add({"version", std::string("tradenet ") + kVersion, "", ""});
  w.add({"version",
         "eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
             std::to_string(EIGEN_MINOR_VERSION),
         "", ""});
  w.add({"version",
         "boost " + std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
             std::to_string(BOOST_VERSION % 100),
         "", ""});
  w.add({"config", "effective", sha256_hex(config.canonical), std::to_string(config.canonical.size())});
  w.add({"seed", std::to_string(config.seed), "", ""});
  std::vector<std::pair<std::string, std::filesystem::path>> inputs = {
      {"flows", config.flows}, {"macro", config.macro}, {"memberships", config.memberships}, {"tariffs", config.tariffs}};
  if (!config.universe.empty()) inputs.emplace_back("universe", config.universe);
  for (const auto& [name, path] : inputs) {
    const auto bytes = read_file(path);
    w.add({"input", name + ":" + path.filename().string(), sha256_hex(bytes), std::to_string(bytes.size())});
  }
  for (const auto& a : artifacts) w.add({"output", a.path, sha256_hex(a.content), std::to_string(a.content.size())});
  return {"manifest.csv", w.str()};
}

RunSummary run_pipeline(const PipelineConfig& config) {
  stage("validate", [&] {
    config.validate();
    return 0;
  });
  const auto inputs = stage("ingest", [&] { return ingest(config); });
  const auto graphs = stage("graphs", [&] { return build_graphs(config, inputs); });
  const auto centrality = stage("centralities", [&] { return compute_centralities(config, graphs); });
  const auto covariates = stage("indices", [&] { return compute_indices(config, inputs); });
  const auto panel = stage("panel", [&] { return build_panel(config, centrality, covariates); });
  const auto estimates = stage("estimators", [&] { return run_estimators(config, inputs, panel); });
  auto artifacts = stage("reports", [&] {
    auto a = render_reports(config, graphs, centrality, panel, estimates);
    a.push_back(manifest(config, a));
    return a;
  });

  namespace fs = std::filesystem;
  const fs::path target = config.out_dir;
  if (target.empty()) throw ValidationError("no output directory configured");
  if (fs::exists(target) && !fs::is_empty(target) && !fs::exists(target / "manifest.csv")) {
    throw ValidationError("output directory '" + target.string() +
                          "' exists and does not hold a previous run; refusing to replace it");
  }
  const fs::path parent = target.has_parent_path() ? target.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path staging = parent / ("." + target.filename().string() + ".staging");
  fs::remove_all(staging);
  try {
    for (const auto& a : artifacts) csv::write_text(staging / a.path, a.content);
    fs::remove_all(target);
    fs::rename(staging, target);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }

  RunSummary s;
  s.out_dir = target;
  for (const auto& a : artifacts) s.files.push_back(a.path);
  s.panel_rows = panel.model.rows();
  s.panel_countries = panel.model.country_count();
  return s;
}

}  // namespace tradenet
