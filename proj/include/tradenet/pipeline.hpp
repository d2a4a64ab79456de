#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tradenet/centrality.hpp"
#include "tradenet/country.hpp"
#include "tradenet/econometrics.hpp"
#include "tradenet/macro_indicators.hpp"
#include "tradenet/panel.hpp"
#include "tradenet/trade_graph.hpp"

namespace tradenet {

inline constexpr const char* kVersion = "1.0.0";

/// Dependent measures estimated by default, in report order.
const std::vector<std::string>& default_measures();
/// Endogenous regressors used for `measure` unless the config overrides them.
std::vector<std::string> default_endogenous(const std::string& measure);

/// Parsed `key = value` config with `[section]` headers. Relative paths are
/// resolved against the directory of the config file.
struct PipelineConfig {
  std::filesystem::path flows, macro, memberships, tariffs;
  std::filesystem::path universe;  // empty: the built-in 54-country universe
  bool skip_malformed_flows = false;

  int first_year = 2000;
  int last_year = 2019;
  int panel_first_year = 2002;

  EdgeFilter filter = EdgeFilter::first_quartile;
  QuartileScope quartile = QuartileScope::per_year;
  CentralityOptions centrality;

  CovariateOptions covariates;
  double epsilon = 1e-6;
  BalanceMode balance = BalanceMode::strict;

  std::vector<std::string> measures;
  std::vector<std::string> estimators;
  /// Dynamic specification per dependent measure. Static models reuse its
  /// regressors without the lagged dependent variable.
  std::map<std::string, RegressionSpec> models;
  bool static_year_dummies = false;
  CovarianceType static_covariance = CovarianceType::cluster;
  std::vector<std::string> endogeneity_candidates;
  /// Adds export-intensity x regressor instruments for the endogenous set.
  bool external_instrument = false;

  std::size_t top_k = 10;
  std::vector<std::string> ranking_measures;
  std::vector<std::string> series_countries;  // empty: every country
  std::vector<std::string> series_measures;

  std::filesystem::path out_dir;
  std::uint64_t seed = 42;

  /// Canonical `key = value` listing of every setting except the output
  /// directory; its hash goes into the manifest.
  std::string canonical;

  /// Structural checks plus existence of every referenced input file.
  void validate() const;
};

/// `overrides` are (section.key, value) pairs applied on top of the file.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Stages, in pipeline order. Each consumes only what earlier stages return.

struct Inputs {
  CountryUniverse universe;
  std::vector<FlowRecord> flows;
  std::vector<MacroRecord> macro;
  MembershipMatrix memberships;
  std::map<std::pair<CountryCode, int>, double> tariffs;
};
Inputs ingest(const PipelineConfig& config);

std::vector<YearlyTradeGraph> build_graphs(const PipelineConfig& config, const Inputs& inputs);

std::vector<CentralityRecord> compute_centralities(const PipelineConfig& config,
                                                   const std::vector<YearlyTradeGraph>& graphs);

std::vector<CovariateRecord> compute_indices(const PipelineConfig& config, const Inputs& inputs);

struct PanelBundle {
  PanelDataset levels;  // untransformed, with lag columns
  PanelDataset model;   // log policy applied; what the estimators see
};
PanelBundle build_panel(const PipelineConfig& config, const std::vector<CentralityRecord>& centrality,
                        const std::vector<CovariateRecord>& covariates);

struct NamedTest {
  std::string measure;
  std::string name;  // test name, or the suspect variable for endogeneity tests
  TestResult result;
};

struct Estimates {
  std::vector<RegressionResult> results;  // measure-major, estimator order as configured
  std::vector<NamedTest> static_tests;
  std::vector<NamedTest> endogeneity;
};
Estimates run_estimators(const PipelineConfig& config, const Inputs& inputs, const PanelBundle& panel);

/// One output file: path relative to the output directory, and its bytes.
struct Artifact {
  std::string path;
  std::string content;
};

/// Long format `measure,country,year,value` restricted to `countries`
/// (every country when empty). Unknown codes are skipped with a warning.
std::string figure_series_csv(const std::vector<CentralityRecord>& records, const std::vector<std::string>& measures,
                              const std::vector<std::string>& countries);

std::vector<Artifact> render_reports(const PipelineConfig& config, const std::vector<YearlyTradeGraph>& graphs,
                                     const std::vector<CentralityRecord>& centrality, const PanelBundle& panel,
                                     const Estimates& estimates);

std::string sha256_hex(std::string_view bytes);

/// Manifest listing the version, config hash, input hashes and every artifact.
Artifact manifest(const PipelineConfig& config, const std::vector<Artifact>& artifacts);

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<std::string> files;
  std::size_t panel_rows = 0;
  std::size_t panel_countries = 0;
};

/// Runs every stage and writes the artifacts. Output goes to a staging
/// directory that replaces `out_dir` only on success. A failing stage is
/// reported as "<stage>: <cause>" with the original error category.
RunSummary run_pipeline(const PipelineConfig& config);

}  // namespace tradenet
