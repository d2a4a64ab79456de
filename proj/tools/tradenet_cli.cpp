#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/pipeline.hpp"
#include "tradenet/synthetic.hpp"
#include "tradenet/system_gmm.hpp"

using namespace tradenet;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;

struct ConfigFlags {
  std::string config;
  std::string out_dir;
  std::string filter;
  std::optional<std::uint64_t> seed;
  std::string quartile;
  std::string pagerank;
  std::optional<double> damping;
  std::optional<double> epsilon;
  std::vector<std::string> set;

  void attach(CLI::App* app, bool with_output) {
    app->add_option("-c,--config", config, "pipeline config file")->required()->check(CLI::ExistingFile);
    if (with_output) app->add_option("--out-dir", out_dir, "output directory (overrides output.dir)");
    app->add_option("--filter", filter, "quartile edge filter")->check(CLI::IsMember({"on", "off"}));
    app->add_option("--seed", seed, "seed recorded in the manifest (overrides output.seed)");
    app->add_option("--quartile", quartile, "quartile scope")->check(CLI::IsMember({"per_year", "pooled"}));
    app->add_option("--pagerank", pagerank, "PageRank transition weights")
        ->check(CLI::IsMember({"weighted", "binary"}));
    app->add_option("--damping", damping, "PageRank damping factor");
    app->add_option("--epsilon", epsilon, "shift for log(x + epsilon)");
    app->add_option("--set", set, "section.key=value override (repeatable)");
  }

  PipelineConfig load() const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : set) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects section.key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!filter.empty()) overrides.emplace_back("network.filter", filter);
    if (!quartile.empty()) overrides.emplace_back("network.quartile", quartile);
    if (!pagerank.empty()) overrides.emplace_back("network.pagerank", pagerank);
    if (damping) overrides.emplace_back("network.damping", csv::format(*damping));
    if (epsilon) overrides.emplace_back("indicators.epsilon", csv::format(*epsilon));
    if (seed) overrides.emplace_back("output.seed", std::to_string(*seed));
    auto c = load_config(config, overrides);
    if (!out_dir.empty()) c.out_dir = std::filesystem::absolute(out_dir).lexically_normal();
    return c;
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

int cmd_validate(const ConfigFlags& flags) {
  const auto config = flags.load();
  config.validate();
  const auto inputs = ingest(config);
  std::cout << "config ok: " << inputs.flows.size() << " flow records, " << inputs.macro.size() << " macro rows, "
            << inputs.memberships.countries().size() << " membership rows, " << inputs.tariffs.size()
            << " tariff rows\n";
  return 0;
}

int cmd_run(const ConfigFlags& flags) {
  const auto summary = run_pipeline(flags.load());
  std::cout << "wrote " << summary.files.size() << " files to " << summary.out_dir.string() << "\n"
            << "panel: " << summary.panel_countries << " countries, " << summary.panel_rows << " rows\n";
  return 0;
}

int cmd_centrality(const ConfigFlags& flags, int year, const std::string& output) {
  const auto config = flags.load();
  config.validate();
  if (year < config.first_year || year > config.last_year) {
    throw ValidationError("year " + std::to_string(year) + " outside the configured range");
  }
  const auto inputs = ingest(config);
  const auto graphs = build_graphs(config, inputs);
  for (const auto& g : graphs) {
    if (g.year() != year) continue;
    const auto text = centrality_csv(compute_all(g, config.centrality));
    if (output.empty()) {
      std::cout << text;
    } else {
      csv::write_text(output, text);
      std::cout << "wrote " << output << "\n";
    }
  }
  return 0;
}

struct EstimateFlags {
  std::string panel;
  std::string dependent;
  std::string estimator = "system_gmm";
  std::string regressors;
  std::string endogenous;
  std::string year_dummies = "on";
  std::string covariance = "cluster";
  std::string steps = "two";
  std::string collapse = "on";
  int lag_min = 2;
  int lag_max = 4;
  std::string output;
};

int cmd_estimate(const EstimateFlags& f) {
  const auto panel = PanelDataset::from_csv(f.panel);
  RegressionSpec s;
  s.dependent = f.dependent;
  s.regressors = split(f.regressors);
  s.endogenous = split(f.endogenous);
  s.year_dummies = f.year_dummies == "on";
  s.covariance = f.covariance == "conventional" ? CovarianceType::conventional
                 : f.covariance == "hc1"        ? CovarianceType::hc1
                                                : CovarianceType::cluster;
  s.gmm.steps = f.steps == "one" ? GmmSteps::one : GmmSteps::two;
  s.gmm.collapse = f.collapse == "on";
  s.gmm.lag_min = f.lag_min;
  s.gmm.lag_max = f.lag_max;
  const bool dynamic = f.estimator == "system_gmm" || f.estimator == "difference_gmm";
  s.include_lagged_dependent = dynamic;
  if (!dynamic) s.endogenous.clear();
  if (f.estimator == "difference_gmm") s.gmm.equations = GmmEquations::difference;

  RegressionResult r;
  if (f.estimator == "pooled_ols") {
    r = pooled_ols(panel, s);
  } else if (f.estimator == "fixed_effects") {
    r = fixed_effects_within(panel, s);
  } else if (f.estimator == "random_effects") {
    r = random_effects_gls(panel, s);
  } else {
    r = system_gmm(panel, s);
  }
  if (f.output.empty()) {
    std::cout << r.to_csv();
  } else {
    csv::write_text(f.output, r.to_csv());
    std::cout << "wrote " << f.output << "\n";
  }
  return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  const auto data = generate_synthetic(spec);
  write_synthetic(data, spec, out_dir);
  std::cout << "wrote synthetic sample to " << out_dir << ": " << data.universe.size() << " countries, "
            << data.flows.size() << " flow records, hub " << data.hub.str() << ", " << data.incomplete.size()
            << " countries with gaps\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trade network centrality and panel estimation pipeline"};
  app.set_version_flag("--version", std::string("tradenet ") + kVersion);
  app.require_subcommand(1);

  ConfigFlags validate_flags, run_flags, centrality_flags;
  auto* validate = app.add_subcommand("validate", "check a config and its input files");
  validate_flags.attach(validate, false);

  auto* run = app.add_subcommand("run", "run every stage and write the output tree");
  run_flags.attach(run, true);

  SyntheticSpec spec;
  std::string synth_dir = "synthetic";
  auto* synth = app.add_subcommand("synth", "generate a synthetic input dataset with a config");
  synth->add_option("--out-dir", synth_dir, "directory for the generated files");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--countries", spec.n_countries, "number of countries (at least 4)");
  synth->add_option("--first-year", spec.first_year, "first year");
  synth->add_option("--last-year", spec.last_year, "last year");
  auto* incomplete =
      synth->add_option("--incomplete", spec.incomplete_countries, "countries given a macro gap (default: about a quarter)");
  synth->add_option("--noise", spec.flow_noise_sd, "log-normal flow noise sd");

  int year = 0;
  std::string centrality_out;
  auto* centrality = app.add_subcommand("centrality", "centrality table for a single year");
  centrality_flags.attach(centrality, false);
  centrality->add_option("--year", year, "year")->required();
  centrality->add_option("-o,--output", centrality_out, "output file (default: stdout)");

  EstimateFlags ef;
  auto* estimate = app.add_subcommand("estimate", "estimate one model on an existing panel.csv");
  estimate->add_option("--panel", ef.panel, "panel CSV (as written by run)")->required()->check(CLI::ExistingFile);
  estimate->add_option("--dependent", ef.dependent, "dependent variable")->required();
  estimate->add_option("--estimator", ef.estimator, "estimator")
      ->check(CLI::IsMember({"pooled_ols", "fixed_effects", "random_effects", "system_gmm", "difference_gmm"}));
  estimate->add_option("--regressors", ef.regressors, "comma-separated regressors");
  estimate->add_option("--endogenous", ef.endogenous, "comma-separated endogenous regressors (GMM)");
  estimate->add_option("--year-dummies", ef.year_dummies, "year dummies")->check(CLI::IsMember({"on", "off"}));
  estimate->add_option("--covariance", ef.covariance, "static covariance")
      ->check(CLI::IsMember({"conventional", "hc1", "cluster"}));
  estimate->add_option("--steps", ef.steps, "GMM steps")->check(CLI::IsMember({"one", "two"}));
  estimate->add_option("--collapse", ef.collapse, "collapse GMM instruments")->check(CLI::IsMember({"on", "off"}));
  estimate->add_option("--lag-min", ef.lag_min, "first GMM instrument lag");
  estimate->add_option("--lag-max", ef.lag_max, "last GMM instrument lag");
  estimate->add_option("-o,--output", ef.output, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(validate_flags);
    if (*run) return cmd_run(run_flags);
    if (*synth) {
      if (incomplete->count() == 0) spec.incomplete_countries = spec.n_countries * 14 / 54;
      return cmd_synth(spec, synth_dir);
    }
    if (*centrality) return cmd_centrality(centrality_flags, year, centrality_out);
    if (*estimate) return cmd_estimate(ef);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kExitComputation;
  }
  return 0;
}
