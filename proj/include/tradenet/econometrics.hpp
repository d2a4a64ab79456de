#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tradenet/panel.hpp"
#include "tradenet/trade_graph.hpp"

namespace tradenet {

enum class CovarianceType { conventional, hc1, cluster };
enum class GmmSteps { one, two };
enum class GmmEquations { system, difference };

struct GmmOptions {
  int lag_min = 2;
  int lag_max = 4;
  bool collapse = true;
  GmmSteps steps = GmmSteps::two;
  bool windmeijer = true;
  /// Extra IV-style instruments (panel column names), e.g. external ones.
  std::vector<std::string> extra_instruments;

  // Building blocks, not exposed through the config file.
  GmmEquations equations = GmmEquations::system;
  bool difference_gmm_instruments = true;
  bool level_gmm_instruments = true;
};

struct RegressionSpec {
  std::string dependent;
  std::vector<std::string> regressors;
  bool include_lagged_dependent = false;
  std::vector<std::string> endogenous;
  bool year_dummies = false;
  GmmOptions gmm;
  /// Used by the static estimators.
  CovarianceType covariance = CovarianceType::cluster;

  /// Throws ValidationError on an inconsistent spec.
  void validate() const;
  /// Name of the lagged dependent regressor, "L1.<dependent>".
  std::string lagged_dependent() const { return "L1." + dependent; }
};

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 0.0;
};

struct Diagnostics {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  double hansen_j = kNaN;
  double hansen_df = kNaN;
  double hansen_p = kNaN;
  double ar1_z = kNaN;
  double ar1_p = kNaN;
  double ar2_z = kNaN;
  double ar2_p = kNaN;
  double wald = kNaN;
  double wald_df = kNaN;
  double wald_p = kNaN;
  std::size_t instrument_count = 0;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  double r2 = kNaN;
  double r2_adjusted = kNaN;
};

struct GmmFit;

struct RegressionResult {
  std::string estimator;
  std::string dependent;
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  /// Non-robust covariance, kept for the Hausman comparison.
  Eigen::MatrixXd conventional_covariance;
  /// z statistics when true, t statistics with df_resid otherwise.
  bool normal_inference = false;
  double df_resid = 0.0;

  /// Estimation sample as seen by the estimator (transformed for FE/RE).
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  Eigen::VectorXd residuals;
  std::vector<std::size_t> groups;  // panel country index per sample row
  std::vector<int> years;

  std::vector<std::string> endogenous;
  double sigma_u2 = Diagnostics::kNaN;
  double sigma_e2 = Diagnostics::kNaN;
  double theta = Diagnostics::kNaN;
  Diagnostics diagnostics;
  std::shared_ptr<const GmmFit> gmm;

  bool has(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  double coef(const std::string& name) const { return beta(static_cast<Eigen::Index>(index(name))); }
  double se(const std::string& name) const;
  std::vector<Coefficient> coefficients() const;
  /// Coefficient rows followed by a diagnostics block.
  std::string to_csv() const;
};

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  /// Hausman: non-positive-definite variance difference. DWH: weak first stage.
  bool flagged = false;
  std::string note;
};

RegressionResult pooled_ols(const PanelDataset& panel, const RegressionSpec& spec);
RegressionResult fixed_effects_within(const PanelDataset& panel, const RegressionSpec& spec);
RegressionResult random_effects_gls(const PanelDataset& panel, const RegressionSpec& spec);

TestResult hausman_test(const RegressionResult& fe, const RegressionResult& re);
TestResult breusch_pagan_lm(const RegressionResult& pooled);
/// Koenker's studentised Breusch-Pagan: n R^2 of e^2 on the regressors.
TestResult heteroskedasticity_test(const RegressionResult& result);
TestResult breusch_godfrey(const RegressionResult& result, int order);
TestResult durbin_wu_hausman(const PanelDataset& panel, const RegressionSpec& spec, const std::string& suspect,
                             const std::vector<std::string>& instruments);
/// Joint test that every slope other than the constant and year dummies is 0.
TestResult wald_joint(const RegressionResult& result);

/// Share of a country's exports that go to its five largest destinations.
double export_intensity_top5(const std::vector<FlowRecord>& flows, const CountryCode& country, int year);
/// intensity_it x endogenous_it for every panel row.
std::vector<double> build_external_instrument(const std::vector<FlowRecord>& flows, const PanelDataset& panel,
                                              const std::string& endogenous);

}  // namespace tradenet
