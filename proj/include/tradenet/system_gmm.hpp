#pragma once

#include <Eigen/Core>
#include <vector>

#include "tradenet/econometrics.hpp"

namespace tradenet {

/// Per-country stacked system: difference rows first, then level rows.
struct GmmUnit {
  Eigen::MatrixXd Z;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<int> diff_periods;   // panel period index of each difference row
  std::vector<int> level_periods;  // panel period index of each level row
  Eigen::VectorXd residuals;       // final-step residuals
  Eigen::VectorXd residuals_one_step;
};

/// Everything needed to recompute GMM diagnostics after estimation.
struct GmmFit {
  std::vector<GmmUnit> units;
  std::vector<std::string> instrument_names;
  Eigen::MatrixXd weight;      // weight matrix of the final step
  Eigen::MatrixXd weight_two;  // inverse of sum Z'u1 u1'Z
  Eigen::MatrixXd bread;       // (X'Z W Z'X)^-1 of the final step
  Eigen::MatrixXd covariance;  // reported covariance
  Eigen::VectorXd beta;
  GmmSteps steps = GmmSteps::two;
};

/// Blundell-Bond system GMM (or the difference equation alone when
/// spec.gmm.equations == difference). Requires include_lagged_dependent.
RegressionResult system_gmm(const PanelDataset& panel, const RegressionSpec& spec);

/// Two-step Hansen J; 0 with p = 1 when exactly identified.
TestResult hansen_j(const RegressionResult& gmm);

/// Arellano-Bond z test for order-m autocorrelation in differenced residuals.
TestResult arellano_bond_ar(const RegressionResult& gmm, int order);

}  // namespace tradenet
