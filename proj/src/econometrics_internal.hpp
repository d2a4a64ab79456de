#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tradenet/econometrics.hpp"

namespace tradenet::detail {

struct Sample {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> groups;
  std::vector<int> years;
};

/// Regressor matrix for a static model: [L1.dep] regressors [year dummies]
/// [const]. Rows with any missing cell (including `extra_required`) drop out.
Sample build_sample(const PanelDataset& panel, const RegressionSpec& spec, bool constant,
                    const std::vector<std::string>& extra_required = {});

/// Candidate dummy years that add rank to `base` plus a constant, in order.
/// Years whose dummy is spanned by the other columns (for example a crisis
/// indicator covering those years) are dropped with a warning.
std::vector<int> identifiable_dummy_years(const Eigen::MatrixXd& base, const std::vector<int>& row_years,
                                          const std::vector<int>& candidates);

/// Panel column, or the within-country lag computed on the fly.
std::vector<double> lagged_column(const PanelDataset& panel, const std::string& variable, int lag);

struct LeastSquares {
  Eigen::VectorXd beta;
  Eigen::MatrixXd xtx_inverse;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
};

/// QR least squares on column-equilibrated X. A rank-deficient design throws
/// ComputationError naming the columns that add no rank.
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names);

/// B M B with M = sum over clusters of (X_g' e_g)(X_g' e_g)'.
Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, const Eigen::MatrixXd& bread,
                                 const std::vector<std::size_t>& groups);

std::size_t count_groups(const std::vector<std::size_t>& groups);

/// Fills n_obs, n_groups and the Wald block.
void finish_diagnostics(RegressionResult& result);

}  // namespace tradenet::detail
