#pragma once

#include <Eigen/Core>

namespace tradenet::stats {

/// Upper tail P(X > x) for X ~ chi2(df). Returns 1 for x <= 0.
double chi2_sf(double x, double df);
/// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);
/// Two-sided p-value of a Student-t statistic.
double t_two_sided_p(double t, double df);
/// Upper tail of F(d1, d2).
double f_sf(double f, double d1, double d2);

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues below
/// tol * max|eigenvalue| count as zero; `rank` receives the retained count.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m, int* rank = nullptr, double tol = 1e-12);

}  // namespace tradenet::stats
