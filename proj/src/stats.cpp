#include "tradenet/stats.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

namespace tradenet::stats {

double chi2_sf(double x, double df) {
  if (!std::isfinite(x)) return std::isnan(x) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  if (x <= 0.0 || df <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return z;
  if (std::isinf(z)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::fabs(z)));
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return 0.0;
  if (df <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::fabs(t)));
}

double f_sf(double f, double d1, double d2) {
  if (std::isnan(f)) return f;
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
}

Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m, int* rank, double tol) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = tol * (ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::fabs(ev(i)) > cutoff && ev(i) != 0.0) {
      inv(i) = 1.0 / ev(i);
      ++r;
    }
  }
  if (rank) *rank = r;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace tradenet::stats
