#include "tradenet/econometrics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "econometrics_internal.hpp"
#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/stats.hpp"

namespace tradenet {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

double centered_r2(const VectorXd& y, double ssr) {
  const double sst = (y.array() - y.mean()).square().sum();
  return sst > 0.0 ? 1.0 - ssr / sst : kNaN;
}

}  // namespace

namespace detail {

std::vector<double> lagged_column(const PanelDataset& panel, const std::string& variable, int lag) {
  const std::string name = "L" + std::to_string(lag) + "." + variable;
  if (panel.has_column(name)) return panel.column(name);
  const auto& base = panel.column(variable);
  std::vector<double> out(panel.rows(), kNaN);
  for (std::size_t i = 0; i < panel.country_count(); ++i)
    for (int t = lag; t < panel.years(); ++t) out[panel.row(i, t)] = base[panel.row(i, t - lag)];
  return out;
}

std::vector<int> identifiable_dummy_years(const MatrixXd& base, const std::vector<int>& row_years,
                                          const std::vector<int>& candidates) {
  const Index n = base.rows();
  MatrixXd current(n, base.cols() + 1);
  current << base, VectorXd::Ones(n);
  for (Index j = 0; j < current.cols(); ++j) {
    const double norm = current.col(j).norm();
    if (norm > 0.0) current.col(j) /= norm;
  }
  auto rank_of = [](const MatrixXd& m) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    return qr.rank();
  };
  Index rank = rank_of(current);
  std::vector<int> kept;
  std::vector<std::string> dropped;
  for (int yr : candidates) {
    VectorXd d(n);
    for (Index i = 0; i < n; ++i) d(i) = row_years[static_cast<std::size_t>(i)] == yr ? 1.0 : 0.0;
    if (d.norm() == 0.0) {
      dropped.push_back("year_" + std::to_string(yr));
      continue;
    }
    MatrixXd trial(n, current.cols() + 1);
    trial << current, d / d.norm();
    const Index r = rank_of(trial);
    if (r > rank) {
      current = std::move(trial);
      rank = r;
      kept.push_back(yr);
    } else {
      dropped.push_back("year_" + std::to_string(yr));
    }
  }
  if (!dropped.empty()) warn("year dummies omitted because of collinearity: " + join(dropped, ", "));
  return kept;
}

Sample build_sample(const PanelDataset& panel, const RegressionSpec& spec, bool constant,
                    const std::vector<std::string>& extra_required) {
  spec.validate();
  Sample s;
  std::vector<std::vector<double>> cols;
  const auto& y = panel.column(spec.dependent);
  if (spec.include_lagged_dependent) {
    s.names.push_back(spec.lagged_dependent());
    cols.push_back(lagged_column(panel, spec.dependent, 1));
  }
  for (const auto& r : spec.regressors) {
    s.names.push_back(r);
    cols.push_back(panel.column(r));
  }
  std::vector<const std::vector<double>*> extra;
  for (const auto& e : extra_required) extra.push_back(&panel.column(e));

  for (std::size_t r = 0; r < panel.rows(); ++r) {
    bool ok = std::isfinite(y[r]);
    for (const auto& c : cols) ok = ok && std::isfinite(c[r]);
    for (const auto* c : extra) ok = ok && std::isfinite((*c)[r]);
    if (!ok) continue;
    s.rows.push_back(r);
    s.groups.push_back(panel.country_index_at(r));
    s.years.push_back(panel.year_at(r));
  }
  if (s.rows.empty()) throw ValidationError("empty estimation sample for '" + spec.dependent + "'");

  std::vector<int> dummy_years;
  if (spec.year_dummies) {
    std::set<int> years(s.years.begin(), s.years.end());
    MatrixXd base(static_cast<Index>(s.rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < s.rows.size(); ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) base(static_cast<Index>(i), static_cast<Index>(c)) = cols[c][s.rows[i]];
    dummy_years = identifiable_dummy_years(base, s.years, std::vector<int>(std::next(years.begin()), years.end()));
    for (int yr : dummy_years) s.names.push_back("year_" + std::to_string(yr));
  }
  if (constant) s.names.push_back("const");

  const auto n = static_cast<Index>(s.rows.size());
  s.X.resize(n, static_cast<Index>(s.names.size()));
  s.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const std::size_t r = s.rows[static_cast<std::size_t>(i)];
    s.y(i) = y[r];
    Index c = 0;
    for (const auto& col : cols) s.X(i, c++) = col[r];
    for (int yr : dummy_years) s.X(i, c++) = s.years[static_cast<std::size_t>(i)] == yr ? 1.0 : 0.0;
    if (constant) s.X(i, c++) = 1.0;
  }
  return s;
}

LeastSquares least_squares(const MatrixXd& X, const VectorXd& y, const std::vector<std::string>& names) {
  const Index n = X.rows();
  const Index k = X.cols();
  if (n <= k) {
    throw ValidationError(std::to_string(n) + " observations cannot identify " + std::to_string(k) + " parameters");
  }
  VectorXd scale(k);
  for (Index j = 0; j < k; ++j) {
    const double norm = X.col(j).norm();
    scale(j) = norm > 0.0 ? 1.0 / norm : 0.0;
  }
  const MatrixXd Xs = X * scale.asDiagonal();
  constexpr double kRankTol = 1e-10;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Xs);
  qr.setThreshold(kRankTol);
  if (qr.rank() < k) {
    std::vector<std::string> collinear;
    std::vector<Index> kept;
    for (Index j = 0; j < k; ++j) {
      MatrixXd trial(n, static_cast<Index>(kept.size()) + 1);
      for (std::size_t c = 0; c < kept.size(); ++c) trial.col(static_cast<Index>(c)) = Xs.col(kept[c]);
      trial.col(trial.cols() - 1) = Xs.col(j);
      Eigen::ColPivHouseholderQR<MatrixXd> q2(trial);
      q2.setThreshold(kRankTol);
      if (scale(j) > 0.0 && q2.rank() == trial.cols()) {
        kept.push_back(j);
      } else {
        collinear.push_back(static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                        : "#" + std::to_string(j));
      }
    }
    throw ComputationError("rank-deficient design; collinear columns: " + join(collinear, ", "));
  }
  LeastSquares out;
  out.beta = scale.asDiagonal() * qr.solve(y);
  const MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  const MatrixXd inv_perm = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();
  out.xtx_inverse = scale.asDiagonal() * inv_perm * scale.asDiagonal();
  out.residuals = y - X * out.beta;
  out.ssr = out.residuals.squaredNorm();
  return out;
}

MatrixXd cluster_sandwich(const MatrixXd& X, const VectorXd& e, const MatrixXd& bread,
                          const std::vector<std::size_t>& groups) {
  std::map<std::size_t, VectorXd> score;
  for (Index i = 0; i < X.rows(); ++i) {
    auto [it, inserted] = score.try_emplace(groups[static_cast<std::size_t>(i)], VectorXd::Zero(X.cols()));
    it->second += X.row(i).transpose() * e(i);
  }
  MatrixXd meat = MatrixXd::Zero(X.cols(), X.cols());
  for (const auto& [g, u] : score) meat += u * u.transpose();
  return bread * meat * bread;
}

std::size_t count_groups(const std::vector<std::size_t>& groups) {
  return std::set<std::size_t>(groups.begin(), groups.end()).size();
}

void finish_diagnostics(RegressionResult& result) {
  result.diagnostics.n_groups = count_groups(result.groups);
  if (result.diagnostics.n_obs == 0) result.diagnostics.n_obs = static_cast<std::size_t>(result.design.rows());
  bool has_slope = false;
  for (const auto& n : result.names) has_slope = has_slope || (n != "const" && n.rfind("year_", 0) != 0);
  if (has_slope) {
    const auto w = wald_joint(result);
    result.diagnostics.wald = w.statistic;
    result.diagnostics.wald_df = w.df;
    result.diagnostics.wald_p = w.p_value;
  }
}

}  // namespace detail

using detail::least_squares;

void RegressionSpec::validate() const {
  if (dependent.empty()) throw ValidationError("regression spec has no dependent variable");
  std::set<std::string> seen;
  for (const auto& r : regressors) {
    if (r == dependent) throw ValidationError("dependent variable '" + r + "' listed as a regressor");
    if (!seen.insert(r).second) throw ValidationError("duplicate regressor '" + r + "'");
  }
  for (const auto& e : endogenous) {
    if (!seen.count(e)) throw ValidationError("endogenous variable '" + e + "' is not a regressor");
  }
  if (gmm.lag_min < 1 || gmm.lag_max < gmm.lag_min) throw ValidationError("invalid GMM lag range");
  if (!endogenous.empty() && gmm.lag_min < 2) {
    throw ValidationError("endogenous regressors need instrument lags starting at 2 or later");
  }
}

bool RegressionResult::has(const std::string& name) const { return contains(names, name); }

std::size_t RegressionResult::index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("no coefficient named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

double RegressionResult::se(const std::string& name) const {
  const auto i = static_cast<Index>(index(name));
  return std::sqrt(covariance(i, i));
}

std::vector<Coefficient> RegressionResult::coefficients() const {
  std::vector<Coefficient> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Index>(i);
    Coefficient c;
    c.name = names[i];
    c.estimate = beta(k);
    c.std_error = std::sqrt(std::max(covariance(k, k), 0.0));
    c.statistic = c.std_error > 0.0 ? c.estimate / c.std_error : kNaN;
    c.p_value = normal_inference ? stats::normal_two_sided_p(c.statistic) : stats::t_two_sided_p(c.statistic, df_resid);
    out.push_back(c);
  }
  return out;
}

std::string RegressionResult::to_csv() const {
  csv::Writer coef({"term", "estimate", "std_error", "statistic", "p_value"});
  for (const auto& c : coefficients()) {
    coef.add({c.name, csv::format(c.estimate), csv::format(c.std_error), csv::format(c.statistic),
              csv::format(c.p_value)});
  }
  const auto& d = diagnostics;
  csv::Writer diag({"diagnostic", "value"});
  diag.add({"estimator", estimator});
  diag.add({"dependent", dependent});
  diag.add({"hansen_j", csv::format(d.hansen_j)});
  diag.add({"hansen_p", csv::format(d.hansen_p)});
  diag.add({"ar1_p", csv::format(d.ar1_p)});
  diag.add({"ar2_p", csv::format(d.ar2_p)});
  diag.add({"endogenous", endogenous.empty() ? "NA" : join(endogenous, ";")});
  diag.add({"instruments", std::to_string(d.instrument_count)});
  diag.add({"wald", csv::format(d.wald)});
  diag.add({"wald_p", csv::format(d.wald_p)});
  diag.add({"obs", std::to_string(d.n_obs)});
  diag.add({"groups", std::to_string(d.n_groups)});
  diag.add({"r2_adjusted", csv::format(d.r2_adjusted)});
  return coef.str() + "\n" + diag.str();
}

namespace {

MatrixXd robust_covariance(const MatrixXd& X, const VectorXd& e, const MatrixXd& bread,
                           const std::vector<std::size_t>& groups, CovarianceType type, double conventional_df) {
  const auto n = static_cast<double>(X.rows());
  const auto k = static_cast<double>(X.cols());
  switch (type) {
    case CovarianceType::conventional:
      return bread * (e.squaredNorm() / conventional_df);
    case CovarianceType::hc1: {
      const MatrixXd meat = X.transpose() * e.array().square().matrix().asDiagonal() * X;
      return bread * meat * bread * (n / conventional_df);
    }
    case CovarianceType::cluster: {
      const auto g = static_cast<double>(detail::count_groups(groups));
      if (g < 2) throw ComputationError("cluster-robust errors need at least two clusters");
      return detail::cluster_sandwich(X, e, bread, groups) * (g / (g - 1.0)) * ((n - 1.0) / (n - k));
    }
  }
  return bread;
}

RegressionResult base_result(const char* estimator, const RegressionSpec& spec, const detail::Sample& s) {
  RegressionResult r;
  r.estimator = estimator;
  r.dependent = spec.dependent;
  r.names = s.names;
  r.groups = s.groups;
  r.years = s.years;
  r.endogenous = spec.endogenous;
  return r;
}

struct GroupMeans {
  std::map<std::size_t, std::size_t> slot;
  MatrixXd x;
  VectorXd y;
  std::vector<std::size_t> count;
};

GroupMeans group_means(const MatrixXd& X, const VectorXd& y, const std::vector<std::size_t>& groups) {
  GroupMeans g;
  for (auto id : groups) g.slot.try_emplace(id, g.slot.size());
  const auto G = static_cast<Index>(g.slot.size());
  g.x = MatrixXd::Zero(G, X.cols());
  g.y = VectorXd::Zero(G);
  g.count.assign(g.slot.size(), 0);
  for (Index i = 0; i < X.rows(); ++i) {
    const auto s = g.slot[groups[static_cast<std::size_t>(i)]];
    g.x.row(static_cast<Index>(s)) += X.row(i);
    g.y(static_cast<Index>(s)) += y(i);
    ++g.count[s];
  }
  for (Index s = 0; s < G; ++s) {
    g.x.row(s) /= static_cast<double>(g.count[static_cast<std::size_t>(s)]);
    g.y(s) /= static_cast<double>(g.count[static_cast<std::size_t>(s)]);
  }
  return g;
}

}  // namespace

RegressionResult pooled_ols(const PanelDataset& panel, const RegressionSpec& spec) {
  const auto s = detail::build_sample(panel, spec, true);
  const auto fit = least_squares(s.X, s.y, s.names);
  auto r = base_result("pooled_ols", spec, s);
  const double n = static_cast<double>(s.X.rows());
  const double k = static_cast<double>(s.X.cols());
  r.beta = fit.beta;
  r.design = s.X;
  r.response = s.y;
  r.residuals = fit.residuals;
  r.df_resid = n - k;
  r.conventional_covariance = fit.xtx_inverse * (fit.ssr / (n - k));
  r.covariance = robust_covariance(s.X, fit.residuals, fit.xtx_inverse, s.groups, spec.covariance, n - k);
  r.diagnostics.r2 = centered_r2(s.y, fit.ssr);
  r.diagnostics.r2_adjusted = 1.0 - (1.0 - r.diagnostics.r2) * (n - 1.0) / (n - k);
  detail::finish_diagnostics(r);
  return r;
}

RegressionResult fixed_effects_within(const PanelDataset& panel, const RegressionSpec& spec) {
  const auto s = detail::build_sample(panel, spec, false);
  if (s.X.cols() == 0) throw ValidationError("fixed effects model has no regressors");
  const auto means = group_means(s.X, s.y, s.groups);
  MatrixXd Xw = s.X;
  VectorXd yw = s.y;
  for (Index i = 0; i < Xw.rows(); ++i) {
    const auto slot = static_cast<Index>(means.slot.at(s.groups[static_cast<std::size_t>(i)]));
    Xw.row(i) -= means.x.row(slot);
    yw(i) -= means.y(slot);
  }
  for (Index j = 0; j < Xw.cols(); ++j) {
    const double within = Xw.col(j).squaredNorm();
    const double total = s.X.col(j).squaredNorm();
    if (!(within > 1e-20 * std::max(total, 1.0))) {
      throw ValidationError("regressor '" + s.names[static_cast<std::size_t>(j)] +
                            "' is time-invariant within countries; fixed effects cannot identify it");
    }
  }
  const auto fit = least_squares(Xw, yw, s.names);
  auto r = base_result("fixed_effects", spec, s);
  const double n = static_cast<double>(Xw.rows());
  const double k = static_cast<double>(Xw.cols());
  const double g = static_cast<double>(means.slot.size());
  const double df = n - g - k;
  if (df <= 0) throw ValidationError("fixed effects model has no residual degrees of freedom");
  r.beta = fit.beta;
  r.design = Xw;
  r.response = yw;
  r.residuals = fit.residuals;
  r.df_resid = df;
  r.conventional_covariance = fit.xtx_inverse * (fit.ssr / df);
  if (spec.covariance == CovarianceType::cluster) {
    if (g < 2) throw ComputationError("cluster-robust errors need at least two clusters");
    r.covariance = detail::cluster_sandwich(Xw, fit.residuals, fit.xtx_inverse, s.groups) * (g / (g - 1.0)) *
                   ((n - 1.0) / (n - k - 1.0));
  } else {
    r.covariance = robust_covariance(Xw, fit.residuals, fit.xtx_inverse, s.groups, spec.covariance, df);
  }
  r.diagnostics.r2 = centered_r2(yw, fit.ssr);
  r.diagnostics.r2_adjusted = 1.0 - (1.0 - r.diagnostics.r2) * (n - 1.0) / df;
  detail::finish_diagnostics(r);
  return r;
}

RegressionResult random_effects_gls(const PanelDataset& panel, const RegressionSpec& spec) {
  const auto s = detail::build_sample(panel, spec, true);
  const auto means = group_means(s.X, s.y, s.groups);
  const std::size_t T = means.count.front();
  for (auto c : means.count) {
    if (c != T) throw ValidationError("random effects requires a balanced estimation sample");
  }
  const double n = static_cast<double>(s.X.rows());
  const double k = static_cast<double>(s.X.cols());
  const double G = static_cast<double>(means.slot.size());
  if (T < 2) throw ValidationError("random effects needs at least two periods");

  // Within regression on the columns that vary within countries.
  MatrixXd Xw = s.X;
  VectorXd yw = s.y;
  for (Index i = 0; i < Xw.rows(); ++i) {
    const auto slot = static_cast<Index>(means.slot.at(s.groups[static_cast<std::size_t>(i)]));
    Xw.row(i) -= means.x.row(slot);
    yw(i) -= means.y(slot);
  }
  std::vector<Index> varying;
  std::vector<std::string> varying_names;
  for (Index j = 0; j < Xw.cols(); ++j) {
    if (Xw.col(j).squaredNorm() > 1e-20 * std::max(s.X.col(j).squaredNorm(), 1.0)) {
      varying.push_back(j);
      varying_names.push_back(s.names[static_cast<std::size_t>(j)]);
    }
  }
  double ssr_within = yw.squaredNorm();
  if (!varying.empty()) {
    MatrixXd Xv(Xw.rows(), static_cast<Index>(varying.size()));
    for (std::size_t c = 0; c < varying.size(); ++c) Xv.col(static_cast<Index>(c)) = Xw.col(varying[c]);
    ssr_within = least_squares(Xv, yw, varying_names).ssr;
  }
  const double kw = static_cast<double>(varying.size());
  const double sigma_e2 = ssr_within / (n - G - kw);
  // Between regression on group means; columns constant across groups
  // (year dummies in a balanced panel) collapse into the intercept.
  std::vector<Index> between_cols;
  std::vector<std::string> between_names;
  for (Index j = 0; j < means.x.cols(); ++j) {
    const bool is_const = s.names[static_cast<std::size_t>(j)] == "const";
    const double spread = (means.x.col(j).array() - means.x.col(j).mean()).matrix().squaredNorm();
    if (is_const || spread > 1e-20 * std::max(means.x.col(j).squaredNorm(), 1.0)) {
      between_cols.push_back(j);
      between_names.push_back(s.names[static_cast<std::size_t>(j)]);
    }
  }
  MatrixXd Xb(means.x.rows(), static_cast<Index>(between_cols.size()));
  for (std::size_t c = 0; c < between_cols.size(); ++c) Xb.col(static_cast<Index>(c)) = means.x.col(between_cols[c]);
  const double kb = static_cast<double>(between_cols.size());
  if (G <= kb) throw ValidationError("random effects needs more countries than between-regression parameters");
  const double ssr_between = least_squares(Xb, means.y, between_names).ssr;
  const double sigma_b2 = ssr_between / (G - kb);
  double sigma_u2 = sigma_b2 - sigma_e2 / static_cast<double>(T);
  if (sigma_u2 < 0.0) {
    warn("random effects: negative between-unit variance estimate clamped to 0");
    sigma_u2 = 0.0;
  }
  const double denom = sigma_e2 + static_cast<double>(T) * sigma_u2;
  const double theta = denom > 0.0 ? 1.0 - std::sqrt(sigma_e2 / denom) : 0.0;

  MatrixXd Xq = s.X;
  VectorXd yq = s.y;
  for (Index i = 0; i < Xq.rows(); ++i) {
    const auto slot = static_cast<Index>(means.slot.at(s.groups[static_cast<std::size_t>(i)]));
    Xq.row(i) -= theta * means.x.row(slot);
    yq(i) -= theta * means.y(slot);
  }
  const auto fit = least_squares(Xq, yq, s.names);
  auto r = base_result("random_effects", spec, s);
  r.beta = fit.beta;
  r.design = Xq;
  r.response = yq;
  r.residuals = fit.residuals;
  r.df_resid = n - k;
  r.normal_inference = true;
  r.sigma_e2 = sigma_e2;
  r.sigma_u2 = sigma_u2;
  r.theta = theta;
  // Quasi-demeaned errors have variance sigma_e^2; sharing it with FE keeps
  // the Hausman variance difference positive semi-definite.
  r.conventional_covariance = fit.xtx_inverse * sigma_e2;
  r.covariance = robust_covariance(Xq, fit.residuals, fit.xtx_inverse, s.groups, spec.covariance, n - k);
  r.diagnostics.r2 = centered_r2(s.y, (s.y - s.X * fit.beta).squaredNorm());
  detail::finish_diagnostics(r);
  return r;
}

TestResult hausman_test(const RegressionResult& fe, const RegressionResult& re) {
  std::vector<std::string> common;
  for (const auto& n : fe.names)
    if (n != "const" && re.has(n)) common.push_back(n);
  if (common.empty()) throw ValidationError("Hausman test: no coefficients in common");
  const auto q = static_cast<Index>(common.size());
  VectorXd d(q);
  MatrixXd V(q, q);
  for (Index a = 0; a < q; ++a) {
    const auto ia = static_cast<Index>(fe.index(common[static_cast<std::size_t>(a)]));
    const auto ja = static_cast<Index>(re.index(common[static_cast<std::size_t>(a)]));
    d(a) = fe.beta(ia) - re.beta(ja);
    for (Index b = 0; b < q; ++b) {
      const auto ib = static_cast<Index>(fe.index(common[static_cast<std::size_t>(b)]));
      const auto jb = static_cast<Index>(re.index(common[static_cast<std::size_t>(b)]));
      V(a, b) = fe.conventional_covariance(ia, ib) - re.conventional_covariance(ja, jb);
    }
  }
  TestResult out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (V + V.transpose()));
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    out.flagged = true;
    out.note = "variance difference is not positive definite";
    warn("Hausman test: " + out.note + "; using the generalized inverse");
  }
  int rank = 0;
  const MatrixXd Vinv = stats::symmetric_pinv(V, &rank);
  if (rank < q && !out.flagged) warn("Hausman test: singular variance difference; using the generalized inverse");
  out.statistic = d.dot(Vinv * d);
  out.df = rank;
  out.p_value = stats::chi2_sf(out.statistic, out.df);
  return out;
}

TestResult breusch_pagan_lm(const RegressionResult& pooled) {
  std::map<std::size_t, std::pair<double, std::size_t>> by_group;
  for (Index i = 0; i < pooled.residuals.size(); ++i) {
    auto& [sum, count] = by_group[pooled.groups[static_cast<std::size_t>(i)]];
    sum += pooled.residuals(i);
    ++count;
  }
  if (by_group.empty()) throw ValidationError("Breusch-Pagan LM: no residuals");
  const std::size_t T = by_group.begin()->second.second;
  for (const auto& [g, v] : by_group) {
    if (v.second != T) throw ValidationError("Breusch-Pagan LM requires a balanced sample");
  }
  if (T < 2) throw ValidationError("Breusch-Pagan LM is undefined with a single time period");
  double sum_sq_group = 0.0;
  for (const auto& [g, v] : by_group) sum_sq_group += v.first * v.first;
  const double n = static_cast<double>(pooled.residuals.size());
  const double ratio = sum_sq_group / pooled.residuals.squaredNorm() - 1.0;
  TestResult out;
  out.statistic = n / (2.0 * (static_cast<double>(T) - 1.0)) * ratio * ratio;
  out.df = 1;
  out.p_value = stats::chi2_sf(out.statistic, 1);
  return out;
}

namespace {

/// n R^2 of an auxiliary regression of `target` on [1, columns].
double auxiliary_nr2(const MatrixXd& columns, const VectorXd& target) {
  MatrixXd Z(columns.rows(), columns.cols() + 1);
  Z.leftCols(columns.cols()) = columns;
  Z.col(columns.cols()).setOnes();
  std::vector<std::string> names;
  for (Index j = 0; j < columns.cols(); ++j) names.push_back("aux" + std::to_string(j));
  names.push_back("const");
  const auto fit = least_squares(Z, target, names);
  return static_cast<double>(target.size()) * centered_r2(target, fit.ssr);
}

MatrixXd non_constant_columns(const RegressionResult& r) {
  std::vector<Index> keep;
  for (std::size_t j = 0; j < r.names.size(); ++j)
    if (r.names[j] != "const") keep.push_back(static_cast<Index>(j));
  MatrixXd out(r.design.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Index>(c)) = r.design.col(keep[c]);
  return out;
}

}  // namespace

TestResult heteroskedasticity_test(const RegressionResult& result) {
  const MatrixXd Z = non_constant_columns(result);
  if (Z.cols() == 0) throw ValidationError("heteroskedasticity test needs at least one non-constant regressor");
  const VectorXd e2 = result.residuals.array().square();
  TestResult out;
  out.statistic = auxiliary_nr2(Z, e2);
  out.df = static_cast<double>(Z.cols());
  out.p_value = stats::chi2_sf(out.statistic, out.df);
  return out;
}

TestResult breusch_godfrey(const RegressionResult& result, int order) {
  if (order < 1) throw ValidationError("Breusch-Godfrey order must be at least 1");
  std::map<std::pair<std::size_t, int>, Index> at;
  std::map<std::size_t, int> periods;
  for (Index i = 0; i < result.residuals.size(); ++i) {
    at[{result.groups[static_cast<std::size_t>(i)], result.years[static_cast<std::size_t>(i)]}] = i;
    ++periods[result.groups[static_cast<std::size_t>(i)]];
  }
  int t_max = 0;
  for (const auto& [g, c] : periods) t_max = std::max(t_max, c);
  if (order >= t_max) {
    throw ValidationError("Breusch-Godfrey order " + std::to_string(order) + " needs more than " +
                          std::to_string(t_max) + " periods");
  }
  const MatrixXd base = non_constant_columns(result);
  MatrixXd Z(base.rows(), base.cols() + order);
  Z.leftCols(base.cols()) = base;
  for (Index i = 0; i < Z.rows(); ++i) {
    for (int l = 1; l <= order; ++l) {
      auto it = at.find({result.groups[static_cast<std::size_t>(i)], result.years[static_cast<std::size_t>(i)] - l});
      Z(i, base.cols() + l - 1) = it == at.end() ? 0.0 : result.residuals(it->second);
    }
  }
  TestResult out;
  out.statistic = auxiliary_nr2(Z, result.residuals);
  out.df = order;
  out.p_value = stats::chi2_sf(out.statistic, out.df);
  return out;
}

TestResult durbin_wu_hausman(const PanelDataset& panel, const RegressionSpec& spec, const std::string& suspect,
                             const std::vector<std::string>& instruments) {
  if (!contains(spec.regressors, suspect)) throw ValidationError("suspect '" + suspect + "' is not a regressor");
  if (instruments.empty()) throw ValidationError("Durbin-Wu-Hausman test needs at least one instrument");
  if (contains(instruments, suspect)) throw ValidationError("suspect '" + suspect + "' cannot instrument itself");
  for (const auto& z : instruments) {
    if (contains(spec.regressors, z)) throw ValidationError("instrument '" + z + "' is already a regressor");
  }
  const auto s = detail::build_sample(panel, spec, true, instruments);
  const auto n = s.X.rows();
  const auto js = static_cast<Index>(std::find(s.names.begin(), s.names.end(), suspect) - s.names.begin());

  MatrixXd exog(n, s.X.cols() - 1);
  std::vector<std::string> exog_names;
  for (Index j = 0, c = 0; j < s.X.cols(); ++j) {
    if (j == js) continue;
    exog.col(c++) = s.X.col(j);
    exog_names.push_back(s.names[static_cast<std::size_t>(j)]);
  }
  MatrixXd first(n, exog.cols() + static_cast<Index>(instruments.size()));
  first.leftCols(exog.cols()) = exog;
  auto first_names = exog_names;
  for (std::size_t z = 0; z < instruments.size(); ++z) {
    const auto& col = panel.column(instruments[z]);
    for (Index i = 0; i < n; ++i) first(i, exog.cols() + static_cast<Index>(z)) = col[s.rows[static_cast<std::size_t>(i)]];
    first_names.push_back(instruments[z]);
  }
  const VectorXd x = s.X.col(js);
  const auto unrestricted = least_squares(first, x, first_names);
  const auto restricted = least_squares(exog, x, exog_names);
  const double q = static_cast<double>(instruments.size());
  const double df_u = static_cast<double>(n - first.cols());
  const double f = ((restricted.ssr - unrestricted.ssr) / q) / (unrestricted.ssr / df_u);

  MatrixXd aug(n, s.X.cols() + 1);
  aug.leftCols(s.X.cols()) = s.X;
  aug.col(s.X.cols()) = unrestricted.residuals;
  auto aug_names = s.names;
  aug_names.push_back("first_stage_residual");
  const auto fit = least_squares(aug, s.y, aug_names);
  const double df = static_cast<double>(n - aug.cols());
  const MatrixXd cov = robust_covariance(aug, fit.residuals, fit.xtx_inverse, s.groups, CovarianceType::hc1, df);
  const Index last = aug.cols() - 1;
  const double t = fit.beta(last) / std::sqrt(cov(last, last));

  TestResult out;
  out.statistic = t * t;
  out.df = 1;
  out.p_value = stats::chi2_sf(out.statistic, 1);
  if (!(f >= 1.0)) {
    out.flagged = true;
    out.note = "weak first stage (F = " + csv::format(f) + ")";
    warn("Durbin-Wu-Hausman test for '" + suspect + "': " + out.note);
  }
  return out;
}

TestResult wald_joint(const RegressionResult& result) {
  std::vector<Index> idx;
  for (std::size_t j = 0; j < result.names.size(); ++j) {
    const auto& n = result.names[j];
    if (n != "const" && n.rfind("year_", 0) != 0) idx.push_back(static_cast<Index>(j));
  }
  if (idx.empty()) throw ValidationError("Wald test: no slopes to test");
  const auto q = static_cast<Index>(idx.size());
  VectorXd b(q);
  MatrixXd V(q, q);
  for (Index a = 0; a < q; ++a) {
    b(a) = result.beta(idx[static_cast<std::size_t>(a)]);
    for (Index c = 0; c < q; ++c) V(a, c) = result.covariance(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
  }
  TestResult out;
  Eigen::LDLT<MatrixXd> ldlt(V);
  const double rcond = ldlt.rcond();
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && rcond > 1e-14) {
    out.statistic = b.dot(ldlt.solve(b));
    out.df = static_cast<double>(q);
  } else {
    warn("Wald test: singular coefficient covariance; using the generalized inverse");
    int rank = 0;
    out.statistic = b.dot(stats::symmetric_pinv(V, &rank) * b);
    out.df = rank;
  }
  out.p_value = stats::chi2_sf(out.statistic, out.df);
  return out;
}

double export_intensity_top5(const std::vector<FlowRecord>& flows, const CountryCode& country, int year) {
  std::map<CountryCode, double> by_dest;
  for (const auto& f : flows) {
    if (f.origin == country && f.year == year && f.destination != country && f.value > 0.0) {
      by_dest[f.destination] += f.value;
    }
  }
  std::vector<double> values;
  for (const auto& [d, v] : by_dest) values.push_back(v);
  std::sort(values.begin(), values.end(), std::greater<>());
  double total = 0.0, top = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += values[i];
    if (i < 5) top += values[i];
  }
  if (total <= 0.0) {
    warn("no exports for " + country.str() + " in " + std::to_string(year) + "; export intensity set to 0");
    return 0.0;
  }
  return top / total;
}

std::vector<double> build_external_instrument(const std::vector<FlowRecord>& flows, const PanelDataset& panel,
                                              const std::string& endogenous) {
  std::map<std::pair<CountryCode, int>, std::vector<const FlowRecord*>> by_origin;
  for (const auto& f : flows) by_origin[{f.origin, f.year}].push_back(&f);
  const auto& x = panel.column(endogenous);
  std::vector<double> out(panel.rows());
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    std::vector<FlowRecord> own;
    auto it = by_origin.find({panel.country_at(r), panel.year_at(r)});
    if (it != by_origin.end())
      for (const auto* f : it->second) own.push_back(*f);
    out[r] = export_intensity_top5(own, panel.country_at(r), panel.year_at(r)) * x[r];
  }
  return out;
}

}  // namespace tradenet
