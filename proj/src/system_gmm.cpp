#include "tradenet/system_gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "econometrics_internal.hpp"
#include "tradenet/error.hpp"
#include "tradenet/stats.hpp"

namespace tradenet {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// A panel variable extended backwards with its L<k>.<name> columns, so that
/// value(i, t) is defined for t in [-presample, T).
class Extended {
 public:
  Extended(const PanelDataset& panel, const std::string& name) : panel_(&panel), base_(&panel.column(name)) {
    for (int k = 1;; ++k) {
      const std::string lag = "L" + std::to_string(k) + "." + name;
      if (!panel.has_column(lag)) break;
      lags_.push_back(&panel.column(lag));
    }
  }

  double operator()(std::size_t i, int t) const {
    if (t >= panel_->years()) return kNaN;
    if (t >= 0) return (*base_)[panel_->row(i, t)];
    const auto k = static_cast<std::size_t>(-t);
    if (k <= lags_.size()) return (*lags_[k - 1])[panel_->row(i, 0)];
    return kNaN;
  }

 private:
  const PanelDataset* panel_;
  const std::vector<double>* base_;
  std::vector<const std::vector<double>*> lags_;
};

double or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

enum class RowKind { diff, level };

/// One instrument column: value for unit i at an equation row.
struct Instrument {
  std::string name;
  std::function<double(std::size_t, RowKind, int)> value;
};

struct Layout {
  std::vector<std::string> names;
  std::vector<std::function<double(std::size_t, int)>> regressor;  // level value at period t
  std::vector<bool> in_diff;                                       // false for the constant
};

MatrixXd symmetric_inverse_or_pinv(const MatrixXd& m, const char* what) {
  int rank = 0;
  const MatrixXd inv = stats::symmetric_pinv(m, &rank, 1e-12);
  if (rank < m.rows()) warn(std::string("system GMM: singular ") + what + "; using the generalized inverse");
  return inv;
}

MatrixXd checked_inverse(const MatrixXd& m) {
  Eigen::LDLT<MatrixXd> ldlt(0.5 * (m + m.transpose()));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-14)) {
    throw ComputationError("system GMM: coefficient normal matrix is singular (collinear regressors or instruments)");
  }
  return ldlt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

RegressionResult system_gmm(const PanelDataset& panel, const RegressionSpec& spec) {
  spec.validate();
  if (!spec.include_lagged_dependent) throw ValidationError("system GMM needs the lagged dependent variable");
  if (panel.years() < 4) throw ValidationError("system GMM needs at least 4 periods");
  const auto& opt = spec.gmm;
  const bool system = opt.equations == GmmEquations::system;
  const int T = panel.years();
  const std::size_t N = panel.country_count();

  const Extended ext_y(panel, spec.dependent);
  std::vector<const std::vector<double>*> xcols;
  for (const auto& r : spec.regressors) xcols.push_back(&panel.column(r));

  auto level_valid = [&](std::size_t i, int t) {
    if (t < 0 || t >= T) return false;
    if (!std::isfinite(ext_y(i, t)) || !std::isfinite(ext_y(i, t - 1))) return false;
    for (const auto* c : xcols)
      if (!std::isfinite((*c)[panel.row(i, t)])) return false;
    return true;
  };

  // Equation rows per unit.
  std::vector<std::vector<int>> diff_t(N), level_t(N);
  std::set<int> level_years, diff_years;
  for (std::size_t i = 0; i < N; ++i) {
    for (int t = 0; t < T; ++t) {
      if (!level_valid(i, t)) continue;
      if (level_valid(i, t - 1)) {
        diff_t[i].push_back(t);
        diff_years.insert(panel.first_year() + t);
      }
      if (system) {
        level_t[i].push_back(t);
        level_years.insert(panel.first_year() + t);
      }
    }
  }
  const auto& sample_years = system ? level_years : diff_years;
  if (sample_years.empty()) throw ValidationError("system GMM: empty estimation sample");

  // Regressors: L1.y, x..., year dummies, const.
  Layout lay;
  lay.names.push_back(spec.lagged_dependent());
  lay.regressor.emplace_back([&](std::size_t i, int t) { return ext_y(i, t - 1); });
  lay.in_diff.push_back(true);
  for (std::size_t k = 0; k < xcols.size(); ++k) {
    const auto* c = xcols[k];
    lay.names.push_back(spec.regressors[k]);
    lay.regressor.emplace_back([&panel, c](std::size_t i, int t) { return (*c)[panel.row(i, t)]; });
    lay.in_diff.push_back(true);
  }
  std::vector<int> dummy_years;
  if (spec.year_dummies) {
    // Collinearity among the dummies and the other regressors is judged on the
    // level observations of every unit.
    std::vector<int> row_years;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t) {
        if (!level_valid(i, t)) continue;
        row_years.push_back(panel.first_year() + t);
        std::vector<double> r;
        for (const auto& f : lay.regressor) r.push_back(f(i, t));
        rows.push_back(std::move(r));
      }
    MatrixXd base(static_cast<Index>(rows.size()), static_cast<Index>(lay.regressor.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c) base(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    dummy_years = detail::identifiable_dummy_years(
        base, row_years, std::vector<int>(std::next(sample_years.begin()), sample_years.end()));
  }
  for (int yr : dummy_years) {
    lay.names.push_back("year_" + std::to_string(yr));
    const int y0 = panel.first_year();
    lay.regressor.emplace_back([yr, y0](std::size_t, int t) { return y0 + t == yr ? 1.0 : 0.0; });
    lay.in_diff.push_back(true);
  }
  if (system) {
    lay.names.push_back("const");
    lay.regressor.emplace_back([](std::size_t, int) { return 1.0; });
    lay.in_diff.push_back(false);
  }
  const auto K = static_cast<Index>(lay.names.size());

  // Instruments.
  std::vector<Instrument> inst;
  std::vector<std::pair<std::string, Extended>> gmm_vars;
  gmm_vars.emplace_back(spec.dependent, ext_y);
  for (const auto& e : spec.endogenous) gmm_vars.emplace_back(e, Extended(panel, e));
  for (const auto& [name, series] : gmm_vars) {
    const Extended* s = &series;
    if (opt.difference_gmm_instruments) {
      for (int l = opt.lag_min; l <= opt.lag_max; ++l) {
        if (opt.collapse) {
          inst.push_back({"L" + std::to_string(l) + "." + name, [s, l](std::size_t i, RowKind k, int t) {
                            return k == RowKind::diff ? or_zero((*s)(i, t - l)) : 0.0;
                          }});
        } else {
          for (int p = 1; p < T; ++p) {
            inst.push_back({"L" + std::to_string(l) + "." + name + "@" + std::to_string(p),
                            [s, l, p](std::size_t i, RowKind k, int t) {
                              return k == RowKind::diff && t == p ? or_zero((*s)(i, t - l)) : 0.0;
                            }});
          }
        }
      }
    }
    if (system && opt.level_gmm_instruments) {
      const int l = opt.lag_min - 1;
      auto dlag = [s, l](std::size_t i, int t) { return or_zero((*s)(i, t - l) - (*s)(i, t - l - 1)); };
      if (opt.collapse) {
        inst.push_back({"DL" + std::to_string(l) + "." + name,
                        [dlag](std::size_t i, RowKind k, int t) { return k == RowKind::level ? dlag(i, t) : 0.0; }});
      } else {
        for (int p = 0; p < T; ++p) {
          inst.push_back({"DL" + std::to_string(l) + "." + name + "@" + std::to_string(p),
                          [dlag, p](std::size_t i, RowKind k, int t) {
                            return k == RowKind::level && t == p ? dlag(i, t) : 0.0;
                          }});
        }
      }
    }
  }
  auto iv_style = [&](const std::string& name, std::function<double(std::size_t, int)> level) {
    inst.push_back({name, [level](std::size_t i, RowKind k, int t) {
                      if (k == RowKind::level) return or_zero(level(i, t));
                      return t >= 1 ? or_zero(level(i, t) - level(i, t - 1)) : 0.0;
                    }});
  };
  for (std::size_t k = 0; k < xcols.size(); ++k) {
    if (std::find(spec.endogenous.begin(), spec.endogenous.end(), spec.regressors[k]) != spec.endogenous.end()) {
      continue;
    }
    const auto* c = xcols[k];
    iv_style(spec.regressors[k], [&panel, c](std::size_t i, int t) { return (*c)[panel.row(i, t)]; });
  }
  for (const auto& z : opt.extra_instruments) {
    const auto* c = &panel.column(z);
    iv_style(z, [&panel, c](std::size_t i, int t) { return (*c)[panel.row(i, t)]; });
  }
  for (std::size_t d = 0; d < dummy_years.size(); ++d) {
    const int yr = dummy_years[d];
    const int y0 = panel.first_year();
    iv_style("year_" + std::to_string(yr), [yr, y0](std::size_t, int t) { return y0 + t == yr ? 1.0 : 0.0; });
  }
  if (system) {
    inst.push_back({"const", [](std::size_t, RowKind k, int) { return k == RowKind::level ? 1.0 : 0.0; }});
  }

  // Stack units.
  auto fit = std::make_shared<GmmFit>();
  std::vector<std::size_t> unit_country;
  const auto L_all = static_cast<Index>(inst.size());
  for (std::size_t i = 0; i < N; ++i) {
    const auto nd = static_cast<Index>(diff_t[i].size());
    const auto nl = static_cast<Index>(level_t[i].size());
    if (nd + nl == 0) continue;
    GmmUnit u;
    u.diff_periods = diff_t[i];
    u.level_periods = level_t[i];
    u.Z.resize(nd + nl, L_all);
    u.X.resize(nd + nl, K);
    u.y.resize(nd + nl);
    for (Index r = 0; r < nd + nl; ++r) {
      const bool is_diff = r < nd;
      const int t = is_diff ? diff_t[i][static_cast<std::size_t>(r)] : level_t[i][static_cast<std::size_t>(r - nd)];
      const RowKind kind = is_diff ? RowKind::diff : RowKind::level;
      u.y(r) = is_diff ? ext_y(i, t) - ext_y(i, t - 1) : ext_y(i, t);
      for (Index k = 0; k < K; ++k) {
        const auto& f = lay.regressor[static_cast<std::size_t>(k)];
        if (is_diff) {
          u.X(r, k) = lay.in_diff[static_cast<std::size_t>(k)] ? f(i, t) - f(i, t - 1) : 0.0;
        } else {
          u.X(r, k) = f(i, t);
        }
      }
      for (Index c = 0; c < L_all; ++c) u.Z(r, c) = inst[static_cast<std::size_t>(c)].value(i, kind, t);
    }
    fit->units.push_back(std::move(u));
    unit_country.push_back(i);
  }
  if (fit->units.empty()) throw ValidationError("system GMM: empty estimation sample");

  // Drop instruments that are zero everywhere.
  std::vector<Index> keep;
  for (Index c = 0; c < L_all; ++c) {
    bool nonzero = false;
    for (const auto& u : fit->units) nonzero = nonzero || !u.Z.col(c).isZero(0.0);
    if (nonzero) keep.push_back(c);
  }
  const auto L = static_cast<Index>(keep.size());
  for (auto& u : fit->units) {
    MatrixXd Zk(u.Z.rows(), L);
    for (Index c = 0; c < L; ++c) Zk.col(c) = u.Z.col(keep[static_cast<std::size_t>(c)]);
    u.Z = std::move(Zk);
  }
  for (Index c : keep) fit->instrument_names.push_back(inst[static_cast<std::size_t>(c)].name);
  if (L < K) {
    throw ValidationError("system GMM is underidentified: " + std::to_string(L) + " instruments for " +
                          std::to_string(K) + " parameters");
  }
  if (static_cast<std::size_t>(L) > fit->units.size()) {
    warn("instrument proliferation: " + std::to_string(L) + " instruments for " + std::to_string(fit->units.size()) +
         " countries");
  }

  // One step.
  MatrixXd ZX = MatrixXd::Zero(L, K);
  VectorXd Zy = VectorXd::Zero(L);
  MatrixXd ZHZ = MatrixXd::Zero(L, L);
  for (const auto& u : fit->units) {
    ZX.noalias() += u.Z.transpose() * u.X;
    Zy.noalias() += u.Z.transpose() * u.y;
    const auto nd = static_cast<Index>(u.diff_periods.size());
    MatrixXd H = MatrixXd::Identity(u.Z.rows(), u.Z.rows());
    for (Index a = 0; a < nd; ++a) {
      H(a, a) = 2.0;
      if (a + 1 < nd && u.diff_periods[static_cast<std::size_t>(a + 1)] == u.diff_periods[static_cast<std::size_t>(a)] + 1) {
        H(a, a + 1) = H(a + 1, a) = -1.0;
      }
    }
    ZHZ.noalias() += u.Z.transpose() * H * u.Z;
  }
  const MatrixXd W1 = symmetric_inverse_or_pinv(ZHZ, "one-step weight matrix");
  const MatrixXd A1 = checked_inverse(ZX.transpose() * W1 * ZX);
  const VectorXd beta1 = A1 * (ZX.transpose() * W1 * Zy);
  MatrixXd S = MatrixXd::Zero(L, L);
  for (auto& u : fit->units) {
    u.residuals_one_step = u.y - u.X * beta1;
    const VectorXd g = u.Z.transpose() * u.residuals_one_step;
    S.noalias() += g * g.transpose();
  }
  const MatrixXd W2 = symmetric_inverse_or_pinv(S, "two-step weight matrix");
  const MatrixXd V1r = A1 * (ZX.transpose() * W1 * S * W1 * ZX) * A1;
  fit->weight_two = W2;
  fit->steps = opt.steps;

  if (opt.steps == GmmSteps::one) {
    fit->beta = beta1;
    fit->weight = W1;
    fit->bread = A1;
    fit->covariance = V1r;
    for (auto& u : fit->units) u.residuals = u.residuals_one_step;
  } else {
    const MatrixXd A2 = checked_inverse(ZX.transpose() * W2 * ZX);
    const VectorXd beta2 = A2 * (ZX.transpose() * W2 * Zy);
    VectorXd Zu2 = VectorXd::Zero(L);
    for (auto& u : fit->units) {
      u.residuals = u.y - u.X * beta2;
      Zu2.noalias() += u.Z.transpose() * u.residuals;
    }
    fit->beta = beta2;
    fit->weight = W2;
    fit->bread = A2;
    fit->covariance = A2;
    if (opt.windmeijer) {
      // D_k = A2 X'Z W2 [sum_i Z_i'(x_ik u1_i' + u1_i x_ik')Z_i] W2 Z'u2
      const MatrixXd left = A2 * ZX.transpose() * W2;
      const VectorXd right = W2 * Zu2;
      MatrixXd D(K, K);
      std::vector<VectorXd> b(fit->units.size());
      for (std::size_t i = 0; i < fit->units.size(); ++i) {
        b[i] = fit->units[i].Z.transpose() * fit->units[i].residuals_one_step;
      }
      for (Index k = 0; k < K; ++k) {
        VectorXd acc = VectorXd::Zero(L);
        for (std::size_t i = 0; i < fit->units.size(); ++i) {
          const auto& u = fit->units[i];
          const VectorXd a = u.Z.transpose() * u.X.col(k);
          acc += a * b[i].dot(right) + b[i] * a.dot(right);
        }
        D.col(k) = left * acc;
      }
      fit->covariance = A2 + D * A2 + A2 * D.transpose() + D * V1r * D.transpose();
    }
  }

  RegressionResult r;
  r.estimator = system ? "system_gmm" : "difference_gmm";
  r.dependent = spec.dependent;
  r.names = lay.names;
  r.beta = fit->beta;
  r.covariance = 0.5 * (fit->covariance + fit->covariance.transpose());
  r.conventional_covariance = r.covariance;
  r.normal_inference = true;
  r.endogenous = spec.endogenous;

  // Report the level equation (difference rows for the difference estimator).
  std::size_t rows = 0;
  for (const auto& u : fit->units) rows += system ? u.level_periods.size() : u.diff_periods.size();
  r.design.resize(static_cast<Index>(rows), K);
  r.response.resize(static_cast<Index>(rows));
  r.residuals.resize(static_cast<Index>(rows));
  Index at = 0;
  for (std::size_t ui = 0; ui < fit->units.size(); ++ui) {
    const auto& u = fit->units[ui];
    const auto nd = static_cast<Index>(u.diff_periods.size());
    const Index start = system ? nd : 0;
    const Index count = system ? static_cast<Index>(u.level_periods.size()) : nd;
    const auto& periods = system ? u.level_periods : u.diff_periods;
    for (Index q = 0; q < count; ++q) {
      r.design.row(at) = u.X.row(start + q);
      r.response(at) = u.y(start + q);
      r.residuals(at) = u.residuals(start + q);
      r.groups.push_back(unit_country[ui]);
      r.years.push_back(panel.first_year() + periods[static_cast<std::size_t>(q)]);
      ++at;
    }
  }
  r.df_resid = static_cast<double>(rows) - static_cast<double>(K);
  r.gmm = fit;

  auto& d = r.diagnostics;
  d.instrument_count = static_cast<std::size_t>(L);
  d.n_obs = rows;
  const auto j = hansen_j(r);
  d.hansen_j = j.statistic;
  d.hansen_df = j.df;
  d.hansen_p = j.p_value;
  for (int order : {1, 2}) {
    TestResult ar;
    try {
      ar = arellano_bond_ar(r, order);
    } catch (const ValidationError&) {
      ar.statistic = ar.p_value = kNaN;
    }
    (order == 1 ? d.ar1_z : d.ar2_z) = ar.statistic;
    (order == 1 ? d.ar1_p : d.ar2_p) = ar.p_value;
  }
  detail::finish_diagnostics(r);
  return r;
}

TestResult hansen_j(const RegressionResult& gmm) {
  if (!gmm.gmm) throw ValidationError("Hansen J needs a GMM result");
  const auto& fit = *gmm.gmm;
  const Index L = fit.weight_two.rows();
  const Index K = fit.beta.size();
  TestResult out;
  out.df = static_cast<double>(L - K);
  if (L <= K) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  VectorXd g = VectorXd::Zero(L);
  for (const auto& u : fit.units) g.noalias() += u.Z.transpose() * u.residuals;
  out.statistic = std::max(0.0, g.dot(fit.weight_two * g));
  out.p_value = stats::chi2_sf(out.statistic, out.df);
  return out;
}

TestResult arellano_bond_ar(const RegressionResult& gmm, int order) {
  if (!gmm.gmm) throw ValidationError("Arellano-Bond test needs a GMM result");
  if (order < 1) throw ValidationError("Arellano-Bond order must be at least 1");
  const auto& fit = *gmm.gmm;
  int span = 0;
  for (const auto& u : fit.units) {
    if (!u.diff_periods.empty()) span = std::max(span, u.diff_periods.back() - u.diff_periods.front() + 1);
  }
  if (order >= span) {
    throw ValidationError("Arellano-Bond AR(" + std::to_string(order) + ") needs more than " +
                          std::to_string(span) + " differenced periods");
  }
  const Index K = fit.beta.size();
  const Index L = fit.weight.rows();
  double num = 0.0;
  double var1 = 0.0;
  VectorXd wX = VectorXd::Zero(K);
  VectorXd Zue = VectorXd::Zero(L);
  for (const auto& u : fit.units) {
    const auto nd = static_cast<Index>(u.diff_periods.size());
    if (nd == 0) continue;
    VectorXd w = VectorXd::Zero(nd);
    for (Index a = 0; a < nd; ++a) {
      const int t = u.diff_periods[static_cast<std::size_t>(a)];
      for (Index b = 0; b < a; ++b) {
        if (u.diff_periods[static_cast<std::size_t>(b)] == t - order) w(a) = u.residuals(b);
      }
    }
    const VectorXd e = u.residuals.head(nd);
    const double we = w.dot(e);
    num += we;
    var1 += we * we;
    wX.noalias() += u.X.topRows(nd).transpose() * w;
    Zue.noalias() += u.Z.transpose() * u.residuals * we;
  }
  MatrixXd ZX = MatrixXd::Zero(L, K);
  for (const auto& u : fit.units) ZX.noalias() += u.Z.transpose() * u.X;
  const double var = var1 - 2.0 * wX.dot(fit.bread * ZX.transpose() * fit.weight * Zue) +
                     wX.dot(fit.covariance * wX);
  TestResult out;
  out.df = 0;
  if (!(var > 0.0)) {
    warn("Arellano-Bond AR(" + std::to_string(order) + "): non-positive variance");
    out.statistic = out.p_value = kNaN;
    return out;
  }
  out.statistic = num / std::sqrt(var);
  out.p_value = stats::normal_two_sided_p(out.statistic);
  return out;
}

}  // namespace tradenet
