#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tradenet/country.hpp"

namespace tradenet {

/// Raw macro inputs for one country-year. Missing cells are NaN.
struct MacroRecord {
  CountryCode country;
  int year = 0;
  double rgdpc = 0.0;
  double gdp = 0.0;
  double hc = 0.0;
  double pop = 0.0;
  /// voice/accountability, political stability, government effectiveness,
  /// regulatory quality, rule of law, control of corruption
  std::array<double, 6> wgi{};
  /// fixed telephone lines per 100 people, air freight (ton-km),
  /// energy use (kg oil eq. per capita), electricity use (kWh per capita)
  std::array<double, 4> infra{};
  double fdi = 0.0;

  bool complete() const;
};

extern const std::array<const char*, 6> kWgiColumns;
extern const std::array<const char*, 4> kInfraColumns;

/// `macro.csv`: country,year,rgdpc,gdp,hc,pop,<wgi...>,<infra...>,fdi.
/// Empty or NA cells become NaN; invariants are checked on present cells.
std::vector<MacroRecord> read_macro_csv(const std::filesystem::path& path);
std::string macro_csv(const std::vector<MacroRecord>& records);

/// Country x regional-economic-community binary membership table.
class MembershipMatrix {
 public:
  MembershipMatrix() = default;
  MembershipMatrix(std::vector<CountryCode> countries, std::vector<std::string> communities,
                   std::vector<std::vector<int>> cells);

  const std::vector<CountryCode>& countries() const { return countries_; }
  const std::vector<std::string>& communities() const { return communities_; }
  bool contains(const CountryCode& c) const;
  /// Number of communities `c` belongs to.
  int membership_count(const CountryCode& c) const;
  /// B_ij: 1 iff i != j and they share at least one community.
  bool shares_community(const CountryCode& a, const CountryCode& b) const;

  /// `memberships.csv`: header `country,<REC>,...`, 0/1 cells.
  static MembershipMatrix from_csv(const std::filesystem::path& path);
  std::string to_csv() const;

 private:
  std::size_t index(const CountryCode& c) const;

  std::vector<CountryCode> countries_;  // sorted
  std::vector<std::string> communities_;
  std::vector<std::vector<int>> cells_;
};

/// The eight communities used by default.
extern const std::array<const char*, 8> kCommunities;

struct PcaIndex {
  std::vector<double> scores;
  Eigen::VectorXd loadings;   // unit-norm first eigenvector of the correlation matrix
  double explained_share = 0; // largest eigenvalue / number of columns
};

/// First principal component of the standardised columns. Rows are
/// observations. The sign is chosen so that scores correlate positively with
/// the row mean of the standardised inputs; if that correlation vanishes,
/// the first non-zero loading is made positive.
PcaIndex pca_index(const Eigen::MatrixXd& indicators, const std::vector<std::string>& column_names = {});

/// RTA_it = (1 / GDP_it) * sum_j B_ij GDP_jt over partners sharing a community.
double rta_measure(const CountryCode& country, int year, const std::map<CountryCode, double>& gdps,
                   const MembershipMatrix& memberships);

enum class OverlapFormula {
  excess_over_one,  // (m - 1) / (R - 1)
  share,            // m / R
};

/// 0 (with a warning) for a country outside every community.
double overlap_frequency_ratio(const CountryCode& country, const MembershipMatrix& memberships,
                               OverlapFormula formula = OverlapFormula::excess_over_one);

enum class TradeCostFormula {
  per_country,     // tariff_i / number of countries
  share_of_total,  // tariff_i / sum_j tariff_j
};

double trade_cost(const std::map<CountryCode, double>& tariffs, const CountryCode& country,
                  TradeCostFormula formula = TradeCostFormula::per_country);

/// 1 for 2007..2009, else 0.
int crisis_dummy(int year);

/// `tariffs.csv`: country,year,tariff.
std::map<std::pair<CountryCode, int>, double> read_tariffs_csv(const std::filesystem::path& path);

/// True for columns that enter regressions in logs. Level columns: kcore,
/// dummies (crisis, year_*), and the PCA indices iqi and infra. Lag columns
/// `L<k>.<var>` follow their base variable.
bool is_logged_column(const std::string& name);

/// log(x + epsilon) for logged columns, identity otherwise. NaN passes
/// through; a negative value in a logged column throws ValidationError.
std::vector<double> log_transform_policy(const std::string& column, const std::vector<double>& values,
                                         double epsilon = 1e-6);

struct CovariateRecord {
  CountryCode country;
  int year = 0;
  double iqi = 0.0;
  double infra = 0.0;
  double rta = 0.0;
  double ofr = 0.0;
  double tc = 0.0;
  int crisis = 0;
  double rgdpc = 0.0;
  double hc = 0.0;
  double pop = 0.0;
  double fdi = 0.0;

  double value(const std::string& name) const;
};

const std::vector<std::string>& covariate_names();

struct CovariateOptions {
  OverlapFormula overlap = OverlapFormula::excess_over_one;
  TradeCostFormula trade_cost = TradeCostFormula::per_country;
};

/// Builds covariates for every complete country-year that also has a
/// tariff and a membership row. Incomplete country-years are dropped.
std::vector<CovariateRecord> build_covariates(const std::vector<MacroRecord>& macro,
                                              const MembershipMatrix& memberships,
                                              const std::map<std::pair<CountryCode, int>, double>& tariffs,
                                              const CovariateOptions& options = {});

}  // namespace tradenet
