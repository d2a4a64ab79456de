#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tradenet/centrality.hpp"
#include "tradenet/country.hpp"
#include "tradenet/macro_indicators.hpp"

namespace tradenet {

/// Rectangular country x year panel stored column-wise. Row r belongs to
/// country r / T and year first_year + r % T. Missing cells are NaN.
class PanelDataset {
 public:
  PanelDataset() = default;
  PanelDataset(std::vector<CountryCode> countries, int first_year, int years);

  const std::vector<CountryCode>& countries() const { return countries_; }
  std::size_t country_count() const { return countries_.size(); }
  int first_year() const { return first_year_; }
  int last_year() const { return first_year_ + years_ - 1; }
  int years() const { return years_; }
  std::size_t rows() const { return countries_.size() * static_cast<std::size_t>(years_); }
  std::size_t row(std::size_t country, int t) const { return country * static_cast<std::size_t>(years_) + t; }
  const CountryCode& country_at(std::size_t row) const { return countries_[row / years_]; }
  std::size_t country_index_at(std::size_t row) const { return row / years_; }
  int year_at(std::size_t row) const { return first_year_ + static_cast<int>(row % years_); }

  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  /// Appends a column, or replaces one with the same name in place.
  void set_column(const std::string& name, std::vector<double> values);
  const std::vector<std::string>& column_names() const { return names_; }

  /// False for a passthrough panel that may carry missing cells.
  bool balanced() const { return balanced_; }
  void set_balanced(bool b) { balanced_ = b; }

  /// country,year,<columns...>; NaN written as NA.
  std::string to_csv() const;
  static PanelDataset from_csv(const std::filesystem::path& path);

 private:
  std::vector<CountryCode> countries_;
  int first_year_ = 0;
  int years_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  bool balanced_ = true;
};

enum class BalanceMode {
  strict,       // drop every country missing any year
  passthrough,  // keep everyone, leave gaps as NaN (diagnostics only)
};

/// Panel columns built from the two record types, in order. The regression
/// betweenness is the normalised score; the raw count is `betweenness_raw`.
const std::vector<std::string>& panel_base_columns();

PanelDataset assemble(const std::vector<CentralityRecord>& centrality,
                      const std::vector<CovariateRecord>& covariates, int first_year, int last_year,
                      BalanceMode mode = BalanceMode::strict);

/// Value of `variable` for `country` in a year before the panel starts, or
/// NaN when unknown.
using PresampleLookup = std::function<double(const CountryCode&, int year, const std::string& variable)>;

/// Adds L1.<v> .. L<max_lag>.<v> for each variable. Lags never cross
/// countries; early cells come from `presample` or stay NaN.
PanelDataset add_lags(const PanelDataset& panel, const std::vector<std::string>& variables, int max_lag,
                      const PresampleLookup& presample = {});

/// Applies log_transform_policy to every column.
PanelDataset apply_log_policy(const PanelDataset& panel, double epsilon = 1e-6);

struct CorrelationMatrix {
  std::vector<std::string> variables;
  std::vector<std::vector<double>> values;

  std::string to_csv() const;
};

/// Pearson correlations over rows where every listed variable is present.
CorrelationMatrix correlation_matrix(const PanelDataset& panel, const std::vector<std::string>& variables);

struct DescriptiveRow {
  std::string variable;
  std::size_t obs = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Sample statistics (n-1 denominator) over the non-missing cells.
std::vector<DescriptiveRow> descriptive_stats(const PanelDataset& panel, const std::vector<std::string>& variables);
std::string descriptives_csv(const std::vector<DescriptiveRow>& rows);

/// Countries sorted descending by measure, ties ascending by code; k is
/// truncated to the number of records for that year.
std::vector<CountryCode> top_k_ranking(const std::vector<CentralityRecord>& records, const std::string& measure,
                                       int year, std::size_t k);

/// year,rank,country,value for every year present in `records`.
std::string rankings_csv(const std::vector<CentralityRecord>& records, const std::string& measure, std::size_t k);

}  // namespace tradenet
