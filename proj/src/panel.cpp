#include "tradenet/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"

namespace tradenet {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PanelDataset::PanelDataset(std::vector<CountryCode> countries, int first_year, int years)
    : countries_(std::move(countries)), first_year_(first_year), years_(years) {
  if (years <= 0) throw ValidationError("panel needs at least one year");
  if (!std::is_sorted(countries_.begin(), countries_.end()) ||
      std::adjacent_find(countries_.begin(), countries_.end()) != countries_.end()) {
    throw ValidationError("panel countries must be sorted and unique");
  }
}

bool PanelDataset::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& PanelDataset::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown panel column '" + name + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void PanelDataset::set_column(const std::string& name, std::vector<double> values) {
  if (values.size() != rows()) {
    throw ValidationError("column '" + name + "' has " + std::to_string(values.size()) + " cells, panel has " +
                          std::to_string(rows()) + " rows");
  }
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it != names_.end()) {
    columns_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
    return;
  }
  names_.push_back(name);
  columns_.push_back(std::move(values));
}

std::string PanelDataset::to_csv() const {
  std::vector<std::string> header{"country", "year"};
  header.insert(header.end(), names_.begin(), names_.end());
  csv::Writer w(header);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::vector<std::string> f{country_at(r).str(), std::to_string(year_at(r))};
    for (const auto& col : columns_) f.push_back(csv::format(col[r]));
    w.add(std::move(f));
  }
  return w.str();
}

PanelDataset PanelDataset::from_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_country = table.require_column("country", path.string());
  const auto c_year = table.require_column("year", path.string());
  std::set<CountryCode> countries;
  std::set<int> years;
  std::map<std::pair<CountryCode, int>, const csv::Row*> by_key;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ValidationError(path.string() + ": line " + std::to_string(row.line) + ": wrong field count");
    }
    const CountryCode c(row.fields[c_country]);
    const int y = static_cast<int>(csv::parse_int(row.fields[c_year], row.line, "year"));
    if (!by_key.emplace(std::make_pair(c, y), &row).second) {
      throw ValidationError(path.string() + ": line " + std::to_string(row.line) + ": duplicate country-year");
    }
    countries.insert(c);
    years.insert(y);
  }
  if (by_key.empty()) throw ValidationError(path.string() + ": empty panel");
  const int y0 = *years.begin();
  const int t = *years.rbegin() - y0 + 1;
  PanelDataset panel({countries.begin(), countries.end()}, y0, t);
  bool complete = by_key.size() == panel.rows();
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (k == c_country || k == c_year) continue;
    std::vector<double> col(panel.rows(), kNaN);
    for (std::size_t r = 0; r < panel.rows(); ++r) {
      auto it = by_key.find({panel.country_at(r), panel.year_at(r)});
      if (it == by_key.end()) continue;
      const auto& text = it->second->fields[k];
      if (text != "NA" && !text.empty()) col[r] = csv::parse_double(text, it->second->line, table.header[k]);
    }
    panel.set_column(table.header[k], std::move(col));
  }
  panel.set_balanced(complete);
  return panel;
}

const std::vector<std::string>& panel_base_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"k_in",    "k_out",           "s_in", "s_out",     "pagerank",   "betweenness",
                                  "betweenness_raw", "rwb",  "closeness", "clustering", "kcore"};
    for (const auto& c : covariate_names()) n.push_back(c);
    return n;
  }();
  return names;
}

PanelDataset assemble(const std::vector<CentralityRecord>& centrality,
                      const std::vector<CovariateRecord>& covariates, int first_year, int last_year,
                      BalanceMode mode) {
  if (last_year < first_year) throw ValidationError("panel year range is empty");
  const int t_count = last_year - first_year + 1;
  std::map<std::pair<CountryCode, int>, const CentralityRecord*> cen;
  for (const auto& r : centrality) {
    if (r.year < first_year || r.year > last_year) continue;
    if (!cen.emplace(std::make_pair(r.country, r.year), &r).second) {
      throw ValidationError("duplicate centrality record for " + r.country.str() + " " + std::to_string(r.year));
    }
  }
  std::map<std::pair<CountryCode, int>, const CovariateRecord*> cov;
  for (const auto& r : covariates) {
    if (r.year < first_year || r.year > last_year) continue;
    if (!cov.emplace(std::make_pair(r.country, r.year), &r).second) {
      throw ValidationError("duplicate covariate record for " + r.country.str() + " " + std::to_string(r.year));
    }
  }
  std::map<CountryCode, int> coverage;
  std::set<CountryCode> seen;
  for (const auto& [key, rec] : cen) {
    seen.insert(key.first);
    if (cov.count(key)) ++coverage[key.first];
  }
  for (const auto& [key, rec] : cov) seen.insert(key.first);

  std::vector<CountryCode> kept;
  if (mode == BalanceMode::strict) {
    for (const auto& [c, n] : coverage)
      if (n == t_count) kept.push_back(c);
  } else {
    kept.assign(seen.begin(), seen.end());
  }
  if (kept.empty()) throw ComputationError("no fully-covered countries");

  PanelDataset panel(kept, first_year, t_count);
  const auto& names = panel_base_columns();
  std::vector<std::vector<double>> cols(names.size(), std::vector<double>(panel.rows(), kNaN));
  bool complete = true;
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    const auto key = std::make_pair(panel.country_at(r), panel.year_at(r));
    auto ic = cen.find(key);
    auto iv = cov.find(key);
    if (ic == cen.end() || iv == cov.end()) complete = false;
    std::size_t k = 0;
    if (ic != cen.end()) {
      const auto& c = *ic->second;
      const double vals[] = {static_cast<double>(c.k_in), static_cast<double>(c.k_out), c.s_in, c.s_out,
                             c.pagerank, c.betweenness_norm, c.betweenness, c.rwb, c.closeness, c.clustering,
                             static_cast<double>(c.kcore)};
      for (double v : vals) cols[k++][r] = v;
    } else {
      k = 11;
    }
    if (iv != cov.end()) {
      for (const auto& name : covariate_names()) cols[k++][r] = iv->second->value(name);
    }
  }
  for (std::size_t k = 0; k < names.size(); ++k) panel.set_column(names[k], std::move(cols[k]));
  panel.set_balanced(complete);
  return panel;
}

PanelDataset add_lags(const PanelDataset& panel, const std::vector<std::string>& variables, int max_lag,
                      const PresampleLookup& presample) {
  if (max_lag < 1) throw ValidationError("lag order must be at least 1");
  if (max_lag >= panel.years()) {
    throw ValidationError("lag order " + std::to_string(max_lag) + " needs more than " +
                          std::to_string(panel.years()) + " years");
  }
  PanelDataset out = panel;
  for (const auto& var : variables) {
    const auto& base = panel.column(var);
    for (int lag = 1; lag <= max_lag; ++lag) {
      std::vector<double> col(panel.rows(), kNaN);
      for (std::size_t i = 0; i < panel.country_count(); ++i) {
        for (int t = 0; t < panel.years(); ++t) {
          const std::size_t r = panel.row(i, t);
          if (t >= lag) {
            col[r] = base[panel.row(i, t - lag)];
          } else if (presample) {
            col[r] = presample(panel.countries()[i], panel.first_year() + t - lag, var);
          }
        }
      }
      out.set_column("L" + std::to_string(lag) + "." + var, std::move(col));
    }
  }
  return out;
}

PanelDataset apply_log_policy(const PanelDataset& panel, double epsilon) {
  PanelDataset out = panel;
  for (const auto& name : panel.column_names()) {
    out.set_column(name, log_transform_policy(name, panel.column(name), epsilon));
  }
  return out;
}

std::string CorrelationMatrix::to_csv() const {
  std::vector<std::string> header{"variable"};
  header.insert(header.end(), variables.begin(), variables.end());
  csv::Writer w(header);
  for (std::size_t i = 0; i < variables.size(); ++i) {
    std::vector<std::string> f{variables[i]};
    for (double v : values[i]) f.push_back(csv::format(v));
    w.add(std::move(f));
  }
  return w.str();
}

CorrelationMatrix correlation_matrix(const PanelDataset& panel, const std::vector<std::string>& variables) {
  const std::size_t k = variables.size();
  std::vector<const std::vector<double>*> cols;
  for (const auto& v : variables) cols.push_back(&panel.column(v));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    bool ok = true;
    for (const auto* c : cols) ok = ok && std::isfinite((*c)[r]);
    if (ok) rows.push_back(r);
  }
  if (rows.size() < 3) throw ValidationError("correlation needs at least 3 complete rows");
  const auto n = static_cast<double>(rows.size());
  std::vector<std::vector<double>> centered(k, std::vector<double>(rows.size()));
  std::vector<double> norm(k);
  for (std::size_t a = 0; a < k; ++a) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += (*cols[a])[r];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      centered[a][i] = (*cols[a])[rows[i]] - mean;
      ss += centered[a][i] * centered[a][i];
    }
    if (!(ss > 0.0)) throw ComputationError("zero-variance variable '" + variables[a] + "' in correlation");
    norm[a] = std::sqrt(ss);
  }
  CorrelationMatrix out;
  out.variables = variables;
  out.values.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) s += centered[a][i] * centered[b][i];
      const double r = std::clamp(s / (norm[a] * norm[b]), -1.0, 1.0);
      out.values[a][b] = r;
      out.values[b][a] = r;
    }
  }
  return out;
}

std::vector<DescriptiveRow> descriptive_stats(const PanelDataset& panel, const std::vector<std::string>& variables) {
  if (panel.rows() == 0) throw ValidationError("descriptive statistics of an empty panel");
  std::vector<DescriptiveRow> out;
  for (const auto& v : variables) {
    const auto& col = panel.column(v);
    DescriptiveRow d;
    d.variable = v;
    double sum = 0.0;
    d.min = std::numeric_limits<double>::infinity();
    d.max = -d.min;
    for (double x : col) {
      if (!std::isfinite(x)) continue;
      ++d.obs;
      sum += x;
      d.min = std::min(d.min, x);
      d.max = std::max(d.max, x);
    }
    if (d.obs == 0) {
      d.mean = d.sd = d.min = d.max = kNaN;
    } else {
      d.mean = sum / static_cast<double>(d.obs);
      double ss = 0.0;
      for (double x : col)
        if (std::isfinite(x)) ss += (x - d.mean) * (x - d.mean);
      d.sd = d.obs > 1 ? std::sqrt(ss / static_cast<double>(d.obs - 1)) : 0.0;
    }
    out.push_back(d);
  }
  return out;
}

std::string descriptives_csv(const std::vector<DescriptiveRow>& rows) {
  csv::Writer w({"variable", "obs", "mean", "sd", "min", "max"});
  for (const auto& d : rows) {
    w.add({d.variable, std::to_string(d.obs), csv::format(d.mean), csv::format(d.sd), csv::format(d.min),
           csv::format(d.max)});
  }
  return w.str();
}

std::vector<CountryCode> top_k_ranking(const std::vector<CentralityRecord>& records, const std::string& measure,
                                       int year, std::size_t k) {
  std::vector<std::pair<double, CountryCode>> entries;
  for (const auto& r : records) {
    if (r.year == year) entries.emplace_back(r.measure(measure), r.country);
  }
  if (entries.empty()) throw ValidationError("no centrality records for " + std::to_string(year));
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<CountryCode> out;
  for (std::size_t i = 0; i < std::min(k, entries.size()); ++i) out.push_back(entries[i].second);
  return out;
}

std::string rankings_csv(const std::vector<CentralityRecord>& records, const std::string& measure, std::size_t k) {
  std::set<int> years;
  std::map<std::pair<int, CountryCode>, double> value;
  for (const auto& r : records) {
    years.insert(r.year);
    value[{r.year, r.country}] = r.measure(measure);
  }
  csv::Writer w({"year", "rank", "country", "value"});
  for (int y : years) {
    const auto top = top_k_ranking(records, measure, y, k);
    for (std::size_t i = 0; i < top.size(); ++i) {
      w.add({std::to_string(y), std::to_string(i + 1), top[i].str(), csv::format(value[{y, top[i]}])});
    }
  }
  return w.str();
}

}  // namespace tradenet
