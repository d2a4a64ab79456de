#include "tradenet/macro_indicators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"

namespace tradenet {

const std::array<const char*, 6> kWgiColumns = {"wgi_voice",      "wgi_stability",   "wgi_effectiveness",
                                                "wgi_regulatory", "wgi_rule_of_law", "wgi_corruption"};
const std::array<const char*, 4> kInfraColumns = {"tel_lines", "air_freight", "energy_use", "electricity_use"};
const std::array<const char*, 8> kCommunities = {"CEN-SAD", "ECCAS", "UMA", "ECOWAS",
                                                 "SADC",    "IGAD",  "EAC", "COMESA"};

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cell(const csv::Row& row, std::size_t col, const char* what) {
  const auto& text = row.fields[col];
  if (text.empty() || text == "NA") return kNaN;
  return csv::parse_double(text, row.line, what);
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ": line " + std::to_string(line) + ": ";
}

}  // namespace

bool MacroRecord::complete() const {
  auto ok = [](double v) { return std::isfinite(v); };
  return ok(rgdpc) && ok(gdp) && ok(hc) && ok(pop) && ok(fdi) && std::all_of(wgi.begin(), wgi.end(), ok) &&
         std::all_of(infra.begin(), infra.end(), ok);
}

std::vector<MacroRecord> read_macro_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::string src = path.string();
  const auto c_country = table.require_column("country", src);
  const auto c_year = table.require_column("year", src);
  const auto c_rgdpc = table.require_column("rgdpc", src);
  const auto c_gdp = table.require_column("gdp", src);
  const auto c_hc = table.require_column("hc", src);
  const auto c_pop = table.require_column("pop", src);
  const auto c_fdi = table.require_column("fdi", src);
  std::array<std::size_t, 6> c_wgi{};
  std::array<std::size_t, 4> c_infra{};
  for (std::size_t k = 0; k < 6; ++k) c_wgi[k] = table.require_column(kWgiColumns[k], src);
  for (std::size_t k = 0; k < 4; ++k) c_infra[k] = table.require_column(kInfraColumns[k], src);

  std::vector<MacroRecord> out;
  std::set<std::pair<CountryCode, int>> seen;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ValidationError(where(path, row.line) + "expected " + std::to_string(table.header.size()) + " fields");
    }
    MacroRecord r;
    if (!CountryCode::is_valid(row.fields[c_country])) {
      throw ValidationError(where(path, row.line) + "invalid country code '" + row.fields[c_country] + "'");
    }
    r.country = CountryCode(row.fields[c_country]);
    r.year = static_cast<int>(csv::parse_int(row.fields[c_year], row.line, "year"));
    if (!seen.insert({r.country, r.year}).second) {
      throw ValidationError(where(path, row.line) + "duplicate country-year");
    }
    r.rgdpc = cell(row, c_rgdpc, "rgdpc");
    r.gdp = cell(row, c_gdp, "gdp");
    r.hc = cell(row, c_hc, "hc");
    r.pop = cell(row, c_pop, "pop");
    r.fdi = cell(row, c_fdi, "fdi");
    for (std::size_t k = 0; k < 6; ++k) r.wgi[k] = cell(row, c_wgi[k], kWgiColumns[k]);
    for (std::size_t k = 0; k < 4; ++k) r.infra[k] = cell(row, c_infra[k], kInfraColumns[k]);
    for (double w : r.wgi) {
      if (std::isfinite(w) && (w < -2.5 || w > 2.5)) {
        throw ValidationError(where(path, row.line) + "governance indicator outside [-2.5, 2.5]");
      }
    }
    if (std::isfinite(r.pop) && r.pop <= 0.0) throw ValidationError(where(path, row.line) + "pop must be positive");
    if (std::isfinite(r.gdp) && r.gdp <= 0.0) throw ValidationError(where(path, row.line) + "gdp must be positive");
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.country, a.year) < std::tie(b.country, b.year);
  });
  return out;
}

std::string macro_csv(const std::vector<MacroRecord>& records) {
  std::vector<std::string> header{"country", "year", "rgdpc", "gdp", "hc", "pop"};
  for (auto c : kWgiColumns) header.emplace_back(c);
  for (auto c : kInfraColumns) header.emplace_back(c);
  header.emplace_back("fdi");
  csv::Writer w(header);
  for (const auto& r : records) {
    std::vector<std::string> f{r.country.str(), std::to_string(r.year), csv::format(r.rgdpc), csv::format(r.gdp),
                               csv::format(r.hc), csv::format(r.pop)};
    for (double v : r.wgi) f.push_back(csv::format(v));
    for (double v : r.infra) f.push_back(csv::format(v));
    f.push_back(csv::format(r.fdi));
    w.add(std::move(f));
  }
  return w.str();
}

MembershipMatrix::MembershipMatrix(std::vector<CountryCode> countries, std::vector<std::string> communities,
                                   std::vector<std::vector<int>> cells)
    : communities_(std::move(communities)) {
  if (countries.size() != cells.size()) throw ValidationError("membership rows do not match countries");
  std::vector<std::size_t> order(countries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return countries[a] < countries[b]; });
  for (std::size_t i : order) {
    if (!countries_.empty() && countries_.back() == countries[i]) {
      throw ValidationError("duplicate country '" + countries[i].str() + "' in memberships");
    }
    if (cells[i].size() != communities_.size()) throw ValidationError("membership row width mismatch");
    for (int v : cells[i]) {
      if (v != 0 && v != 1) throw ValidationError("membership cells must be 0 or 1");
    }
    countries_.push_back(countries[i]);
    cells_.push_back(cells[i]);
  }
}

std::size_t MembershipMatrix::index(const CountryCode& c) const {
  auto it = std::lower_bound(countries_.begin(), countries_.end(), c);
  if (it == countries_.end() || *it != c) {
    throw ValidationError("country '" + c.str() + "' missing from membership matrix");
  }
  return static_cast<std::size_t>(it - countries_.begin());
}

bool MembershipMatrix::contains(const CountryCode& c) const {
  return std::binary_search(countries_.begin(), countries_.end(), c);
}

int MembershipMatrix::membership_count(const CountryCode& c) const {
  const auto& row = cells_[index(c)];
  return static_cast<int>(std::count(row.begin(), row.end(), 1));
}

bool MembershipMatrix::shares_community(const CountryCode& a, const CountryCode& b) const {
  if (a == b) return false;
  const auto& ra = cells_[index(a)];
  const auto& rb = cells_[index(b)];
  for (std::size_t k = 0; k < ra.size(); ++k) {
    if (ra[k] && rb[k]) return true;
  }
  return false;
}

MembershipMatrix MembershipMatrix::from_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_country = table.require_column("country", path.string());
  std::vector<std::string> communities;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (k != c_country) communities.push_back(table.header[k]);
  }
  if (communities.empty()) throw ValidationError(path.string() + ": no community columns");
  std::vector<CountryCode> countries;
  std::vector<std::vector<int>> cells;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ValidationError(where(path, row.line) + "expected " + std::to_string(table.header.size()) + " fields");
    }
    countries.emplace_back(row.fields[c_country]);
    std::vector<int> r;
    for (std::size_t k = 0; k < row.fields.size(); ++k) {
      if (k == c_country) continue;
      r.push_back(static_cast<int>(csv::parse_int(row.fields[k], row.line, "membership")));
    }
    cells.push_back(std::move(r));
  }
  return MembershipMatrix(std::move(countries), std::move(communities), std::move(cells));
}

std::string MembershipMatrix::to_csv() const {
  std::vector<std::string> header{"country"};
  header.insert(header.end(), communities_.begin(), communities_.end());
  csv::Writer w(header);
  for (std::size_t i = 0; i < countries_.size(); ++i) {
    std::vector<std::string> f{countries_[i].str()};
    for (int v : cells_[i]) f.push_back(std::to_string(v));
    w.add(std::move(f));
  }
  return w.str();
}

PcaIndex pca_index(const Eigen::MatrixXd& indicators, const std::vector<std::string>& column_names) {
  const Eigen::Index n = indicators.rows();
  const Eigen::Index k = indicators.cols();
  if (k < 2) throw ValidationError("pca_index needs at least two indicator columns");
  if (n < k + 1) throw ValidationError("pca_index needs at least k+1 observations");
  if (!indicators.allFinite()) throw ValidationError("pca_index input has missing cells");

  Eigen::MatrixXd z(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double mean = indicators.col(c).mean();
    const Eigen::VectorXd centered = indicators.col(c).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
      const std::string name = static_cast<std::size_t>(c) < column_names.size()
                                   ? column_names[static_cast<std::size_t>(c)]
                                   : "#" + std::to_string(c);
      throw ComputationError("pca_index: zero-variance column '" + name + "'");
    }
    z.col(c) = centered / sd;
  }
  const Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw ComputationError("pca_index: eigen-decomposition failed");
  // eigenvalues ascending
  Eigen::VectorXd loadings = solver.eigenvectors().col(k - 1);
  Eigen::VectorXd scores = z * loadings;

  const Eigen::VectorXd row_mean = z.rowwise().mean();
  const double cov = (scores.array() * (row_mean.array() - row_mean.mean())).sum();
  const double scale = std::sqrt(scores.squaredNorm() * (row_mean.array() - row_mean.mean()).square().sum());
  bool flip = false;
  if (scale > 0.0 && std::fabs(cov) > 1e-10 * scale) {
    flip = cov < 0.0;
  } else {
    for (Eigen::Index c = 0; c < k; ++c) {
      if (std::fabs(loadings(c)) > 1e-12) {
        flip = loadings(c) < 0.0;
        break;
      }
    }
  }
  if (flip) {
    loadings = -loadings;
    scores = -scores;
  }
  PcaIndex out;
  out.scores.assign(scores.data(), scores.data() + n);
  out.loadings = loadings;
  out.explained_share = solver.eigenvalues()(k - 1) / static_cast<double>(k);
  return out;
}

double rta_measure(const CountryCode& country, int year, const std::map<CountryCode, double>& gdps,
                   const MembershipMatrix& memberships) {
  auto own = gdps.find(country);
  if (own == gdps.end() || !std::isfinite(own->second)) {
    throw ValidationError("missing GDP for (" + country.str() + ", " + std::to_string(year) + ")");
  }
  double partner_total = 0.0;
  for (const auto& partner : memberships.countries()) {
    if (!memberships.shares_community(country, partner)) continue;
    auto it = gdps.find(partner);
    if (it == gdps.end() || !std::isfinite(it->second)) {
      throw ValidationError("missing GDP for (" + partner.str() + ", " + std::to_string(year) + ")");
    }
    partner_total += it->second;
  }
  return partner_total / own->second;
}

double overlap_frequency_ratio(const CountryCode& country, const MembershipMatrix& memberships,
                               OverlapFormula formula) {
  const int m = memberships.membership_count(country);
  const auto r = static_cast<double>(memberships.communities().size());
  if (m == 0) {
    warn("country " + country.str() + " belongs to no regional community; overlap ratio set to 0");
    return 0.0;
  }
  if (formula == OverlapFormula::share) return static_cast<double>(m) / r;
  if (r < 2.0) return 0.0;
  return static_cast<double>(m - 1) / (r - 1.0);
}

double trade_cost(const std::map<CountryCode, double>& tariffs, const CountryCode& country,
                  TradeCostFormula formula) {
  auto it = tariffs.find(country);
  if (it == tariffs.end() || !std::isfinite(it->second)) {
    throw ValidationError("missing tariff for " + country.str());
  }
  if (formula == TradeCostFormula::per_country) return it->second / static_cast<double>(tariffs.size());
  double total = 0.0;
  for (const auto& [c, t] : tariffs) total += t;
  return total > 0.0 ? it->second / total : 0.0;
}

int crisis_dummy(int year) { return year >= 2007 && year <= 2009 ? 1 : 0; }

std::map<std::pair<CountryCode, int>, double> read_tariffs_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_country = table.require_column("country", path.string());
  const auto c_year = table.require_column("year", path.string());
  const auto c_tariff = table.require_column("tariff", path.string());
  std::map<std::pair<CountryCode, int>, double> out;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ValidationError(where(path, row.line) + "expected " + std::to_string(table.header.size()) + " fields");
    }
    const CountryCode c(row.fields[c_country]);
    const int year = static_cast<int>(csv::parse_int(row.fields[c_year], row.line, "year"));
    const double t = cell(row, c_tariff, "tariff");
    if (std::isfinite(t) && t < 0.0) throw ValidationError(where(path, row.line) + "negative tariff");
    if (std::isfinite(t)) out[{c, year}] = t;
  }
  return out;
}

bool is_logged_column(const std::string& name) {
  std::string base = name;
  if (name.size() > 3 && name[0] == 'L' && name.find('.') != std::string::npos) {
    base = name.substr(name.find('.') + 1);
  }
  static const std::set<std::string> level = {"kcore", "crisis", "iqi", "infra", "year", "country"};
  if (level.count(base)) return false;
  if (base.rfind("year_", 0) == 0) return false;
  return true;
}

std::vector<double> log_transform_policy(const std::string& column, const std::vector<double>& values,
                                         double epsilon) {
  if (!is_logged_column(column)) return values;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (std::isnan(v)) {
      out[i] = v;
      continue;
    }
    if (v < 0.0 || !std::isfinite(v)) {
      throw ValidationError("negative or non-finite value in logged column '" + column + "'");
    }
    out[i] = std::log(v + epsilon);
  }
  return out;
}

double CovariateRecord::value(const std::string& name) const {
  if (name == "iqi") return iqi;
  if (name == "infra") return infra;
  if (name == "rta") return rta;
  if (name == "ofr") return ofr;
  if (name == "tc") return tc;
  if (name == "crisis") return crisis;
  if (name == "rgdpc") return rgdpc;
  if (name == "hc") return hc;
  if (name == "pop") return pop;
  if (name == "fdi") return fdi;
  throw ValidationError("unknown covariate '" + name + "'");
}

const std::vector<std::string>& covariate_names() {
  static const std::vector<std::string> names = {"rgdpc", "hc", "pop", "tc", "infra",
                                                 "iqi",   "rta", "fdi", "ofr", "crisis"};
  return names;
}

std::vector<CovariateRecord> build_covariates(const std::vector<MacroRecord>& macro,
                                              const MembershipMatrix& memberships,
                                              const std::map<std::pair<CountryCode, int>, double>& tariffs,
                                              const CovariateOptions& options) {
  std::vector<const MacroRecord*> rows;
  for (const auto& r : macro) {
    if (!r.complete()) continue;
    if (!memberships.contains(r.country)) continue;
    if (!tariffs.count({r.country, r.year})) continue;
    rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::tie(a->country, a->year) < std::tie(b->country, b->year);
  });
  if (rows.size() < 8) throw ComputationError("too few complete macro observations to build indices");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd wgi(n, 6);
  Eigen::MatrixXd infra(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < 6; ++k) wgi(i, k) = rows[static_cast<std::size_t>(i)]->wgi[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k < 4; ++k) infra(i, k) = rows[static_cast<std::size_t>(i)]->infra[static_cast<std::size_t>(k)];
  }
  const auto iqi = pca_index(wgi, {kWgiColumns.begin(), kWgiColumns.end()});
  const auto infra_index = pca_index(infra, {kInfraColumns.begin(), kInfraColumns.end()});

  // GDP and tariff cross-sections per year (every reported value counts).
  std::map<int, std::map<CountryCode, double>> gdp_by_year;
  for (const auto& r : macro) {
    if (std::isfinite(r.gdp) && memberships.contains(r.country)) gdp_by_year[r.year][r.country] = r.gdp;
  }
  std::map<int, std::map<CountryCode, double>> tariff_by_year;
  for (const auto& [key, t] : tariffs) tariff_by_year[key.second][key.first] = t;

  std::vector<CovariateRecord> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = *rows[i];
    CovariateRecord c;
    c.country = r.country;
    c.year = r.year;
    c.iqi = iqi.scores[i];
    c.infra = infra_index.scores[i];
    try {
      c.rta = rta_measure(r.country, r.year, gdp_by_year[r.year], memberships);
    } catch (const ValidationError& e) {
      warn(std::string("dropping ") + r.country.str() + " " + std::to_string(r.year) + ": " + e.what());
      continue;
    }
    c.ofr = overlap_frequency_ratio(r.country, memberships, options.overlap);
    c.tc = trade_cost(tariff_by_year[r.year], r.country, options.trade_cost);
    c.crisis = crisis_dummy(r.year);
    c.rgdpc = r.rgdpc;
    c.hc = r.hc;
    c.pop = r.pop;
    c.fdi = r.fdi;
    out.push_back(c);
  }
  return out;
}

}  // namespace tradenet
