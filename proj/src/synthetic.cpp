#include "tradenet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"
#include "tradenet/random.hpp"

namespace tradenet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clamp_wgi(double v) { return std::clamp(v, -2.5, 2.5); }

struct Country {
  double x = 0.0, y = 0.0;
  double log_gdp0 = 0.0, log_pop0 = 0.0, growth = 0.0;
  double hc0 = 0.0, governance = 0.0, infra_factor = 0.0, tariff0 = 0.0;
};

}  // namespace

void SyntheticSpec::validate() const {
  if (n_countries < 4) throw ValidationError("synthetic spec: n_countries must be at least 4");
  if (last_year < first_year) throw ValidationError("synthetic spec: empty year range");
  if (incomplete_countries + 3 > n_countries) {
    throw ValidationError("synthetic spec: too many incomplete countries for " + std::to_string(n_countries));
  }
  if (max_memberships < 1 || max_memberships > static_cast<int>(kCommunities.size())) {
    throw ValidationError("synthetic spec: max_memberships out of range");
  }
  if (!(density_start > 0.0 && density_start <= 1.0 && density_end > 0.0 && density_end <= 1.0)) {
    throw ValidationError("synthetic spec: densities must lie in (0, 1]");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const SplitRng root(spec.seed);
  SyntheticData out;
  out.universe = synthetic_universe(spec.n_countries);
  const auto codes = out.universe.all();
  const std::size_t n = codes.size();
  const int years = spec.last_year - spec.first_year + 1;

  const CountryCode zaf("ZAF");
  const auto hub_it = std::find(codes.begin(), codes.end(), zaf);
  const std::size_t hub = hub_it != codes.end() ? static_cast<std::size_t>(hub_it - codes.begin()) : 0;
  out.hub = codes[hub];

  std::vector<Country> cs(n);
  {
    auto rng = root.split("countries");
    for (auto& c : cs) {
      c.x = rng.uniform();
      c.y = rng.uniform();
      c.log_pop0 = std::log(1.5e7) + 1.0 * rng.normal();
      c.log_gdp0 = c.log_pop0 + std::log(1500.0) + 0.8 * rng.normal();
      c.growth = spec.gdp_growth_mean + spec.gdp_growth_sd * rng.normal();
      c.hc0 = 1.1 + 1.1 * rng.uniform();
      c.governance = -0.6 + 0.6 * rng.normal();
      c.infra_factor = 0.4 * rng.normal();
      c.tariff0 = 3.0 + 17.0 * rng.uniform();
    }
    cs[hub].log_gdp0 = std::max(cs[hub].log_gdp0, std::log(3e11));
  }

  // GDP paths, also used by the flow generator.
  std::vector<std::vector<double>> gdp(n, std::vector<double>(static_cast<std::size_t>(years)));
  {
    auto rng = root.split("gdp");
    for (std::size_t i = 0; i < n; ++i) {
      double lg = cs[i].log_gdp0;
      for (int t = 0; t < years; ++t) {
        if (t > 0) lg += cs[i].growth + spec.gdp_shock_sd * rng.normal();
        gdp[i][static_cast<std::size_t>(t)] = std::exp(lg);
      }
    }
  }

  // Flows.
  {
    auto pair_rng = root.split("pairs");
    std::vector<double> propensity(n * n);
    for (auto& p : propensity) p = pair_rng.uniform();
    auto rng = root.split("flows");
    for (int t = 0; t < years; ++t) {
      const double frac = years > 1 ? static_cast<double>(t) / (years - 1) : 0.0;
      const double density = spec.density_start + (spec.density_end - spec.density_start) * frac;
      const int year = spec.first_year + t;
      std::vector<double> w(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double churn = 0.05 * rng.normal();
          const double noise = rng.normal();
          if (i == j) continue;
          if (i != hub && propensity[i * n + j] + churn >= density) continue;
          const double dist = 0.05 + std::hypot(cs[i].x - cs[j].x, cs[i].y - cs[j].y);
          const double v = spec.flow_scale *
                           std::pow(gdp[i][static_cast<std::size_t>(t)] / 1e9, spec.origin_elasticity) *
                           std::pow(gdp[j][static_cast<std::size_t>(t)] / 1e9, spec.destination_elasticity) /
                           std::pow(dist, spec.distance_elasticity) * std::exp(spec.flow_noise_sd * noise);
          w[i * n + j] = std::max(1.0, std::round(v));
        }
      }
      // Every hub export exceeds twice the largest other flow, so it survives
      // any quartile filter and the hub's out-strength dominates.
      double largest = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i != hub)
          for (std::size_t j = 0; j < n; ++j) largest = std::max(largest, w[i * n + j]);
      for (std::size_t j = 0; j < n; ++j)
        if (j != hub) w[hub * n + j] += 2.0 * largest;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (w[i * n + j] > 0.0) out.flows.push_back({codes[i], codes[j], year, w[i * n + j], 0});
    }
  }

  // Memberships.
  {
    auto rng = root.split("memberships");
    const std::size_t R = kCommunities.size();
    std::vector<std::vector<int>> cells(n, std::vector<int>(R, 0));
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = 1 + rng.below(static_cast<std::uint64_t>(spec.max_memberships));
      std::vector<std::size_t> order(R);
      for (std::size_t r = 0; r < R; ++r) order[r] = r;
      for (std::size_t r = R - 1; r > 0; --r) std::swap(order[r], order[rng.below(r + 1)]);
      for (std::size_t k = 0; k < m; ++k) cells[i][order[k]] = 1;
    }
    std::vector<std::string> names(kCommunities.begin(), kCommunities.end());
    out.memberships = MembershipMatrix(codes, names, cells);
  }

  // Macro series.
  {
    auto rng = root.split("macro");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = cs[i];
      double wgi_shock = 0.0;
      double fdi_shock = 0.5 * rng.normal();
      std::array<double, 6> wgi_offset{};
      for (auto& o : wgi_offset) o = 0.25 * rng.normal();
      for (int t = 0; t < years; ++t) {
        MacroRecord m;
        m.country = codes[i];
        m.year = spec.first_year + t;
        m.gdp = gdp[i][static_cast<std::size_t>(t)];
        m.pop = std::exp(c.log_pop0 + spec.pop_growth * t);
        m.rgdpc = m.gdp / m.pop;
        m.hc = c.hc0 + 0.015 * t + 0.01 * rng.normal();
        wgi_shock = 0.7 * wgi_shock + 0.06 * rng.normal();
        for (std::size_t k = 0; k < m.wgi.size(); ++k) {
          m.wgi[k] = clamp_wgi(c.governance + wgi_offset[k] + wgi_shock + 0.05 * rng.normal());
        }
        const double f = 0.5 * (std::log(m.rgdpc) - std::log(1500.0)) + c.infra_factor;
        m.infra[0] = std::exp(0.5 + f + 0.02 * t + 0.1 * rng.normal());
        m.infra[1] = std::exp(3.0 + 1.2 * f + 0.03 * t + 0.2 * rng.normal());
        m.infra[2] = std::exp(6.0 + 0.5 * f + 0.01 * t + 0.05 * rng.normal());
        m.infra[3] = std::exp(5.5 + 0.9 * f + 0.02 * t + 0.1 * rng.normal());
        fdi_shock = 0.8 * fdi_shock + 0.3 * rng.normal();
        m.fdi = std::exp(0.9 * std::log(m.gdp) - 4.0 + fdi_shock);
        out.macro.push_back(m);
      }
    }
  }

  // Missing cells.
  if (spec.incomplete_countries > 0) {
    auto rng = root.split("missing");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
      if (i != hub) candidates.push_back(i);
    for (std::size_t k = 0; k < spec.incomplete_countries; ++k) {
      std::swap(candidates[k], candidates[k + rng.below(candidates.size() - k)]);
    }
    std::vector<std::size_t> chosen(candidates.begin(),
                                    candidates.begin() + static_cast<std::ptrdiff_t>(spec.incomplete_countries));
    std::sort(chosen.begin(), chosen.end());
    const int lo = std::min(spec.first_year + 2, spec.last_year);
    for (std::size_t i : chosen) {
      const int year = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.last_year - lo + 1)));
      auto& m = out.macro[i * static_cast<std::size_t>(years) + static_cast<std::size_t>(year - spec.first_year)];
      switch (rng.below(4)) {
        case 0: m.hc = kNaN; break;
        case 1: m.wgi[rng.below(6)] = kNaN; break;
        case 2: m.infra[rng.below(4)] = kNaN; break;
        default: m.fdi = kNaN; break;
      }
      out.incomplete.push_back(codes[i]);
    }
  }

  // Tariffs (percent).
  {
    auto rng = root.split("tariffs");
    for (std::size_t i = 0; i < n; ++i) {
      for (int t = 0; t < years; ++t) {
        const double v = cs[i].tariff0 + spec.tariff_drift * t + 0.3 * rng.normal();
        out.tariffs[{codes[i], spec.first_year + t}] = std::max(0.5, v);
      }
    }
  }
  return out;
}

std::string flows_csv(const std::vector<FlowRecord>& flows) {
  std::string s = "origin,destination,year,value_kusd\n";
  for (const auto& f : flows) {
    s += f.origin.str() + ',' + f.destination.str() + ',' + std::to_string(f.year) + ',' + csv::format(f.value) + '\n';
  }
  return s;
}

std::string tariffs_csv(const std::map<std::pair<CountryCode, int>, double>& tariffs) {
  std::string s = "country,year,tariff\n";
  for (const auto& [key, v] : tariffs) s += key.first.str() + ',' + std::to_string(key.second) + ',' + csv::format(v) + '\n';
  return s;
}

std::string universe_csv(const CountryUniverse& universe) {
  std::string s = "code,first_year,last_year\n";
  for (const auto& e : universe.entries()) {
    const UniverseEntry open{};
    s += e.code.str() + ',' + (e.first_year == open.first_year ? "" : std::to_string(e.first_year)) + ',' +
         (e.last_year == open.last_year ? "" : std::to_string(e.last_year)) + '\n';
  }
  return s;
}

void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_text(dir / "flows.csv", flows_csv(data.flows));
  csv::write_text(dir / "macro.csv", macro_csv(data.macro));
  csv::write_text(dir / "memberships.csv", data.memberships.to_csv());
  csv::write_text(dir / "tariffs.csv", tariffs_csv(data.tariffs));
  csv::write_text(dir / "universe.csv", universe_csv(data.universe));

  std::ostringstream cfg;
  // Long samples reserve two leading years for lags; short ones use every year.
  const int panel_first = spec.last_year - spec.first_year + 1 >= 10 ? spec.first_year + 2 : spec.first_year;
  cfg << "# synthetic sample, seed " << spec.seed << "\n"
      << "[data]\n"
      << "flows = flows.csv\n"
      << "macro = macro.csv\n"
      << "memberships = memberships.csv\n"
      << "tariffs = tariffs.csv\n"
      << "universe = universe.csv\n\n"
      << "[years]\n"
      << "first = " << spec.first_year << "\n"
      << "last = " << spec.last_year << "\n"
      << "panel_first = " << panel_first << "\n\n"
      << "[series]\n"
      << "countries = " << data.hub.str();
  const auto codes = data.universe.all();
  for (std::size_t i = 0, added = 0; i < codes.size() && added < 5; ++i) {
    if (codes[i] == data.hub) continue;
    if (std::find(data.incomplete.begin(), data.incomplete.end(), codes[i]) != data.incomplete.end()) continue;
    cfg << ',' << codes[i].str();
    ++added;
  }
  if (spec.n_countries - spec.incomplete_countries <= 12) {
    // Too few countries for the full regressor list in the between regression,
    // and for a two-step weight matrix of full rank.
    cfg << "\n\n[estimation]\n"
        << "regressors = rgdpc, hc, tc, iqi\n"
        << "steps = one\n"
        << "endogeneity_candidates = rgdpc, hc, tc, iqi";
  }
  cfg << "\n\n[output]\n"
      << "dir = out\n"
      << "seed = " << spec.seed << "\n";
  csv::write_text(dir / "config.ini", cfg.str());
}

}  // namespace tradenet
