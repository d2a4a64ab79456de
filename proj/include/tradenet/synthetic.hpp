#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tradenet/country.hpp"
#include "tradenet/macro_indicators.hpp"
#include "tradenet/trade_graph.hpp"

namespace tradenet {

struct SyntheticSpec {
  std::size_t n_countries = 54;
  int first_year = 2000;
  int last_year = 2019;
  std::uint64_t seed = 42;

  // Flows: value ~ scale * (GDP_i/1e9)^a * (GDP_j/1e9)^b / dist^c * exp(noise).
  double flow_scale = 40.0;
  double origin_elasticity = 0.9;
  double destination_elasticity = 0.8;
  double distance_elasticity = 1.2;
  double flow_noise_sd = 0.8;
  /// Share of ordered pairs trading in the first and last year.
  double density_start = 0.35;
  double density_end = 0.6;

  /// Each country joins 1..max_memberships of the eight communities.
  int max_memberships = 4;

  double gdp_growth_mean = 0.035;
  double gdp_growth_sd = 0.015;
  double gdp_shock_sd = 0.03;
  double pop_growth = 0.025;
  double tariff_drift = -0.2;  // percentage points per year

  /// Countries given one missing macro cell inside [first_year + 2, last_year],
  /// so the strict balancing rule drops them. Never the hub.
  std::size_t incomplete_countries = 14;

  void validate() const;
};

struct SyntheticData {
  CountryUniverse universe;
  CountryCode hub;
  std::vector<FlowRecord> flows;
  std::vector<MacroRecord> macro;
  MembershipMatrix memberships;
  std::map<std::pair<CountryCode, int>, double> tariffs;
  std::vector<CountryCode> incomplete;
};

/// Deterministic in `spec`. The hub has the highest out-strength in every
/// year, with and without the quartile filter; flows are whole numbers.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Writes flows.csv, macro.csv, memberships.csv, tariffs.csv, universe.csv
/// and a config.ini referring to them. The config starts the panel two years
/// after the first network year when at least ten years are generated.
void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec, const std::filesystem::path& dir);

std::string flows_csv(const std::vector<FlowRecord>& flows);
std::string tariffs_csv(const std::map<std::pair<CountryCode, int>, double>& tariffs);
std::string universe_csv(const CountryUniverse& universe);

}  // namespace tradenet
