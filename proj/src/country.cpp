#include "tradenet/country.hpp"

#include <algorithm>

#include "tradenet/csv.hpp"
#include "tradenet/error.hpp"

namespace tradenet {

CountryCode::CountryCode(std::string_view text) {
  if (!is_valid(text)) {
    throw ValidationError("invalid country code '" + std::string(text) + "'");
  }
  std::copy_n(text.begin(), 3, chars_.begin());
}

bool CountryCode::is_valid(std::string_view text) noexcept {
  return text.size() == 3 &&
         std::all_of(text.begin(), text.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

CountryUniverse::CountryUniverse(std::vector<UniverseEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].code == entries_[i - 1].code) {
      throw ValidationError("duplicate country code '" + entries_[i].code.str() + "' in universe");
    }
  }
}

std::vector<CountryCode> CountryUniverse::active(int year) const {
  std::vector<CountryCode> out;
  for (const auto& e : entries_) {
    if (year >= e.first_year && year <= e.last_year) out.push_back(e.code);
  }
  return out;
}

std::vector<CountryCode> CountryUniverse::all() const {
  std::vector<CountryCode> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.code);
  return out;
}

bool CountryUniverse::contains(const CountryCode& code) const {
  return std::binary_search(entries_.begin(), entries_.end(), UniverseEntry{code},
                            [](const auto& a, const auto& b) { return a.code < b.code; });
}

bool CountryUniverse::contains(const CountryCode& code, int year) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), code,
                             [](const UniverseEntry& e, const CountryCode& c) { return e.code < c; });
  return it != entries_.end() && it->code == code && year >= it->first_year &&
         year <= it->last_year;
}

CountryUniverse CountryUniverse::from_csv(const std::string& path) {
  const auto table = csv::read(path);
  const auto code_col = table.require_column("code", path);
  const auto first_col = table.column("first_year");
  const auto last_col = table.column("last_year");
  std::vector<UniverseEntry> entries;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ValidationError(path + ": line " + std::to_string(row.line) + ": expected " +
                            std::to_string(table.header.size()) + " fields");
    }
    UniverseEntry e;
    e.code = CountryCode(row.fields[code_col]);
    if (first_col && !row.fields[*first_col].empty()) {
      e.first_year = static_cast<int>(csv::parse_int(row.fields[*first_col], row.line, "first_year"));
    }
    if (last_col && !row.fields[*last_col].empty()) {
      e.last_year = static_cast<int>(csv::parse_int(row.fields[*last_col], row.line, "last_year"));
    }
    entries.push_back(e);
  }
  return CountryUniverse(std::move(entries));
}

namespace {

constexpr std::array<std::string_view, 54> kAfrican = {
    "DZA", "AGO", "BEN", "BWA", "BFA", "BDI", "CPV", "CMR", "CAF", "TCD", "COM",
    "COG", "CIV", "COD", "DJI", "EGY", "GNQ", "ERI", "SWZ", "ETH", "GAB", "GMB",
    "GHA", "GIN", "GNB", "KEN", "LSO", "LBR", "LBY", "MDG", "MWI", "MLI", "MRT",
    "MUS", "MAR", "MOZ", "NAM", "NER", "NGA", "RWA", "STP", "SEN", "SYC", "SLE",
    "SOM", "ZAF", "SSD", "SDN", "TZA", "TGO", "TUN", "UGA", "ZMB", "ZWE"};

}  // namespace

CountryUniverse african_universe() {
  std::vector<UniverseEntry> entries;
  for (auto code : kAfrican) {
    UniverseEntry e{CountryCode(code)};
    if (code == "SSD") e.first_year = 2012;
    entries.push_back(e);
  }
  return CountryUniverse(std::move(entries));
}

CountryUniverse synthetic_universe(std::size_t n) {
  std::vector<std::string> codes;
  if (n <= kAfrican.size()) {
    std::vector<std::string> sorted(kAfrican.begin(), kAfrican.end());
    std::sort(sorted.begin(), sorted.end());
    codes.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::string c(3, 'A');
      std::size_t v = i;
      for (int k = 2; k >= 0; --k) {
        c[static_cast<std::size_t>(k)] = static_cast<char>('A' + v % 26);
        v /= 26;
      }
      codes.push_back(c);
    }
  }
  std::vector<UniverseEntry> entries;
  for (const auto& c : codes) entries.push_back({CountryCode(c)});
  return CountryUniverse(std::move(entries));
}

}  // namespace tradenet
