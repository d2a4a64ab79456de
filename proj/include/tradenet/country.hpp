#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tradenet {

/// ISO-3166 alpha-3 code. Always three uppercase ASCII letters.
class CountryCode {
 public:
  CountryCode() = default;

  /// Throws ValidationError unless `text` is exactly three letters A-Z.
  explicit CountryCode(std::string_view text);

  static bool is_valid(std::string_view text) noexcept;

  std::string str() const { return {chars_.begin(), chars_.end()}; }

  auto operator<=>(const CountryCode&) const = default;
  bool operator==(const CountryCode&) const = default;

 private:
  std::array<char, 3> chars_{'A', 'A', 'A'};
};

struct UniverseEntry {
  CountryCode code;
  int first_year = -100000;
  int last_year = 100000;
};

/// The set of countries that may appear as nodes, each with an optional
/// activity window (e.g. South Sudan only exists from 2012).
class CountryUniverse {
 public:
  CountryUniverse() = default;
  explicit CountryUniverse(std::vector<UniverseEntry> entries);

  /// Sorted codes active in `year`.
  std::vector<CountryCode> active(int year) const;
  /// Sorted codes regardless of year.
  std::vector<CountryCode> all() const;

  bool contains(const CountryCode& code) const;
  bool contains(const CountryCode& code, int year) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<UniverseEntry>& entries() const { return entries_; }

  /// CSV with header `code[,first_year,last_year]`.
  static CountryUniverse from_csv(const std::string& path);

 private:
  std::vector<UniverseEntry> entries_;  // sorted by code
};

/// The 54 African economies; SSD is active from 2012 only.
CountryUniverse african_universe();

/// Synthetic universe of `n` pseudo-codes (AAA, AAB, ...), all active.
CountryUniverse synthetic_universe(std::size_t n);

}  // namespace tradenet

template <>
struct std::hash<tradenet::CountryCode> {
  std::size_t operator()(const tradenet::CountryCode& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};
