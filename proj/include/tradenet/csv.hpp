#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tradenet::csv {

/// Splits one line on commas. No quoting support: none of the formats
/// read by this project contain embedded commas. Fields are trimmed.
std::vector<std::string> split_line(std::string_view line);

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Like column() but throws ValidationError naming `source`.
  std::size_t require_column(std::string_view name, std::string_view source) const;
};

/// Reads a header + rows file. Blank lines are skipped. Throws
/// ValidationError when the file cannot be opened.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

/// Locale-independent rendering with 12 significant digits; NaN → "NA".
std::string format(double value);
std::string format(long long value);

/// Parses a real; throws ValidationError with the line number on failure.
double parse_double(std::string_view text, std::size_t line, std::string_view what);
long long parse_int(std::string_view text, std::size_t line, std::string_view what);

/// Accumulates rows in memory and writes them in one go.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header);

  Writer& add(std::vector<std::string> fields);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::string buffer_;
  std::size_t width_;
};

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace tradenet::csv
