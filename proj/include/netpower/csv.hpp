#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace netpower::csv {

/// 17 significant digits, enough to round-trip any double.
std::string format(double value);
/// Empty field for absent values.
std::string format(const std::optional<double>& value);
std::string format(std::uint64_t value);

/// Comma-separated, header row first, LF line endings, no quoting.
class Writer {
 public:
  Writer(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position; throws SchemaError when absent.
  std::size_t column(const std::string& name) const;
  bool has_columns(const std::vector<std::string>& names) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

/// Parses a field written by format(); empty yields nullopt.
std::optional<double> parse_optional(const std::string& field);

}  // namespace netpower::csv
