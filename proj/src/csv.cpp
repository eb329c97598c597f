#include "netpower/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "netpower/errors.hpp"

namespace netpower::csv {

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format(const std::optional<double>& value) { return value ? format(*value) : std::string(); }

std::string format(std::uint64_t value) { return std::to_string(value); }

Writer::Writer(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  row(header);
}

void Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("csv row width does not match header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw SchemaError("missing column '" + name + "'");
}

bool Table::has_columns(const std::vector<std::string>& names) const {
  for (const auto& name : names) {
    bool found = false;
    for (const auto& h : header) found = found || h == name;
    if (!found) return false;
  }
  return true;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty csv input");
  table.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size())
      throw SchemaError("csv line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  return read(in);
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw SchemaError("malformed number '" + field + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw SchemaError("malformed number '" + field + "'");
  } catch (const std::out_of_range&) {
    throw SchemaError("number out of range '" + field + "'");
  }
}

}  // namespace netpower::csv
