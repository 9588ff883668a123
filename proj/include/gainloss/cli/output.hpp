#ifndef GAINLOSS_CLI_OUTPUT_HPP
#define GAINLOSS_CLI_OUTPUT_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gainloss/errors.hpp"

namespace gainloss::cli {

/// Number, text or flag. Text in a numeric column is a sentinel such as
/// "diverged" or "unstable".
using Cell = std::variant<double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Ordered provenance entries (key, value) written ahead of the data.
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw Error("Table::add_row: wrong number of cells");
    rows.push_back(std::move(row));
  }
};

/// %.17g, enough digits to round-trip a double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string rfc3339_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return std::get<std::string>(c);
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// '#'-prefixed provenance lines, one header row, then data rows.
inline void write_csv(std::ostream& os, const Table& t, const std::string& timestamp) {
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
  os << "# timestamp: " << timestamp << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << detail::csv_escape(t.columns[i]);
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << detail::csv_escape(cell_text(row[i]));
    }
    os << '\n';
  }
}

/// {"metadata": {...}, "rows": [{column: value, ...}, ...]}. Doubles are
/// emitted with 17 significant digits.
inline void write_json(std::ostream& os, const Table& t, const std::string& timestamp) {
  // Raw rendering keeps the %.17g digits instead of the shortest form.
  std::string s = "{\n  \"metadata\": {";
  bool first = true;
  auto key = [](const std::string& k) { return nlohmann::json(k).dump(); };
  for (const auto& [k, v] : t.metadata) {
    s += (first ? "\n    " : ",\n    ") + key(k) + ": " + nlohmann::json(v).dump();
    first = false;
  }
  s += (first ? "\n    " : ",\n    ") + key("timestamp") + ": " + nlohmann::json(timestamp).dump();
  s += "\n  },\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s += r ? ",\n    {" : "\n    {";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const Cell& c = t.rows[r][i];
      std::string v;
      if (const auto* d = std::get_if<double>(&c)) {
        v = std::isfinite(*d) ? format_double(*d) : nlohmann::json(format_double(*d)).dump();
      } else if (const auto* b = std::get_if<bool>(&c)) {
        v = *b ? "true" : "false";
      } else {
        v = nlohmann::json(std::get<std::string>(c)).dump();
      }
      s += (i ? ", " : "") + key(t.columns[i]) + ": " + v;
    }
    s += "}";
  }
  s += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  os << s;
}

}  // namespace gainloss::cli

#endif  // GAINLOSS_CLI_OUTPUT_HPP
