#pragma once

// Tabular output shared by the command-line tools: named columns plus
// metadata, written as CSV or JSON.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polytrope/error.hpp"

namespace polytrope {

using Cell = std::variant<double, bool, std::string>;

struct OutputRecord {
  static constexpr const char* kSchemaVersion = "1";

  struct Column {
    std::string name;
    std::vector<Cell> values;
  };

  std::string schema_version = kSchemaVersion;
  std::string command;
  std::vector<std::pair<std::string, Cell>> metadata;
  std::vector<Column> columns;

  void meta(std::string key, Cell value) { metadata.emplace_back(std::move(key), std::move(value)); }

  Column& add_column(std::string name) {
    columns.push_back({std::move(name), {}});
    return columns.back();
  }

  template <class T>
  Column& add_column(std::string name, const std::vector<T>& values) {
    Column& c = add_column(std::move(name));
    c.values.reserve(values.size());
    for (const auto& v : values) c.values.emplace_back(Cell(v));
    return c;
  }

  std::size_t rows() const {
    std::size_t r = 0;
    for (const auto& c : columns) r = std::max(r, c.values.size());
    return r;
  }

  const Column* find(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Locale-independent shortest-general formatting with `digits` significant digits.
inline std::string format_number(double v, int digits) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

/// Shortest text that reads back to the same double.
inline std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// `digits` = 0 selects the shortest round-trip form.
inline std::string format_cell(const Cell& c, int digits) {
  if (const auto* d = std::get_if<double>(&c)) return digits == 0 ? format_shortest(*d) : format_number(*d, digits);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return std::get<std::string>(c);
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace detail

/// Metadata as leading "# key=value" lines, then a header and one line per row.
inline void write_csv(std::ostream& os, const OutputRecord& rec, int digits = 12) {
  if (digits < 1 || digits > 17) throw DomainError("digits must be in [1, 17]");
  os << "# schema_version=" << rec.schema_version << '\n';
  os << "# command=" << rec.command << '\n';
  for (const auto& [k, v] : rec.metadata) os << "# " << k << '=' << format_cell(v, 0) << '\n';
  for (std::size_t i = 0; i < rec.columns.size(); ++i) {
    if (i) os << ',';
    os << detail::csv_escape(rec.columns[i].name);
  }
  os << '\n';
  const std::size_t rows = rec.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < rec.columns.size(); ++i) {
      if (i) os << ',';
      const auto& vals = rec.columns[i].values;
      if (r < vals.size()) os << detail::csv_escape(format_cell(vals[r], digits));
    }
    os << '\n';
  }
}

inline nlohmann::ordered_json cell_to_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* b = std::get_if<bool>(&c)) return *b;
  return std::get<std::string>(c);
}

inline nlohmann::ordered_json to_json(const OutputRecord& rec) {
  nlohmann::ordered_json j;
  j["schema_version"] = rec.schema_version;
  j["command"] = rec.command;
  auto& meta = j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rec.metadata) meta[k] = cell_to_json(v);
  auto& cols = j["columns"] = nlohmann::ordered_json::object();
  for (const auto& c : rec.columns) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : c.values) arr.push_back(cell_to_json(v));
    cols[c.name] = std::move(arr);
  }
  return j;
}

/// Non-finite numbers become null.
inline void write_json(std::ostream& os, const OutputRecord& rec) { os << to_json(rec).dump(2) << '\n'; }

inline Cell json_to_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return std::nan("");
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw DomainError("unexpected JSON value in output record");
}

inline OutputRecord parse_json_record(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  OutputRecord rec;
  rec.schema_version = j.at("schema_version").get<std::string>();
  rec.command = j.at("command").get<std::string>();
  for (const auto& [k, v] : j.at("metadata").items()) rec.meta(k, json_to_cell(v));
  for (const auto& [name, arr] : j.at("columns").items()) {
    auto& c = rec.add_column(name);
    for (const auto& v : arr) c.values.push_back(json_to_cell(v));
  }
  return rec;
}

}  // namespace polytrope
