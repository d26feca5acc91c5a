#pragma once

// Row-per-episode numeric table shared by the statistics and model stages,
// plus CSV helpers.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "podstyle/common.hpp"

namespace podstyle {

struct FeatureTable {
  std::vector<std::string> episode_ids;
  std::vector<std::string> columns;
  std::vector<std::string> groups;  // one per column
  std::vector<std::vector<double>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return columns.size(); }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw ConfigError("unknown column '" + std::string(name) + "'");
  }

  std::unordered_map<std::string, std::size_t> row_index() const {
    std::unordered_map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < episode_ids.size(); ++i) m.emplace(episode_ids[i], i);
    return m;
  }

  // Columns of `other` appended to matching rows (by episode id).
  void append_columns(const FeatureTable& other) {
    const auto idx = other.row_index();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto it = idx.find(episode_ids[r]);
      if (it == idx.end()) throw DataError("no row for episode '" + episode_ids[r] + "'");
      const auto& src = other.rows[it->second];
      rows[r].insert(rows[r].end(), src.begin(), src.end());
    }
    columns.insert(columns.end(), other.columns.begin(), other.columns.end());
    groups.insert(groups.end(), other.groups.begin(), other.groups.end());
  }

  FeatureTable select_rows(const std::vector<std::size_t>& which) const {
    FeatureTable t;
    t.columns = columns;
    t.groups = groups;
    for (std::size_t r : which) {
      t.episode_ids.push_back(episode_ids[r]);
      t.rows.push_back(rows[r]);
    }
    return t;
  }
};

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

// CSV with an "episode_id" first column; '#' lines are skipped. Column groups
// are not stored in CSV and come back as `default_group`.
inline FeatureTable read_table_csv(std::istream& in, const std::string& default_group = "") {
  FeatureTable t;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = parse_csv_line(line);
    if (!header) {
      if (cells.empty() || cells[0] != "episode_id") throw DataError("table: first column must be episode_id");
      t.columns.assign(cells.begin() + 1, cells.end());
      t.groups.assign(t.columns.size(), default_group);
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size() + 1) {
      throw DataError("table line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.columns.size() + 1) + " cells");
    }
    t.episode_ids.push_back(cells[0]);
    std::vector<double> row;
    row.reserve(t.columns.size());
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_double(cells[i]));
    t.rows.push_back(std::move(row));
  }
  if (!header) throw DataError("table: missing header");
  return t;
}

inline void write_table_csv(const FeatureTable& t, std::ostream& out) {
  out << "episode_id";
  for (const auto& c : t.columns) out << ',' << csv_field(c);
  out << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out << csv_field(t.episode_ids[r]);
    for (double v : t.rows[r]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace podstyle
