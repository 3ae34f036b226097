#pragma once
// Plain-text tabular reports. Every table the toolkit emits uses one format:
// a `# table <name>` line, `# meta <key> <value>` lines carrying run metadata
// (config hash, parameters), a `# columns ...` schema line, then one
// whitespace-separated row per line. The loader is strict so that files
// round-trip byte-for-byte through save/load.

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltspin/textio.hpp"

namespace ltspin {

namespace detail {

inline void require_token(const std::string& s, const char* what) {
  if (s.empty()) throw std::invalid_argument(std::string("table: empty ") + what);
  for (const char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw std::invalid_argument(std::string("table: whitespace in ") + what + ": '" + s + "'");
}

/// Meta values may contain single internal spaces (descriptors do); anything
/// the loader's token re-join would not reproduce byte-exactly is rejected.
inline void require_meta_value(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("table: empty meta value");
  if (s.front() == ' ' || s.back() == ' ')
    throw std::invalid_argument("table: meta value has leading/trailing space: '" + s + "'");
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\t' || c == '\n' || c == '\r')
      throw std::invalid_argument("table: control whitespace in meta value: '" + s + "'");
    if (c == ' ' && s[i - 1] == ' ')
      throw std::invalid_argument("table: double space in meta value: '" + s + "'");
  }
}

}  // namespace detail

struct Table {
  std::string name;
  std::vector<std::pair<std::string, std::string>> meta;  // insertion order
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  Table() = default;
  Table(std::string table_name, std::vector<std::string> column_names)
      : name(std::move(table_name)), columns(std::move(column_names)) {}

  /// Appends (or overwrites, preserving position) a metadata entry.
  void set_meta(const std::string& key, const std::string& value) {
    for (auto& kv : meta)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    meta.emplace_back(key, value);
  }

  const std::string* find_meta(const std::string& key) const {
    for (const auto& kv : meta)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
      throw std::invalid_argument("table '" + name + "': row has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(columns.size()));
    rows.push_back(std::move(cells));
  }

  void save(std::ostream& out) const {
    detail::require_token(name, "table name");
    out << "# table " << name << "\n";
    for (const auto& [key, value] : meta) {
      detail::require_token(key, "meta key");
      detail::require_meta_value(value);
      out << "# meta " << key << " " << value << "\n";
    }
    if (columns.empty()) throw std::invalid_argument("table '" + name + "': no columns");
    out << "# columns";
    for (const std::string& c : columns) {
      detail::require_token(c, "column name");
      out << " " << c;
    }
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        detail::require_token(row[i], "cell");
        out << (i == 0 ? "" : " ") << row[i];
      }
      out << "\n";
    }
  }

  std::string to_string() const {
    std::ostringstream out;
    save(out);
    return out.str();
  }

  static Table load(std::istream& in) {
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("table: empty input");
    {
      const std::vector<std::string> parts = split_ws_str(line);
      if (parts.size() != 3 || parts[0] != "#" || parts[1] != "table")
        throw std::runtime_error("table: bad first line: '" + line + "'");
      table.name = parts[2];
    }
    bool have_columns = false;
    while (std::getline(in, line)) {
      const std::vector<std::string> parts = split_ws_str(line);
      if (parts.empty()) throw std::runtime_error("table: blank line");
      if (parts[0] == "#") {
        if (have_columns)
          throw std::runtime_error("table: header line after columns: '" + line + "'");
        if (parts.size() >= 4 && parts[1] == "meta") {
          // The value is everything after the key, joined by single spaces
          // (the writer only ever emits single-token values, but be tolerant
          // of a value that was written with internal spaces by hand).
          std::string value = parts[3];
          for (std::size_t i = 4; i < parts.size(); ++i) value += " " + parts[i];
          table.meta.emplace_back(parts[2], value);
        } else if (parts.size() >= 3 && parts[1] == "columns") {
          table.columns.assign(parts.begin() + 2, parts.end());
          have_columns = true;
        } else {
          throw std::runtime_error("table: bad header line: '" + line + "'");
        }
        continue;
      }
      if (!have_columns)
        throw std::runtime_error("table: data before columns line: '" + line + "'");
      if (parts.size() != table.columns.size())
        throw std::runtime_error("table '" + table.name + "': row has " +
                                 std::to_string(parts.size()) + " cells, expected " +
                                 std::to_string(table.columns.size()));
      table.rows.push_back(parts);
    }
    if (!have_columns) throw std::runtime_error("table: missing columns line");
    return table;
  }

  static Table from_string(const std::string& text) {
    std::istringstream in(text);
    return load(in);
  }
};

inline void save_table(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  table.save(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Table load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return Table::load(in);
}

}  // namespace ltspin
