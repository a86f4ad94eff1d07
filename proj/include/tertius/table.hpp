#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace tertius {

// A missing value renders as "NA".
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
  [[nodiscard]] std::size_t column_index(const std::string& name) const;
};

using TableSet = std::map<std::string, Table>;

template <typename T>
Cell optional_cell(const std::optional<T>& value) {
  if (!value) return std::monostate{};
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<double>(*value);
  } else {
    return static_cast<std::int64_t>(*value);
  }
}

// Shortest round-trippable-enough rendering ("%.12g"); NaN and monostate as NA.
std::string format_cell(const Cell& cell);
std::optional<double> numeric_value(const Cell& cell);

std::string to_tsv(const Table& table);
void write_tsv(const Table& table, const std::filesystem::path& path);
Table read_tsv_table(const std::filesystem::path& path);

// Writes text atomically enough for our purposes: temp file then rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tertius
