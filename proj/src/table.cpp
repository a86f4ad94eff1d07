#include "tertius/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tertius/common.hpp"

namespace tertius {

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column named " + name);
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NA"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      if (std::isnan(v)) return "NA";
      if (v == 0.0) return "0";  // folds -0
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", v);
      return buf;
    }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::optional<double> numeric_value(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return std::nullopt;
    return *d;
  }
  return std::nullopt;
}

std::string to_tsv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += '\t';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += '\t';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_tsv(const Table& table, const std::filesystem::path& path) {
  write_text_file(path, to_tsv(table));
}

Table read_tsv_table(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  Table table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto tab = s.find('\t', start);
      parts.push_back(s.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return parts;
  };
  if (!std::getline(in, line)) return table;
  table.columns = split(line);
  while (std::getline(in, line)) {
    std::vector<Cell> row;
    for (auto& field : split(line)) {
      if (field == "NA") {
        row.emplace_back(std::monostate{});
        continue;
      }
      char* end = nullptr;
      const long long iv = std::strtoll(field.c_str(), &end, 10);
      if (!field.empty() && *end == '\0') {
        row.emplace_back(static_cast<std::int64_t>(iv));
        continue;
      }
      const double dv = std::strtod(field.c_str(), &end);
      if (!field.empty() && *end == '\0') {
        row.emplace_back(dv);
        continue;
      }
      row.emplace_back(std::move(field));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tertius
