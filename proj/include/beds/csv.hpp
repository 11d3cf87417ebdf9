#pragma once

// RFC 4180 style CSV: header first, LF line endings, reals printed with 17
// significant digits so that re-parsing recovers the exact double.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "beds/error.hpp"

namespace beds {

using CsvCell = std::variant<double, std::int64_t, std::string>;
using CsvRow = std::vector<CsvCell>;

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_cell(const CsvCell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

}  // namespace detail

inline std::string render_csv(const std::vector<std::string>& schema, const std::vector<CsvRow>& rows) {
  std::string out;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    if (k) out += ',';
    out += detail::csv_escape(schema[k]);
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size())
      fail(ErrorKind::dimension, "emit_csv: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                     " cells, schema has " + std::to_string(schema.size()));
    for (std::size_t k = 0; k < rows[r].size(); ++k) {
      if (k) out += ',';
      out += detail::csv_cell(rows[r][k]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw Error(ErrorKind::io, "failed writing " + path.string());
}

inline void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& schema,
                     const std::vector<CsvRow>& rows) {
  write_text_file(path, render_csv(schema, rows));
}

}  // namespace beds
