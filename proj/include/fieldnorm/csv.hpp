#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fieldnorm/errors.hpp"

namespace fieldnorm::csv {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

inline std::string format_fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

// Half-away-from-zero rounding to two decimals, the convention used whenever
// scores are compared or reported at display precision.
inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline double parse_double(std::string_view token, std::size_t line) {
  double v{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view token, std::size_t line) {
  std::int64_t v{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, "expected an integer, got '" + std::string(token) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Reads and checks the header, then calls fn(line_number, fields) for every
// data row. Returns the number of data rows. Tolerates CRLF and blank lines.
template <typename Fn>
inline std::size_t for_each_row(std::istream& in, std::string_view expected_header, Fn&& fn) {
  const std::size_t n_cols = split(expected_header).size();
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty input, expected header '" + std::string(expected_header) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw ParseError(1, "expected header '" + std::string(expected_header) + "', got '" + line + "'");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line);
    if (fields.size() != n_cols)
      throw ParseError(line_no, "expected " + std::to_string(n_cols) + " fields, got " +
                                    std::to_string(fields.size()));
    fn(line_no, fields);
    ++rows;
  }
  return rows;
}

}  // namespace fieldnorm::csv
