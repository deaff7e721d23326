#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aqad/core/series.hpp"

namespace aqad::csv {

// Splits one CSV record; double-quoted fields may contain commas and "".
std::vector<std::string> split_line(std::string_view line);
std::string quote(std::string_view field);

struct ReadingRow {
  std::string station_id;
  Attribute attribute = Attribute::PM25;
  Instant time;
  double value = 0.0;
  std::size_t line = 0;  // 1-based, header is line 1
};

// Header: station_id,timestamp,attribute,value. Malformed rows throw
// ParseError naming the line; unknown attributes throw UnknownAttribute.
std::vector<ReadingRow> parse_readings(std::string_view text);

// Header: station_id,name,latitude,longitude,kind.
std::vector<Station> parse_stations(std::string_view text);

std::string write_readings(const std::vector<ReadingRow>& rows);
std::string write_stations(const std::vector<Station>& stations);

// Calls fn(fields, line_number) for every non-empty data line after checking the header.
template <typename Fn>
void for_each_record(std::string_view text, std::string_view expected_header, Fn&& fn);

std::string format_value(double v);

}  // namespace aqad::csv

#include <algorithm>

#include "aqad/core/error.hpp"

namespace aqad::csv {

template <typename Fn>
void for_each_record(std::string_view text, std::string_view expected_header, Fn&& fn) {
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected_header) {
        throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected header \"" +
                                          std::string(expected_header) + "\"");
      }
      header_seen = true;
      continue;
    }
    fn(split_line(line), line_no);
  }
  if (!header_seen) throw Error(Errc::ParseError, "missing header \"" + std::string(expected_header) + "\"");
}

}  // namespace aqad::csv
