#include "aqad/core/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace aqad::csv {
namespace {

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": bad number \"" + field + "\"");
  }
  return v;
}

void require_fields(const std::vector<std::string>& fields, std::size_t n, std::size_t line) {
  if (fields.size() != n) {
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": expected " + std::to_string(n) +
                                      " fields, got " + std::to_string(fields.size()));
  }
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<ReadingRow> parse_readings(std::string_view text) {
  std::vector<ReadingRow> rows;
  for_each_record(text, "station_id,timestamp,attribute,value", [&](const auto& f, std::size_t line) {
    require_fields(f, 4, line);
    ReadingRow row;
    row.line = line;
    row.station_id = f[0];
    if (row.station_id.empty()) throw Error(Errc::ParseError, "line " + std::to_string(line) + ": empty station_id");
    try {
      row.time = parse_iso8601(f[1]);
      row.attribute = attribute_from_string(f[2]);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
    }
    row.value = parse_double(f[3], line);
    if (!std::isfinite(row.value)) {
      throw Error(Errc::NonFiniteValue, "line " + std::to_string(line) + ": non-finite value");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<Station> parse_stations(std::string_view text) {
  std::vector<Station> out;
  for_each_record(text, "station_id,name,latitude,longitude,kind", [&](const auto& f, std::size_t line) {
    require_fields(f, 5, line);
    Station s;
    s.id = f[0];
    s.name = f[1];
    s.latitude = parse_double(f[2], line);
    s.longitude = parse_double(f[3], line);
    if (f[4] == "roadside") {
      s.kind = StationKind::roadside;
    } else if (f[4] == "general") {
      s.kind = StationKind::general;
    } else {
      throw Error(Errc::ParseError, "line " + std::to_string(line) + ": kind must be roadside or general");
    }
    if (s.id.empty()) throw Error(Errc::ParseError, "line " + std::to_string(line) + ": empty station_id");
    out.push_back(std::move(s));
  });
  return out;
}

std::string write_readings(const std::vector<ReadingRow>& rows) {
  std::string out = "station_id,timestamp,attribute,value\n";
  for (const ReadingRow& r : rows) {
    out += quote(r.station_id) + ',' + format_iso8601(r.time) + ',' + std::string(to_string(r.attribute)) +
           ',' + format_value(r.value) + '\n';
  }
  return out;
}

std::string write_stations(const std::vector<Station>& stations) {
  std::string out = "station_id,name,latitude,longitude,kind\n";
  for (const Station& s : stations) {
    out += quote(s.id) + ',' + quote(s.name) + ',' + format_value(s.latitude) + ',' +
           format_value(s.longitude) + ',' + std::string(to_string(s.kind)) + '\n';
  }
  return out;
}

}  // namespace aqad::csv
