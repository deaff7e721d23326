#include "aqad/service/ingest.hpp"

#include <algorithm>
#include <map>

#include "aqad/core/csv.hpp"
#include "aqad/core/error.hpp"
#include "aqad/core/hash.hpp"

namespace aqad::service {

Dataset parse_dataset(std::string_view readings_csv, std::string_view stations_csv) {
  Dataset ds;
  ds.stations = csv::parse_stations(stations_csv);
  std::sort(ds.stations.begin(), ds.stations.end(), [](const Station& a, const Station& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ds.stations.size(); ++i) {
    if (ds.stations[i].id == ds.stations[i - 1].id) {
      throw Error(Errc::IngestConflict, "station \"" + ds.stations[i].id + "\" declared twice");
    }
  }

  std::vector<csv::ReadingRow> rows = csv::parse_readings(readings_csv);
  std::stable_sort(rows.begin(), rows.end(), [](const csv::ReadingRow& a, const csv::ReadingRow& b) {
    return std::tie(a.station_id, a.attribute, a.time) < std::tie(b.station_id, b.attribute, b.time);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const csv::ReadingRow& r = rows[i];
    if (!ds.find_station(r.station_id)) {
      throw Error(Errc::UnknownStation,
                  "line " + std::to_string(r.line) + ": station \"" + r.station_id + "\" is not in the stations file");
    }
    if (i > 0 && rows[i - 1].station_id == r.station_id && rows[i - 1].attribute == r.attribute &&
        rows[i - 1].time == r.time) {
      throw Error(Errc::IngestConflict, "line " + std::to_string(r.line) + ": duplicate timestamp " +
                                            format_iso8601(r.time) + " for " + r.station_id + "/" +
                                            std::string(to_string(r.attribute)) + " (first seen on line " +
                                            std::to_string(rows[i - 1].line) + ")");
    }
    auto [it, inserted] = ds.readings.try_emplace({r.station_id, r.attribute}, r.station_id, r.attribute);
    it->second.push_back({r.time, r.value});
  }

  // Canonical form: sorted stations and readings re-serialized.
  for (auto& r : rows) r.line = 0;
  ds.id = "ds-" + sha256_hex(csv::write_stations(ds.stations) + csv::write_readings(rows)).substr(0, 16);
  return ds;
}

}  // namespace aqad::service
