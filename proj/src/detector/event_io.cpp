#include "aqad/detector/event_io.hpp"

#include <cmath>

#include "aqad/core/error.hpp"

namespace aqad::detector {

using nlohmann::json;

double round6(double v) { return std::round(v * 1e6) / 1e6; }

json event_to_json(const AnomalousEvent& ev) {
  json j;
  j["id"] = ev.id;
  j["station_id"] = ev.station_id;
  j["attribute"] = std::string(to_string(ev.attribute));
  j["start"] = format_iso8601(ev.start);
  j["end"] = format_iso8601(ev.end);
  j["score"] = round6(ev.score);
  j["severity"] = ev.severity;
  j["source"] = std::string(to_string(ev.source));
  j["tags"] = ev.tags;
  j["comment"] = ev.comment;
  j["experiment_id"] = ev.experiment_id;
  j["dataset_id"] = ev.dataset_id;
  if (ev.provenance) {
    const Provenance& p = *ev.provenance;
    j["provenance"] = {{"theta", p.theta},
                       {"window_begin", p.window_begin},
                       {"window_end", p.window_end},
                       {"first_index", p.first_index},
                       {"last_index", p.last_index}};
  } else {
    j["provenance"] = nullptr;
  }
  return j;
}

AnomalousEvent event_from_json(const json& j) {
  try {
    AnomalousEvent ev;
    ev.id = j.value("id", "");
    ev.station_id = j.at("station_id").get<std::string>();
    ev.attribute = attribute_from_string(j.at("attribute").get<std::string>());
    ev.start = parse_iso8601(j.at("start").get<std::string>());
    ev.end = parse_iso8601(j.at("end").get<std::string>());
    ev.score = j.value("score", 0.0);
    ev.severity = j.value("severity", 0);
    ev.source = event_source_from_string(j.value("source", "manual"));
    ev.tags = j.value("tags", std::vector<std::string>{});
    ev.comment = j.value("comment", "");
    ev.experiment_id = j.value("experiment_id", "");
    ev.dataset_id = j.value("dataset_id", "");
    if (j.contains("provenance") && !j.at("provenance").is_null()) {
      const json& p = j.at("provenance");
      ev.provenance = Provenance{p.at("theta").get<double>(), p.at("window_begin").get<Eigen::Index>(),
                                 p.at("window_end").get<Eigen::Index>(), p.at("first_index").get<Eigen::Index>(),
                                 p.at("last_index").get<Eigen::Index>()};
    }
    return ev;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("event: ") + e.what());
  }
}

std::string write_events_jsonl(const std::vector<AnomalousEvent>& events) {
  std::string out;
  for (const AnomalousEvent& ev : events) {
    out += event_to_json(ev).dump();
    out += '\n';
  }
  return out;
}

json diagnostics_to_json(const ThresholdDiagnostics& d) {
  return {{"k", d.k},
          {"theta", d.theta},
          {"mean", d.mean},
          {"stddev", d.stddev},
          {"delta_mean", d.delta_mean},
          {"delta_std", d.delta_std},
          {"above_count", d.above_count},
          {"seq_count", d.seq_count},
          {"objective", d.objective}};
}

ThresholdDiagnostics diagnostics_from_json(const json& j) {
  ThresholdDiagnostics d;
  d.k = j.at("k").get<double>();
  d.theta = j.at("theta").get<double>();
  d.mean = j.at("mean").get<double>();
  d.stddev = j.at("stddev").get<double>();
  d.delta_mean = j.at("delta_mean").get<double>();
  d.delta_std = j.at("delta_std").get<double>();
  d.above_count = j.at("above_count").get<Eigen::Index>();
  d.seq_count = j.at("seq_count").get<Eigen::Index>();
  d.objective = j.at("objective").get<double>();
  return d;
}

}  // namespace aqad::detector
