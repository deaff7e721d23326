#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "aqad/detector/detector.hpp"

namespace aqad::detector {

/// One event as a JSON object:
///
///   {"id", "station_id", "attribute", "start", "end" (ISO-8601 UTC,
///    inclusive flagged steps), "score" (rounded to 6 decimals), "severity",
///    "source" ("detected" | "manual"), "tags": [...], "comment",
///    "experiment_id", "dataset_id", "provenance": {...} | null}
nlohmann::json event_to_json(const AnomalousEvent& ev);
AnomalousEvent event_from_json(const nlohmann::json& j);  // throws ParseError

// One JSON object per line, in the given order.
std::string write_events_jsonl(const std::vector<AnomalousEvent>& events);

double round6(double v);

nlohmann::json diagnostics_to_json(const ThresholdDiagnostics& d);
ThresholdDiagnostics diagnostics_from_json(const nlohmann::json& j);

}  // namespace aqad::detector
