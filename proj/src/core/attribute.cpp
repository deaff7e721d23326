#include "aqad/core/attribute.hpp"

#include <algorithm>

#include "aqad/core/error.hpp"

namespace aqad {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::DuplicateTimestamp: return "DuplicateTimestamp";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::GranularityMismatch: return "GranularityMismatch";
    case Errc::UnimputableColumn: return "UnimputableColumn";
    case Errc::EmptyFitRange: return "EmptyFitRange";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::TrainingDiverged: return "TrainingDiverged";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::DegenerateWindow: return "DegenerateWindow";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::IngestConflict: return "IngestConflict";
    case Errc::UnknownDataset: return "UnknownDataset";
    case Errc::UnknownExperiment: return "UnknownExperiment";
    case Errc::UnknownStation: return "UnknownStation";
    case Errc::NotFound: return "NotFound";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(Attribute a) noexcept {
  switch (a) {
    case Attribute::CO: return "CO";
    case Attribute::NO2: return "NO2";
    case Attribute::O3: return "O3";
    case Attribute::SO2: return "SO2";
    case Attribute::PM25: return "PM25";
    case Attribute::PM10: return "PM10";
    case Attribute::temperature: return "temperature";
    case Attribute::humidity: return "humidity";
    case Attribute::pressure: return "pressure";
    case Attribute::wind_speed: return "wind_speed";
  }
  return "";
}

std::optional<Attribute> parse_attribute(std::string_view name) noexcept {
  for (Attribute a : kAllAttributes) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

Attribute attribute_from_string(std::string_view name) {
  if (auto a = parse_attribute(name)) return *a;
  throw Error(Errc::UnknownAttribute,
              "unknown attribute \"" + std::string(name) + "\"; accepted: " +
                  accepted_attribute_names());
}

bool is_pollutant(Attribute a) noexcept {
  return std::find(kPollutants.begin(), kPollutants.end(), a) != kPollutants.end();
}

std::string accepted_attribute_names() {
  std::string out;
  for (Attribute a : kAllAttributes) {
    if (!out.empty()) out += ", ";
    out += to_string(a);
  }
  return out;
}

}  // namespace aqad
