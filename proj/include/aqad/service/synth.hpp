#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "aqad/core/series.hpp"
#include "aqad/evaluation/evaluation.hpp"

namespace aqad::service {

enum class AnomalyKind { spike, level_shift, trend_break };

std::string_view to_string(AnomalyKind k) noexcept;
AnomalyKind anomaly_kind_from_string(std::string_view name);

/// Added to the pollutant over steps [start_step, start_step + duration):
/// spike is a half-sine bump, level_shift a constant offset, trend_break a
/// linear drift that peaks two thirds in and ramps back by the end.
struct PlantedAnomaly {
  AnomalyKind kind = AnomalyKind::spike;
  std::int64_t start_step = 0;
  std::int64_t duration = 1;
  double magnitude = 0.0;
};

/// Hourly-style sensor data for one station: pollutant with a daily cycle,
/// weekly modulation and wind coupling, plus four weather series.
struct SynthSpec {
  std::string station_id = "SYN01";
  std::string station_name = "Synthetic station";
  Attribute pollutant = Attribute::PM25;
  Instant start = from_epoch_seconds(1704067200);  // 2024-01-01T00:00:00Z
  std::int64_t days = 120;
  std::int64_t interval_seconds = 3600;
  double base_level = 40.0;
  double daily_amplitude = 12.0;
  double weekly_factor = 0.2;
  double noise_sigma = 1.0;
  double wind_coupling = 3.0;
  std::vector<PlantedAnomaly> anomalies;
  // Extra anomalies placed one per equal slot of the timeline, cycling
  // through random_kinds.
  int random_anomalies = 0;
  std::vector<AnomalyKind> random_kinds = {AnomalyKind::spike, AnomalyKind::level_shift, AnomalyKind::trend_break};
  double random_magnitude_min = 1.5;  // multiples of daily_amplitude
  double random_magnitude_max = 2.5;
  std::int64_t random_duration_min = 4;  // steps
  std::int64_t random_duration_max = 12;
  std::uint64_t seed = 1;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);  // throws InvalidArgument

struct SynthOutput {
  std::string readings_csv;
  std::string stations_csv;
  std::string labels_csv;
  std::vector<evaluation::LabelRow> labels;
  std::vector<PlantedAnomaly> anomalies;  // explicit + random, by start
};

/// Deterministic for a given spec: same seed gives byte-identical CSVs.
SynthOutput synth_generate(const SynthSpec& spec);

}  // namespace aqad::service
