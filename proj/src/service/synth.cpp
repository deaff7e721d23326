#include "aqad/service/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "aqad/core/csv.hpp"
#include "aqad/core/error.hpp"

namespace aqad::service {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double bump(const PlantedAnomaly& a, std::int64_t step) {
  const std::int64_t j = step - a.start_step;
  if (j < 0 || j >= a.duration) return 0.0;
  const double d = static_cast<double>(a.duration);
  switch (a.kind) {
    case AnomalyKind::spike: return a.magnitude * std::sin(std::numbers::pi * (static_cast<double>(j) + 0.5) / d);
    case AnomalyKind::level_shift: return a.magnitude;
    case AnomalyKind::trend_break: {
      // Drift away over the first two thirds, recover over the rest.
      const double peak = std::ceil(2.0 * d / 3.0);
      const double x = static_cast<double>(j) + 1.0;
      return x <= peak ? a.magnitude * x / peak : a.magnitude * (d + 1.0 - x) / (d + 1.0 - peak);
    }
  }
  return 0.0;
}

std::vector<PlantedAnomaly> place_random(const SynthSpec& spec, std::int64_t steps, std::mt19937_64& rng) {
  std::vector<PlantedAnomaly> out;
  if (spec.random_anomalies <= 0) return out;
  const std::int64_t per_day = 86400 / spec.interval_seconds;
  const std::int64_t warmup = std::min<std::int64_t>(2 * per_day, steps / 10);
  const std::int64_t slot = (steps - warmup) / spec.random_anomalies;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < spec.random_anomalies; ++i) {
    PlantedAnomaly a;
    a.kind = spec.random_kinds[static_cast<std::size_t>(i) % spec.random_kinds.size()];
    const double frac = unit(rng);
    const auto span = static_cast<double>(spec.random_duration_max - spec.random_duration_min + 1);
    a.duration = spec.random_duration_min + std::min<std::int64_t>(static_cast<std::int64_t>(frac * span), spec.random_duration_max - spec.random_duration_min);
    a.duration = std::min(a.duration, std::max<std::int64_t>(1, slot / 2));
    const std::int64_t room = std::max<std::int64_t>(1, slot - a.duration);
    a.start_step = warmup + i * slot + static_cast<std::int64_t>(unit(rng) * static_cast<double>(room));
    const double mag = spec.random_magnitude_min + (spec.random_magnitude_max - spec.random_magnitude_min) * unit(rng);
    const double sign = (a.kind != AnomalyKind::spike && unit(rng) < 0.5) ? -1.0 : 1.0;
    a.magnitude = sign * mag * spec.daily_amplitude;
    out.push_back(a);
  }
  return out;
}

}  // namespace

std::string_view to_string(AnomalyKind k) noexcept {
  switch (k) {
    case AnomalyKind::spike: return "spike";
    case AnomalyKind::level_shift: return "level_shift";
    case AnomalyKind::trend_break: return "trend_break";
  }
  return "";
}

AnomalyKind anomaly_kind_from_string(std::string_view name) {
  for (AnomalyKind k : {AnomalyKind::spike, AnomalyKind::level_shift, AnomalyKind::trend_break}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown anomaly kind \"" + std::string(name) + "\"");
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.station_id = j.value("station_id", s.station_id);
    s.station_name = j.value("station_name", s.station_name);
    if (j.contains("pollutant")) s.pollutant = attribute_from_string(j.at("pollutant").get<std::string>());
    if (!is_pollutant(s.pollutant)) throw Error(Errc::InvalidArgument, "pollutant must be a pollutant attribute");
    if (j.contains("start")) s.start = parse_iso8601(j.at("start").get<std::string>());
    s.days = j.value("days", s.days);
    s.interval_seconds = j.value("interval", s.interval_seconds);
    s.base_level = j.value("base_level", s.base_level);
    s.daily_amplitude = j.value("daily_amplitude", s.daily_amplitude);
    s.weekly_factor = j.value("weekly_factor", s.weekly_factor);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.wind_coupling = j.value("wind_coupling", s.wind_coupling);
    s.random_anomalies = j.value("random_anomalies", s.random_anomalies);
    s.random_magnitude_min = j.value("random_magnitude_min", s.random_magnitude_min);
    s.random_magnitude_max = j.value("random_magnitude_max", s.random_magnitude_max);
    s.random_duration_min = j.value("random_duration_min", s.random_duration_min);
    s.random_duration_max = j.value("random_duration_max", s.random_duration_max);
    s.seed = j.value("seed", s.seed);
    if (j.contains("random_kinds")) {
      s.random_kinds.clear();
      for (const auto& k : j.at("random_kinds")) s.random_kinds.push_back(anomaly_kind_from_string(k.get<std::string>()));
    }
    for (const auto& a : j.value("anomalies", nlohmann::json::array())) {
      s.anomalies.push_back({anomaly_kind_from_string(a.at("kind").get<std::string>()),
                             a.at("start_step").get<std::int64_t>(), a.at("duration").get<std::int64_t>(),
                             a.at("magnitude").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("synth spec: ") + e.what());
  }
  if (s.days < 1 || s.interval_seconds < 1 || 86400 % s.interval_seconds != 0) {
    throw Error(Errc::InvalidArgument, "synth spec needs days >= 1 and an interval dividing one day");
  }
  if (s.noise_sigma < 0 || s.random_anomalies < 0) throw Error(Errc::InvalidArgument, "negative noise or count");
  if (s.random_anomalies > 0 && s.random_kinds.empty()) throw Error(Errc::InvalidArgument, "random_kinds is empty");
  if (s.random_duration_min < 1 || s.random_duration_max < s.random_duration_min) {
    throw Error(Errc::InvalidArgument, "random durations need 1 <= min <= max");
  }
  for (const auto& a : s.anomalies) {
    if (a.duration < 1 || a.start_step < 0) throw Error(Errc::InvalidArgument, "anomaly needs duration >= 1, start >= 0");
  }
  return s;
}

SynthOutput synth_generate(const SynthSpec& spec) {
  const std::int64_t steps = spec.days * 86400 / spec.interval_seconds;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthOutput out;
  out.anomalies = spec.anomalies;
  auto random = place_random(spec, steps, rng);
  out.anomalies.insert(out.anomalies.end(), random.begin(), random.end());
  std::stable_sort(out.anomalies.begin(), out.anomalies.end(),
                   [](const auto& a, const auto& b) { return a.start_step < b.start_step; });

  std::vector<csv::ReadingRow> rows;
  rows.reserve(static_cast<std::size_t>(steps) * 5);
  const double sigma = spec.noise_sigma;
  for (std::int64_t i = 0; i < steps; ++i) {
    const Instant t = spec.start + Duration{spec.interval_seconds * i};
    const double hours = static_cast<double>(i * spec.interval_seconds) / 3600.0;
    const double day_phase = kTwoPi * hours / 24.0;
    const double temperature = 22.0 + 4.0 * std::sin(day_phase - 2.4) + 0.2 * sigma * gauss(rng);
    const double humidity = 70.0 - 8.0 * std::sin(day_phase - 2.4) + 0.5 * sigma * gauss(rng);
    const double pressure = 1012.0 + 4.0 * std::sin(kTwoPi * hours / 131.0) + 0.1 * sigma * gauss(rng);
    const double wind = 3.0 + 1.2 * std::sin(kTwoPi * hours / 83.0) + 0.1 * sigma * gauss(rng);
    const double weekly = 1.0 + spec.weekly_factor * std::sin(kTwoPi * hours / 168.0);
    double value = (spec.base_level + spec.daily_amplitude * std::sin(day_phase - 2.1)) * weekly -
                   spec.wind_coupling * (wind - 3.0) + sigma * gauss(rng);
    for (const auto& a : out.anomalies) value += bump(a, i);

    rows.push_back({spec.station_id, spec.pollutant, t, value, 0});
    rows.push_back({spec.station_id, Attribute::temperature, t, temperature, 0});
    rows.push_back({spec.station_id, Attribute::humidity, t, humidity, 0});
    rows.push_back({spec.station_id, Attribute::pressure, t, pressure, 0});
    rows.push_back({spec.station_id, Attribute::wind_speed, t, wind, 0});
  }
  out.readings_csv = csv::write_readings(rows);
  out.stations_csv = csv::write_stations({{spec.station_id, spec.station_name, 22.28, 114.16, StationKind::general}});

  for (const auto& a : out.anomalies) {
    const Instant begin = spec.start + Duration{spec.interval_seconds * a.start_step};
    out.labels.push_back({spec.station_id, spec.pollutant, {begin, begin + Duration{spec.interval_seconds * a.duration}}});
  }
  out.labels_csv = evaluation::write_labels(out.labels);
  return out;
}

}  // namespace aqad::service
