#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "aqad/core/series.hpp"
#include "aqad/pipeline/runner.hpp"

namespace aqad::service {

struct SeriesView {
  std::vector<Instant> times;
  std::vector<std::optional<double>> values;

  std::size_t size() const { return times.size(); }
};

/// Keeps at most `resolution` points. The input is cut into resolution / 2
/// equal index buckets and each bucket contributes its minimum and maximum
/// in time order, so extremes survive; a bucket with no values contributes
/// one empty point. resolution 0, or one at least the input length, passes
/// the input through.
SeriesView downsample(const SeriesView& in, std::size_t resolution);

/// Raw readings of one station attribute within [from, to], downsampled.
/// Throws UnknownStation, NotFound (attribute absent) or OutOfRange when the
/// requested span misses the data.
SeriesView series(const Dataset& dataset, const std::string& station_id, Attribute attribute,
                  std::optional<Instant> from, std::optional<Instant> to, std::size_t resolution);

nlohmann::json series_to_json(const SeriesView& s);

/// Aligned per-step arrays (times, y, y_hat, e, e_s) plus window thresholds
/// and events for one model of an experiment. Throws NotFound.
nlohmann::json signals(const pipeline::ExperimentResult& result, const std::string& station_id, Attribute pollutant);

enum class PeriodLevel { year, month, day };

std::string_view to_string(PeriodLevel level) noexcept;
PeriodLevel period_level_from_string(std::string_view name);

struct PeriodBucket {
  std::string label;  // "2024", "2024-03" or "2024-03-05"
  Instant start{};
  std::vector<std::optional<double>> values;  // 12 months, N days or 24 hours
  int week_row = 0;  // day level: Monday-first calendar row within the month
  int weekday = 0;   // day level: 0 = Monday
};

struct PeriodAggregate {
  PeriodLevel level = PeriodLevel::year;
  std::string anchor;
  std::vector<PeriodBucket> buckets;
};

/// Glyph data from an hourly mean series. year: one bucket per year of
/// monthly means (anchor ignored). month: anchor "YYYY", one bucket per
/// month of daily means. day: anchor "YYYY-MM", one bucket per day of
/// hourly means with its calendar position. Each value is the mean of the
/// series entries it contains; none present gives an absent value. Periods
/// outside the data give no buckets. Throws InvalidArgument on a bad anchor.
PeriodAggregate period_aggregate(const RegularSeries& hourly, PeriodLevel level, const std::string& anchor);

nlohmann::json aggregate_to_json(const PeriodAggregate& a);

}  // namespace aqad::service
