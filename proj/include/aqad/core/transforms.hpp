#pragma once

#include <array>
#include <cstddef>

#include "aqad/core/series.hpp"

namespace aqad {

enum class Aggregation { mean, max, last };

std::string_view to_string(Aggregation a) noexcept;
Aggregation aggregation_from_string(std::string_view name);

/// Buckets raw readings onto an epoch-aligned grid. Bucket b covers
/// [start + b*interval, start + (b+1)*interval); buckets with no reading are
/// missing. Throws EmptySeries on an empty input.
RegularSeries resample(const RawSeries& raw, Duration interval, Aggregation agg = Aggregation::mean);

/// Pollutant plus four weather series on the pollutant's time base. Weather
/// entries outside their own range stay missing. Throws GranularityMismatch
/// when intervals (or grid phases) differ.
FeatureMatrix join_weather(const RegularSeries& pollutant,
                           const std::array<RegularSeries, 4>& weather);

/// Linear interpolation across interior gaps, nearest-value fill at the
/// edges. Rows inside a gap run longer than `max_gap` steps in any column are
/// flagged excluded. Present values are never touched.
FeatureMatrix impute(const FeatureMatrix& m, std::size_t max_gap = 24);

struct RowRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive
  Eigen::Index size() const { return end > begin ? end - begin : 0; }
};

/// Population z-score statistics over rows [range.begin, range.end).
NormStats fit_norm(const FeatureMatrix& m, RowRange range);
FeatureMatrix apply_norm(const FeatureMatrix& m, const NormStats& stats);
FeatureMatrix invert_norm(const FeatureMatrix& m, const NormStats& stats);

/// Throws SeriesTooShort unless rows() > length, InvalidArgument on missing
/// entries.
WindowedDataset make_windows(const FeatureMatrix& m, Eigen::Index length);

}  // namespace aqad
