#include "aqad/core/series.hpp"

#include <algorithm>
#include <cmath>

#include "aqad/core/error.hpp"

namespace aqad {

RawSeries::RawSeries(std::string station_id, Attribute attribute, std::vector<Reading> points)
    : station_id_(std::move(station_id)), attribute_(attribute) {
  points_.reserve(points.size());
  for (const Reading& r : points) push_back(r);
}

void RawSeries::push_back(Reading r) {
  if (!std::isfinite(r.value)) {
    throw Error(Errc::NonFiniteValue, "non-finite value at " + format_iso8601(r.time));
  }
  if (!points_.empty()) {
    if (r.time == points_.back().time) {
      throw Error(Errc::DuplicateTimestamp, "duplicate timestamp " + format_iso8601(r.time));
    }
    if (r.time < points_.back().time) {
      throw Error(Errc::InvalidArgument, "timestamps must be increasing at " + format_iso8601(r.time));
    }
  }
  points_.push_back(r);
}

std::size_t RegularSeries::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

WindowedDataset::WindowedDataset(FeatureRows features, Eigen::Index length, Instant start,
                                 Duration interval, std::vector<bool> trainable)
    : features_(std::move(features)),
      length_(length),
      start_(start),
      interval_(interval),
      trainable_(std::move(trainable)) {
  if (trainable_.empty()) trainable_.assign(static_cast<std::size_t>(size()), true);
  if (static_cast<Eigen::Index>(trainable_.size()) != size()) {
    throw Error(Errc::ShapeMismatch, "trainable mask length does not match window count");
  }
}

WindowedDataset WindowedDataset::head(Eigen::Index count) const {
  count = std::clamp<Eigen::Index>(count, 0, size());
  std::vector<bool> mask(trainable_.begin(), trainable_.begin() + count);
  return WindowedDataset(features_.topRows(count + length_), length_, start_, interval_,
                         count == 0 ? std::vector<bool>{} : std::move(mask));
}

std::string_view to_string(StationKind k) noexcept {
  return k == StationKind::roadside ? "roadside" : "general";
}

const Station* Dataset::find_station(const std::string& station_id) const {
  auto it = std::find_if(stations.begin(), stations.end(),
                         [&](const Station& s) { return s.id == station_id; });
  return it == stations.end() ? nullptr : &*it;
}

const RawSeries* Dataset::find_series(const std::string& station_id, Attribute a) const {
  auto it = readings.find({station_id, a});
  return it == readings.end() ? nullptr : &it->second;
}

std::size_t Dataset::reading_count() const {
  std::size_t n = 0;
  for (const auto& [key, series] : readings) n += series.size();
  return n;
}

}  // namespace aqad
