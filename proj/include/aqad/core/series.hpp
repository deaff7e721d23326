#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqad/core/attribute.hpp"
#include "aqad/core/time.hpp"

namespace aqad {

inline constexpr Eigen::Index kFeatureDim = 5;
inline constexpr Eigen::Index kPollutantColumn = 4;

using FeatureRows = Eigen::Matrix<double, Eigen::Dynamic, kFeatureDim>;
using PresenceRows = Eigen::Matrix<bool, Eigen::Dynamic, kFeatureDim>;
using FeatureRow = Eigen::Matrix<double, 1, kFeatureDim>;

struct Reading {
  Instant time;
  double value = 0.0;

  friend bool operator==(const Reading&, const Reading&) = default;
};

/// Irregular readings of one attribute at one station. Timestamps are
/// strictly increasing and every stored value is finite; gaps are simply
/// absent points.
class RawSeries {
 public:
  RawSeries() = default;
  RawSeries(std::string station_id, Attribute attribute)
      : station_id_(std::move(station_id)), attribute_(attribute) {}
  RawSeries(std::string station_id, Attribute attribute, std::vector<Reading> points);

  // Throws DuplicateTimestamp / InvalidArgument on ordering violations and
  // NonFiniteValue for NaN or inf.
  void push_back(Reading r);

  const std::string& station_id() const { return station_id_; }
  Attribute attribute() const { return attribute_; }
  const std::vector<Reading>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

 private:
  std::string station_id_;
  Attribute attribute_ = Attribute::PM25;
  std::vector<Reading> points_;
};

/// Equally spaced series; index i sits at start + i * interval.
struct RegularSeries {
  Instant start{};
  Duration interval{3600};
  std::vector<std::optional<double>> values;

  std::size_t size() const { return values.size(); }
  Instant time_at(std::size_t i) const {
    return start + interval * static_cast<Duration::rep>(i);
  }
  Instant end() const { return time_at(values.size()); }
  std::size_t missing_count() const;
};

/// Rows of (temperature, humidity, pressure, wind_speed, pollutant) on one
/// time base. `present` marks observed entries; absent entries hold 0 in
/// `values` and must never be read as data.
struct FeatureMatrix {
  Instant start{};
  Duration interval{3600};
  FeatureRows values;
  PresenceRows present;
  std::vector<bool> excluded;  // kept for display, skipped when training

  Eigen::Index rows() const { return values.rows(); }
  Instant time_at(Eigen::Index i) const {
    return start + interval * static_cast<Duration::rep>(i);
  }
  bool complete() const { return present.all(); }
  Eigen::Index missing_count() const { return present.size() - present.count(); }
};

struct NormStats {
  FeatureRow mean = FeatureRow::Zero();
  FeatureRow std = FeatureRow::Ones();  // already replaced by 1 where degenerate
  std::array<bool, kFeatureDim> degenerate{};

  double invert(Eigen::Index column, double normalized) const {
    return normalized * std(column) + mean(column);
  }
};

/// Sliding windows over a complete feature matrix. Window i covers rows
/// [i, i + length) and its target is the pollutant at row i + length.
class WindowedDataset {
 public:
  WindowedDataset() = default;
  WindowedDataset(FeatureRows features, Eigen::Index length, Instant start, Duration interval,
                  std::vector<bool> trainable);

  Eigen::Index length() const { return length_; }
  Eigen::Index size() const { return features_.rows() > length_ ? features_.rows() - length_ : 0; }
  bool empty() const { return size() == 0; }
  Eigen::Index input_dim() const { return features_.cols(); }

  auto input(Eigen::Index i) const { return features_.middleRows(i, length_); }
  double target(Eigen::Index i) const { return features_(i + length_, kPollutantColumn); }
  Eigen::VectorXd targets() const { return features_.col(kPollutantColumn).tail(size()); }
  Eigen::Index target_row(Eigen::Index i) const { return i + length_; }
  Instant target_time(Eigen::Index i) const {
    return start_ + interval_ * static_cast<Duration::rep>(i + length_);
  }
  bool trainable(Eigen::Index i) const { return trainable_[static_cast<std::size_t>(i)]; }

  // First `count` windows only; shares no state with *this.
  WindowedDataset head(Eigen::Index count) const;

  const FeatureRows& features() const { return features_; }
  Instant start() const { return start_; }
  Duration interval() const { return interval_; }

 private:
  FeatureRows features_;
  Eigen::Index length_ = 1;
  Instant start_{};
  Duration interval_{3600};
  std::vector<bool> trainable_;
};

enum class StationKind { roadside, general };

struct Station {
  std::string id;
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  StationKind kind = StationKind::general;
};

std::string_view to_string(StationKind k) noexcept;

/// Readings of many stations, keyed by (station, attribute).
struct Dataset {
  std::string id;
  std::vector<Station> stations;
  std::map<std::pair<std::string, Attribute>, RawSeries> readings;

  const Station* find_station(const std::string& station_id) const;
  const RawSeries* find_series(const std::string& station_id, Attribute a) const;
  std::size_t reading_count() const;
};

}  // namespace aqad
