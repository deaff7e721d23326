#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqad/core/attribute.hpp"
#include "aqad/core/time.hpp"
#include "aqad/regressor/predict.hpp"

namespace aqad::detector {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Absolute prediction errors e and their trailing moving average e_s.
struct ErrorSeries {
  Vector e;
  Vector e_s;
  std::vector<Instant> times;
  Eigen::Index h = 168;
  Eigen::Index w_ma = 1;

  Eigen::Index size() const { return e.size(); }
};

/// e = |y_hat - y|; e_s is left empty until smoothing.
ErrorSeries errors(const regressor::PredictionSet& p);

/// Causal trailing mean over the last min(i + 1, w_ma) values.
Vector smooth(const VectorRef& e, Eigen::Index w_ma);

/// Statistics of the selected candidate. Standard deviations are population
/// deviations; `below` statistics cover values strictly under theta.
struct ThresholdDiagnostics {
  double k = 0.0;
  double theta = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double delta_mean = 0.0;
  double delta_std = 0.0;
  Eigen::Index above_count = 0;
  Eigen::Index seq_count = 0;
  double objective = 0.0;

  friend bool operator==(const ThresholdDiagnostics&, const ThresholdDiagnostics&) = default;
};

/// theta = mean + k * std maximizing
///   (delta_mean / mean + delta_std / std) / (|above| + |sequences|^2)
/// over k_grid. Candidates with nothing above theta, or a window with zero
/// mean or zero std, are invalid; nullopt means no candidate was valid (no
/// anomalies). Equal objectives keep the smallest k. Throws WindowTooShort
/// for fewer than 2 values and InvalidArgument for an empty or unsorted grid.
std::optional<ThresholdDiagnostics> select_threshold(const VectorRef& window,
                                                     std::span<const double> k_grid);

/// Closed index interval [first, last].
struct IndexInterval {
  Eigen::Index first = 0;
  Eigen::Index last = 0;

  Eigen::Index length() const { return last - first + 1; }
  friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

/// Maximal runs of indices with value > theta.
std::vector<IndexInterval> extract_sequences(const VectorRef& window, double theta);

/// (max(window[seq]) - theta) / (mean(window) + std(window)). Throws
/// DegenerateWindow when the denominator is zero.
double score(const VectorRef& window, double theta, IndexInterval seq);

// 0.5, 1.0, ..., 12.0
std::vector<double> default_k_grid();

/// 0..4 from score: < 0.5, < 1, < 2, < 4, else 4.
int severity_for_score(double s);

enum class EventSource { detected, manual };

std::string_view to_string(EventSource s) noexcept;
EventSource event_source_from_string(std::string_view name);

/// The window and threshold that produced a detected event.
struct Provenance {
  double theta = 0.0;
  Eigen::Index window_begin = 0;  // index into the error series
  Eigen::Index window_end = 0;    // exclusive
  Eigen::Index first_index = 0;   // flagged steps, inclusive
  Eigen::Index last_index = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AnomalousEvent {
  std::string id;
  std::string station_id;
  Attribute attribute = Attribute::PM25;
  Instant start{};  // first flagged step
  Instant end{};    // last flagged step, inclusive
  double score = 0.0;
  int severity = 0;
  EventSource source = EventSource::detected;
  std::vector<std::string> tags;
  std::string comment;
  std::string experiment_id;
  std::string dataset_id;
  std::optional<Provenance> provenance;

  friend bool operator==(const AnomalousEvent&, const AnomalousEvent&) = default;
};

struct DetectConfig {
  Eigen::Index h = 168;
  Eigen::Index stride = 84;
  Eigen::Index w_ma = 1;
  std::vector<double> k_grid = default_k_grid();
  Eigen::Index min_gap = 0;
  double min_error = 0.0;

  void validate() const;  // throws InvalidArgument
};

struct WindowDiagnostics {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive
  std::optional<ThresholdDiagnostics> threshold;
  bool calm = false;  // skipped: every smoothed error <= min_error

  friend bool operator==(const WindowDiagnostics&, const WindowDiagnostics&) = default;
};

struct DetectionResult {
  Vector e_s;
  std::vector<WindowDiagnostics> windows;
  std::vector<AnomalousEvent> events;
};

/// Smooths err.e with cfg.w_ma, then thresholds windows of length h every
/// `stride` steps (a trailing partial window is kept when at least h/2
/// long). Flagged runs are scored against their own window, mapped to
/// timestamps and merged when separated by <= min_gap steps; a merged event
/// keeps the highest score and that contributor's provenance.
DetectionResult detect(const ErrorSeries& err, const DetectConfig& cfg);

/// Same as detect() on an already smoothed series.
DetectionResult detect_smoothed(const VectorRef& e_s, std::span<const Instant> times,
                                const DetectConfig& cfg);

}  // namespace aqad::detector
