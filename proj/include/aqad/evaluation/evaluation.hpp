#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqad/core/attribute.hpp"
#include "aqad/core/time.hpp"
#include "aqad/detector/detector.hpp"

namespace aqad::evaluation {

/// Half-open time span [begin, end).
struct Span {
  Instant begin{};
  Instant end{};

  bool empty() const { return !(begin < end); }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Elementary intervals between consecutive boundaries, each labeled by
/// whether any ground-truth (gt) or detected (det) span covers it.
struct LabeledIntervals {
  std::vector<Instant> boundaries;  // strictly ascending, size() + 1 entries
  std::vector<bool> gt;
  std::vector<bool> det;
  std::vector<double> weights;  // interval length in seconds

  std::size_t size() const { return weights.size(); }
};

/// Spans are clipped to `range`; the boundary set is every clipped endpoint
/// plus the range endpoints. Throws InvalidArgument on an empty range.
LabeledIntervals build_intervals(std::span<const Span> gt, std::span<const Span> det, Span range);

/// Length-weighted confusion totals and derived ratios. A ratio whose
/// denominator is zero is absent rather than 0.
struct Scores {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_beta;
};

Scores weighted_metrics(const LabeledIntervals& li, double beta);

// (1 + b^2) P R / (b^2 P + R); 0 when P = R = 0.
double f_beta_score(double precision, double recall, double beta);

/// Detected events mark inclusive steps; their span runs to the end of the
/// last flagged step.
Span event_span(const detector::AnomalousEvent& ev, Duration interval);

struct LabelRow {
  std::string station_id;
  Attribute attribute = Attribute::PM25;
  Span span;
};

// Header: station_id,attribute,start,end (ISO-8601 UTC, end exclusive).
std::vector<LabelRow> parse_labels(std::string_view text);
std::string write_labels(const std::vector<LabelRow>& rows);

struct MetricRow {
  std::string station_id;
  Attribute attribute = Attribute::PM25;
  Scores scores;
};

struct MetricReport {
  double beta = 0.5;
  std::vector<MetricRow> rows;
  std::optional<double> mean_precision;
  std::optional<double> mean_recall;
  std::optional<double> mean_f_beta;
};

// Means over rows where the value is present.
void fill_means(MetricReport& report);

nlohmann::json report_to_json(const MetricReport& report);

}  // namespace aqad::evaluation
