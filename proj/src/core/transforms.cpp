#include "aqad/core/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "aqad/core/error.hpp"

namespace aqad {

std::string_view to_string(Aggregation a) noexcept {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::max: return "max";
    case Aggregation::last: return "last";
  }
  return "";
}

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "mean") return Aggregation::mean;
  if (name == "max") return Aggregation::max;
  if (name == "last") return Aggregation::last;
  throw Error(Errc::InvalidArgument, "unknown aggregation \"" + std::string(name) + "\"");
}

RegularSeries resample(const RawSeries& raw, Duration interval, Aggregation agg) {
  if (interval.count() <= 0) throw Error(Errc::InvalidArgument, "interval must be positive");
  if (raw.empty()) {
    throw Error(Errc::EmptySeries, raw.station_id() + "/" + std::string(to_string(raw.attribute())));
  }
  const auto& pts = raw.points();
  RegularSeries out;
  out.interval = interval;
  out.start = floor_to_interval(pts.front().time, interval);
  const auto buckets = (pts.back().time - out.start) / interval + 1;
  out.values.assign(static_cast<std::size_t>(buckets), std::nullopt);

  std::vector<std::size_t> counts(out.values.size(), 0);
  for (const Reading& r : pts) {
    const auto b = static_cast<std::size_t>((r.time - out.start) / interval);
    auto& slot = out.values[b];
    switch (agg) {
      case Aggregation::mean:
        slot = slot.value_or(0.0) + r.value;
        ++counts[b];
        break;
      case Aggregation::max:
        slot = slot ? std::max(*slot, r.value) : r.value;
        break;
      case Aggregation::last:
        slot = r.value;
        break;
    }
  }
  if (agg == Aggregation::mean) {
    for (std::size_t b = 0; b < out.values.size(); ++b) {
      if (counts[b] > 0) *out.values[b] /= static_cast<double>(counts[b]);
    }
  }
  return out;
}

FeatureMatrix join_weather(const RegularSeries& pollutant,
                           const std::array<RegularSeries, 4>& weather) {
  for (const RegularSeries& w : weather) {
    if (w.interval != pollutant.interval) {
      throw Error(Errc::GranularityMismatch,
                  "weather interval " + std::to_string(w.interval.count()) +
                      "s differs from pollutant interval " +
                      std::to_string(pollutant.interval.count()) + "s");
    }
    if ((w.start - pollutant.start) % pollutant.interval != Duration::zero()) {
      throw Error(Errc::GranularityMismatch, "weather grid is not phase-aligned with pollutant grid");
    }
  }
  const auto n = static_cast<Eigen::Index>(pollutant.size());
  FeatureMatrix m;
  m.start = pollutant.start;
  m.interval = pollutant.interval;
  m.values = FeatureRows::Zero(n, kFeatureDim);
  m.present = PresenceRows::Constant(n, kFeatureDim, false);
  m.excluded.assign(static_cast<std::size_t>(n), false);

  auto fill = [&](Eigen::Index column, const RegularSeries& s) {
    const auto offset = (s.start - pollutant.start) / pollutant.interval;
    for (Eigen::Index row = 0; row < n; ++row) {
      const auto idx = row - offset;
      if (idx < 0 || idx >= static_cast<Eigen::Index>(s.size())) continue;
      if (const auto& v = s.values[static_cast<std::size_t>(idx)]) {
        m.values(row, column) = *v;
        m.present(row, column) = true;
      }
    }
  };
  for (Eigen::Index c = 0; c < 4; ++c) fill(c, weather[static_cast<std::size_t>(c)]);
  fill(kPollutantColumn, pollutant);
  return m;
}

FeatureMatrix impute(const FeatureMatrix& m, std::size_t max_gap) {
  FeatureMatrix out = m;
  const Eigen::Index n = m.rows();
  if (out.excluded.size() != static_cast<std::size_t>(n)) out.excluded.assign(static_cast<std::size_t>(n), false);

  for (Eigen::Index c = 0; c < kFeatureDim; ++c) {
    std::vector<Eigen::Index> observed;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (m.present(r, c)) observed.push_back(r);
    }
    if (observed.empty()) {
      throw Error(Errc::UnimputableColumn, "feature column " + std::to_string(c) + " has no values");
    }
    auto mark_gap = [&](Eigen::Index begin, Eigen::Index end) {
      if (static_cast<std::size_t>(end - begin) <= max_gap) return;
      for (Eigen::Index r = begin; r < end; ++r) out.excluded[static_cast<std::size_t>(r)] = true;
    };

    const Eigen::Index first = observed.front();
    const Eigen::Index last = observed.back();
    for (Eigen::Index r = 0; r < first; ++r) out.values(r, c) = m.values(first, c);
    mark_gap(0, first);
    for (Eigen::Index r = last + 1; r < n; ++r) out.values(r, c) = m.values(last, c);
    mark_gap(last + 1, n);

    for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
      const Eigen::Index a = observed[k];
      const Eigen::Index b = observed[k + 1];
      if (b - a < 2) continue;
      const double va = m.values(a, c);
      const double vb = m.values(b, c);
      for (Eigen::Index r = a + 1; r < b; ++r) {
        const double t = static_cast<double>(r - a) / static_cast<double>(b - a);
        out.values(r, c) = va + t * (vb - va);
      }
      mark_gap(a + 1, b);
    }
  }
  out.present.setConstant(true);
  return out;
}

NormStats fit_norm(const FeatureMatrix& m, RowRange range) {
  range.end = std::min(range.end, m.rows());
  if (range.size() == 0) throw Error(Errc::EmptyFitRange, "normalization fit range is empty");

  NormStats stats;
  for (Eigen::Index c = 0; c < kFeatureDim; ++c) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index r = range.begin; r < range.end; ++r) {
      if (!m.present(r, c)) continue;
      sum += m.values(r, c);
      ++count;
    }
    if (count == 0) throw Error(Errc::EmptyFitRange, "no observed values in fit range for column " + std::to_string(c));
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (Eigen::Index r = range.begin; r < range.end; ++r) {
      if (m.present(r, c)) sq += (m.values(r, c) - mean) * (m.values(r, c) - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(count));
    stats.mean(c) = mean;
    stats.degenerate[static_cast<std::size_t>(c)] = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    stats.std(c) = stats.degenerate[static_cast<std::size_t>(c)] ? 1.0 : sd;
  }
  return stats;
}

FeatureMatrix apply_norm(const FeatureMatrix& m, const NormStats& stats) {
  FeatureMatrix out = m;
  out.values = ((m.values.rowwise() - stats.mean).array().rowwise() / stats.std.array()).matrix();
  out.values = out.present.select(out.values, FeatureRows::Zero(m.rows(), kFeatureDim));
  return out;
}

FeatureMatrix invert_norm(const FeatureMatrix& m, const NormStats& stats) {
  FeatureMatrix out = m;
  out.values = (m.values.array().rowwise() * stats.std.array()).matrix().rowwise() + stats.mean;
  out.values = out.present.select(out.values, FeatureRows::Zero(m.rows(), kFeatureDim));
  return out;
}

WindowedDataset make_windows(const FeatureMatrix& m, Eigen::Index length) {
  if (length < 1) throw Error(Errc::InvalidArgument, "window length must be >= 1");
  if (m.rows() <= length) {
    throw Error(Errc::SeriesTooShort, std::to_string(m.rows()) + " rows is not longer than window length " +
                                          std::to_string(length));
  }
  if (!m.complete()) throw Error(Errc::InvalidArgument, "feature matrix has missing entries; impute first");

  const Eigen::Index count = m.rows() - length;
  std::vector<bool> trainable(static_cast<std::size_t>(count), true);
  if (m.excluded.size() == static_cast<std::size_t>(m.rows())) {
    // A window is trainable iff none of its input rows nor its target row is excluded.
    Eigen::Index excluded_in_span = 0;
    auto excluded = [&](Eigen::Index r) { return m.excluded[static_cast<std::size_t>(r)] ? 1 : 0; };
    for (Eigen::Index r = 0; r <= length; ++r) excluded_in_span += excluded(r);
    for (Eigen::Index i = 0; i < count; ++i) {
      if (i > 0) excluded_in_span += excluded(i + length) - excluded(i - 1);
      trainable[static_cast<std::size_t>(i)] = excluded_in_span == 0;
    }
  }
  return WindowedDataset(m.values, length, m.start, m.interval, std::move(trainable));
}

}  // namespace aqad
