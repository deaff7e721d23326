#include "aqad/detector/detector.hpp"

#include <algorithm>
#include <cmath>

#include "aqad/core/error.hpp"

namespace aqad::detector {
namespace {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

// Sequential two-pass population statistics. Kept as plain loops so the
// summation order is fixed and reproducible.
MeanStd mean_std(const VectorRef& v) {
  const Eigen::Index n = v.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += v(i);
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sq += (v(i) - mean) * (v(i) - mean);
  return {mean, std::sqrt(sq / static_cast<double>(n))};
}

struct Candidate {
  IndexInterval span;
  double score = 0.0;
  Provenance provenance;
};

}  // namespace

ErrorSeries errors(const regressor::PredictionSet& p) {
  if (p.y.size() != p.y_hat.size()) throw Error(Errc::ShapeMismatch, "y and y_hat lengths differ");
  ErrorSeries out;
  out.e = (p.y_hat - p.y).cwiseAbs();
  out.times = p.times;
  return out;
}

Vector smooth(const VectorRef& e, Eigen::Index w_ma) {
  if (w_ma < 1) throw Error(Errc::InvalidArgument, "w_ma must be >= 1");
  Vector out(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Eigen::Index from = std::max<Eigen::Index>(0, i - w_ma + 1);
    double sum = 0.0;
    for (Eigen::Index j = from; j <= i; ++j) sum += e(j);
    out(i) = sum / static_cast<double>(i - from + 1);
  }
  return out;
}

std::optional<ThresholdDiagnostics> select_threshold(const VectorRef& window,
                                                     std::span<const double> k_grid) {
  const Eigen::Index n = window.size();
  if (n < 2) throw Error(Errc::WindowTooShort, "threshold window needs >= 2 values, got " + std::to_string(n));
  if (k_grid.empty()) throw Error(Errc::InvalidArgument, "k_grid is empty");
  if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw Error(Errc::InvalidArgument, "k_grid must be ascending");

  const MeanStd all = mean_std(window);
  if (all.mean == 0.0 || all.stddev == 0.0) return std::nullopt;

  std::optional<ThresholdDiagnostics> best;
  for (double k : k_grid) {
    const double theta = all.mean + k * all.stddev;
    double below_sum = 0.0;
    Eigen::Index below = 0;
    Eigen::Index above = 0;
    Eigen::Index runs = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = window(i);
      if (v > theta) {
        ++above;
        if (i == 0 || !(window(i - 1) > theta)) ++runs;
      } else if (v < theta) {
        below_sum += v;
        ++below;
      }
    }
    if (above == 0 || below == 0) continue;
    const double below_mean = below_sum / static_cast<double>(below);
    double below_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (window(i) < theta) below_sq += (window(i) - below_mean) * (window(i) - below_mean);
    }
    const double below_std = std::sqrt(below_sq / static_cast<double>(below));

    ThresholdDiagnostics d;
    d.k = k;
    d.theta = theta;
    d.mean = all.mean;
    d.stddev = all.stddev;
    d.delta_mean = all.mean - below_mean;
    d.delta_std = all.stddev - below_std;
    d.above_count = above;
    d.seq_count = runs;
    d.objective = (d.delta_mean / all.mean + d.delta_std / all.stddev) /
                  static_cast<double>(above + runs * runs);
    if (!best || d.objective > best->objective) best = d;
  }
  return best;
}

std::vector<IndexInterval> extract_sequences(const VectorRef& window, double theta) {
  if (!std::isfinite(theta)) throw Error(Errc::InvalidArgument, "theta must be finite");
  std::vector<IndexInterval> out;
  for (Eigen::Index i = 0; i < window.size(); ++i) {
    if (!(window(i) > theta)) continue;
    if (!out.empty() && out.back().last == i - 1) {
      out.back().last = i;
    } else {
      out.push_back({i, i});
    }
  }
  return out;
}

double score(const VectorRef& window, double theta, IndexInterval seq) {
  if (seq.first < 0 || seq.last < seq.first || seq.last >= window.size()) {
    throw Error(Errc::InvalidArgument, "sequence outside window");
  }
  const MeanStd stats = mean_std(window);
  const double denom = stats.mean + stats.stddev;
  if (denom == 0.0) throw Error(Errc::DegenerateWindow, "mean + std of the window is zero");
  const double peak = window.segment(seq.first, seq.length()).maxCoeff();
  return (peak - theta) / denom;
}

std::vector<double> default_k_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 24; ++i) grid.push_back(0.5 * i);
  return grid;
}

int severity_for_score(double s) {
  if (s < 0.5) return 0;
  if (s < 1.0) return 1;
  if (s < 2.0) return 2;
  if (s < 4.0) return 3;
  return 4;
}

std::string_view to_string(EventSource s) noexcept { return s == EventSource::detected ? "detected" : "manual"; }

EventSource event_source_from_string(std::string_view name) {
  if (name == "detected") return EventSource::detected;
  if (name == "manual") return EventSource::manual;
  throw Error(Errc::InvalidArgument, "unknown event source \"" + std::string(name) + "\"");
}

void DetectConfig::validate() const {
  if (h < 2) throw Error(Errc::InvalidArgument, "h must be >= 2");
  if (stride < 1) throw Error(Errc::InvalidArgument, "stride must be >= 1");
  if (w_ma < 1) throw Error(Errc::InvalidArgument, "w_ma must be >= 1");
  if (min_gap < 0) throw Error(Errc::InvalidArgument, "min_gap must be >= 0");
  if (k_grid.empty() || !std::is_sorted(k_grid.begin(), k_grid.end())) {
    throw Error(Errc::InvalidArgument, "k_grid must be non-empty and ascending");
  }
}

DetectionResult detect(const ErrorSeries& err, const DetectConfig& cfg) {
  cfg.validate();
  return detect_smoothed(smooth(err.e, cfg.w_ma), err.times, cfg);
}

DetectionResult detect_smoothed(const VectorRef& e_s, std::span<const Instant> times,
                                const DetectConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = e_s.size();
  if (static_cast<Eigen::Index>(times.size()) != n) {
    throw Error(Errc::ShapeMismatch, "times and errors differ in length");
  }
  DetectionResult result;
  result.e_s = e_s;

  std::vector<Candidate> candidates;
  for (Eigen::Index begin = 0; begin < n; begin += cfg.stride) {
    const Eigen::Index end = std::min(begin + cfg.h, n);
    const Eigen::Index len = end - begin;
    if (len < cfg.h && 2 * len < cfg.h) break;
    if (len < 2) break;

    const auto window = e_s.segment(begin, len);
    WindowDiagnostics diag{begin, end, std::nullopt, false};
    if (window.maxCoeff() <= cfg.min_error) {
      diag.calm = true;
    } else {
      diag.threshold = select_threshold(window, cfg.k_grid);
    }
    if (diag.threshold) {
      const double theta = diag.threshold->theta;
      for (const IndexInterval& seq : extract_sequences(window, theta)) {
        Candidate c;
        c.span = {begin + seq.first, begin + seq.last};
        c.score = score(window, theta, seq);
        c.provenance = {theta, begin, end, c.span.first, c.span.last};
        candidates.push_back(c);
      }
    }
    result.windows.push_back(diag);
    if (end == n) break;
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.span.first < b.span.first || (a.span.first == b.span.first && a.span.last < b.span.last);
  });
  std::vector<Candidate> merged;
  for (const Candidate& c : candidates) {
    // Gap counts the unflagged steps between two runs.
    if (!merged.empty() && c.span.first - merged.back().span.last - 1 <= cfg.min_gap) {
      Candidate& m = merged.back();
      m.span.last = std::max(m.span.last, c.span.last);
      if (c.score > m.score) {
        m.score = c.score;
        m.provenance = c.provenance;
      }
    } else {
      merged.push_back(c);
    }
  }

  for (const Candidate& c : merged) {
    AnomalousEvent ev;
    ev.start = times[static_cast<std::size_t>(c.span.first)];
    ev.end = times[static_cast<std::size_t>(c.span.last)];
    ev.score = c.score;
    ev.severity = severity_for_score(c.score);
    ev.source = EventSource::detected;
    ev.provenance = c.provenance;
    result.events.push_back(std::move(ev));
  }
  return result;
}

}  // namespace aqad::detector
