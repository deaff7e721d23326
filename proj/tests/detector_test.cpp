#include <gtest/gtest.h>

#include <random>

#include "aqad/core/error.hpp"
#include "aqad/detector/detector.hpp"
#include "aqad/detector/event_io.hpp"
#include "oracles.hpp"

using namespace aqad;
using namespace aqad::detector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<Instant> hours(Eigen::Index n) {
  std::vector<Instant> t;
  for (Eigen::Index i = 0; i < n; ++i) t.push_back(from_epoch_seconds(1704067200 + 3600 * i));
  return t;
}

ErrorSeries series_of(const Vector& e) {
  ErrorSeries s;
  s.e = e;
  s.times = hours(e.size());
  return s;
}

Vector noise(Eigen::Index n, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * std::abs(g(rng));
  return v;
}

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(Errors, AbsoluteDifference) {
  regressor::PredictionSet p;
  p.y = vec({1, 2});
  p.y_hat = vec({3, 0});
  p.times = hours(2);
  const auto e = errors(p);
  EXPECT_EQ(e.e, vec({2, 2}));
  std::swap(p.y, p.y_hat);
  EXPECT_EQ(errors(p).e, vec({2, 2}));
  p.y_hat = p.y;
  EXPECT_EQ(errors(p).e, vec({0, 0}));
}

TEST(Smooth, TrailingMean) {
  EXPECT_EQ(smooth(vec({1, 2, 3, 4, 5}), 3), vec({1, 1.5, 2, 3, 4}));
  EXPECT_EQ(smooth(vec({4, 4, 4, 4}), 3), vec({4, 4, 4, 4}));
  const Vector r = noise(50, 1);
  EXPECT_EQ(smooth(r, 1), r);
  EXPECT_THROW(smooth(r, 0), Error);
}

TEST(SelectThreshold, ConstantWindowHasNoAnomalies) {
  EXPECT_FALSE(select_threshold(vec({1, 1, 1, 1}), default_k_grid()));
  EXPECT_FALSE(select_threshold(vec({0, 0, 0}), default_k_grid()));
}

TEST(SelectThreshold, Errors) {
  const auto grid = default_k_grid();
  try {
    select_threshold(vec({1}), grid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WindowTooShort);
  }
  std::vector<double> unsorted{2, 1};
  EXPECT_THROW(select_threshold(vec({1, 2, 3}), unsorted), Error);
  EXPECT_THROW(select_threshold(vec({1, 2, 3}), std::vector<double>{}), Error);
}

TEST(SelectThreshold, ThreeSpikesStandOut) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  std::vector<double> w(100);
  for (auto& x : w) x = std::abs(g(rng));
  w.insert(w.begin() + 20, 10.0);
  w.insert(w.begin() + 55, 10.0);
  w.insert(w.begin() + 90, 10.0);
  const auto grid = default_k_grid();
  const auto got = select_threshold(Eigen::Map<const Vector>(w.data(), 103), grid);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->above_count, 3);
  EXPECT_EQ(got->seq_count, 3);
  const auto want = oracle::best_threshold(w, grid);
  ASSERT_TRUE(want);
  EXPECT_EQ(got->k, want->k);
  EXPECT_EQ(extract_sequences(Eigen::Map<const Vector>(w.data(), 103), got->theta).size(), 3u);
}

TEST(SelectThreshold, MatchesBruteForce) {
  const auto grid = default_k_grid();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> spikes(0, 5);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<double> w(120 + trial);
    for (auto& x : w) x = std::abs(g(rng));
    std::uniform_int_distribution<std::size_t> pos(0, w.size() - 1);
    for (int s = spikes(rng); s > 0; --s) w[pos(rng)] += 4 + 4 * std::abs(g(rng));
    const auto got = select_threshold(Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())), grid);
    const auto want = oracle::best_threshold(w, grid);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (!got) continue;
    EXPECT_EQ(got->k, want->k) << "trial " << trial;
    EXPECT_EQ(got->above_count, static_cast<Eigen::Index>(want->above));
    EXPECT_EQ(got->seq_count, static_cast<Eigen::Index>(want->runs));
    EXPECT_NEAR(got->objective, static_cast<double>(want->objective), 1e-12);
    EXPECT_DOUBLE_EQ(got->theta, got->mean + got->k * got->stddev);
  }
}

TEST(SelectThreshold, TiesGoToSmallestK) {
  // Every k up to about 2.9 flags only the last value.
  const auto got = select_threshold(vec({1, 1, 1, 1, 1, 1, 1, 1, 1, 10}), default_k_grid());
  ASSERT_TRUE(got);
  EXPECT_EQ(got->k, 0.5);
  EXPECT_EQ(got->above_count, 1);
}

TEST(SelectThreshold, ScaleInvariant) {
  const auto grid = default_k_grid();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Vector w = noise(200, seed, 1.0);
    w(50) += 6;
    w(51) += 5;
    w(140) += 7;
    const auto a = select_threshold(w, grid);
    for (double c : {0.25, 2.0, 8.0}) {
      const auto b = select_threshold(c * w, grid);
      ASSERT_EQ(a.has_value(), b.has_value());
      if (a) {
        EXPECT_EQ(a->k, b->k) << "seed " << seed << " c " << c;
      }
    }
  }
}

TEST(ExtractSequences, Runs) {
  const Vector w = vec({0.1, 0.9, 0.95, 0.2, 0.8});
  EXPECT_EQ(extract_sequences(w, 0.5), (std::vector<IndexInterval>{{1, 2}, {4, 4}}));
  EXPECT_TRUE(extract_sequences(w, 1.0).empty());
  EXPECT_EQ(extract_sequences(w, 0.0), (std::vector<IndexInterval>{{0, 4}}));
  EXPECT_EQ(extract_sequences(w, 0.8), (std::vector<IndexInterval>{{1, 2}}));  // equality is not above
}

TEST(Score, HandValue) {
  const Vector w = vec({0.1, 0.9, 0.95, 0.2, 0.8});
  const double mu = 0.59;
  const double sd = std::sqrt((0.49 * 0.49 + 0.31 * 0.31 + 0.36 * 0.36 + 0.39 * 0.39 + 0.21 * 0.21) / 5);
  EXPECT_NEAR(score(w, 0.5, {1, 2}), (0.95 - 0.5) / (mu + sd), 1e-12);
  EXPECT_NEAR(score(w, 0.5, {1, 2}), 0.472, 1e-3);
  EXPECT_DOUBLE_EQ(score(w, 0.95, {1, 2}), 0.0);
}

TEST(Score, LinearAndMonotoneInPeak) {
  const Vector w = noise(100, 4, 1.0);
  const double theta = 0.2;
  const double s1 = score(w, theta, {10, 12});
  const double peak = w.segment(10, 3).maxCoeff();
  const double denom = (peak - theta) / s1;
  EXPECT_NEAR(2 * (peak - theta) / denom, 2 * s1, 1e-12);
  Vector v = w;
  double last = -1;
  for (int i = 0; i < 5; ++i) {
    v(11) = peak + i;
    // Window stats move too; the score still grows with the peak.
    const double s = score(v, theta, {10, 12});
    EXPECT_GT(s, last);
    last = s;
  }
}

TEST(Score, DegenerateWindow) {
  try {
    score(vec({0, 0, 0}), -1, {0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateWindow);
  }
}

TEST(Severity, Mapping) {
  EXPECT_EQ(severity_for_score(0.0), 0);
  EXPECT_EQ(severity_for_score(0.49), 0);
  EXPECT_EQ(severity_for_score(0.5), 1);
  EXPECT_EQ(severity_for_score(1.0), 2);
  EXPECT_EQ(severity_for_score(2.0), 3);
  EXPECT_EQ(severity_for_score(3.99), 3);
  EXPECT_EQ(severity_for_score(4.0), 4);
  EXPECT_EQ(severity_for_score(100.0), 4);
}

TEST(Detect, AllZeroErrorsGiveNothing) {
  DetectConfig cfg;
  cfg.h = 50;
  cfg.stride = 25;
  const auto r = detect(series_of(Vector::Zero(300)), cfg);
  EXPECT_TRUE(r.events.empty());
  EXPECT_FALSE(r.windows.empty());
  for (const auto& w : r.windows) EXPECT_FALSE(w.threshold);
}

TEST(Detect, SingleSpike) {
  // One window over the whole series.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Vector e = noise(300, seed);
    e(217) = 5.0;
    DetectConfig cfg;
    cfg.h = 300;
    cfg.stride = 300;
    const auto s = series_of(e);
    const auto r = detect(s, cfg);
    ASSERT_EQ(r.events.size(), 1u) << "seed " << seed;
    EXPECT_LE(r.events[0].start, s.times[217]);
    EXPECT_GE(r.events[0].end, s.times[217]);
    EXPECT_EQ(r.events[0].source, EventSource::detected);
  }
}

TEST(Detect, NoiseOnlyWindowsStillFlagTheirPeaks) {
  // Without a calm level every window with spread gets a threshold.
  Vector e = noise(400, 1);
  e(217) = 5.0;
  DetectConfig cfg;
  cfg.h = 100;
  cfg.stride = 100;
  const auto r = detect(series_of(e), cfg);
  EXPECT_GT(r.events.size(), 1u);
  cfg.min_error = 1.0;
  EXPECT_EQ(detect(series_of(e), cfg).events.size(), 1u);
}

TEST(Detect, NearbySpikesMerge) {
  Vector e = noise(300, 3);
  e(200) = 5.0;
  e(203) = 5.0;
  DetectConfig cfg;
  cfg.h = 300;
  cfg.stride = 300;
  const auto s = series_of(e);
  cfg.min_gap = 3;
  auto r = detect(s, cfg);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].start, s.times[200]);
  EXPECT_EQ(r.events[0].end, s.times[203]);
  cfg.min_gap = 1;
  r = detect(s, cfg);
  EXPECT_EQ(r.events.size(), 2u);
}

TEST(Detect, WindowsAndTrailingPartial) {
  DetectConfig cfg;
  cfg.h = 100;
  cfg.stride = 50;
  auto r = detect(series_of(noise(260, 1)), cfg);
  // 0-100, 50-150, 100-200, 150-250, 200-260 (60 >= 50).
  ASSERT_EQ(r.windows.size(), 5u);
  EXPECT_EQ(r.windows.back().begin, 200);
  EXPECT_EQ(r.windows.back().end, 260);
  r = detect(series_of(noise(240, 1)), cfg);
  // 200-240 is only 40 long, but 150-240 already reaches the end.
  EXPECT_EQ(r.windows.back().end, 240);
  r = detect(series_of(noise(60, 1)), cfg);
  ASSERT_EQ(r.windows.size(), 1u);
  EXPECT_EQ(r.windows[0].end, 60);
}

TEST(Detect, CalmLevelSkipsQuietWindows) {
  Vector e = noise(300, 8);
  e(250) = 3.0;
  DetectConfig cfg;
  cfg.h = 100;
  cfg.stride = 100;
  cfg.min_error = 1.0;
  const auto r = detect(series_of(e), cfg);
  ASSERT_EQ(r.windows.size(), 3u);
  EXPECT_TRUE(r.windows[0].calm);
  EXPECT_TRUE(r.windows[1].calm);
  EXPECT_FALSE(r.windows[2].calm);
  ASSERT_EQ(r.events.size(), 1u);
}

TEST(Detect, EventsExceedTheirThreshold) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Vector e = noise(1000, seed, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pos(0, 990);
    for (int s = 0; s < 6; ++s) e.segment(pos(rng), 4).array() += 5.0;
    DetectConfig cfg;
    cfg.h = 168;
    cfg.stride = 84;
    cfg.w_ma = 3;
    cfg.min_gap = 2;
    const auto s = series_of(e);
    const auto r = detect(s, cfg);
    const auto again = detect(s, cfg);
    EXPECT_EQ(r.events, again.events);
    EXPECT_EQ(r.windows, again.windows);
    for (const auto& ev : r.events) {
      ASSERT_TRUE(ev.provenance);
      const auto& p = *ev.provenance;
      EXPECT_GE(ev.score, 0.0);
      EXPECT_EQ(ev.severity, severity_for_score(ev.score));
      const Eigen::Index first = (to_epoch_seconds(ev.start) - 1704067200) / 3600;
      const Eigen::Index last = (to_epoch_seconds(ev.end) - 1704067200) / 3600;
      EXPECT_LE(first, last);
      EXPECT_GT(r.e_s.segment(first, last - first + 1).maxCoeff(), p.theta);
      EXPECT_GE(p.first_index, p.window_begin);
      EXPECT_LT(p.last_index, p.window_end);
      // Theta comes from the originating window's statistics.
      const auto win = r.e_s.segment(p.window_begin, p.window_end - p.window_begin);
      const auto want = oracle::best_threshold(as_std(win), cfg.k_grid);
      ASSERT_TRUE(want);
      EXPECT_NEAR(p.theta, want->theta, 1e-12);
    }
  }
}

TEST(Detect, ConfigValidation) {
  DetectConfig cfg;
  cfg.h = 1;
  EXPECT_THROW(detect(series_of(noise(10, 1)), cfg), Error);
  cfg = {};
  cfg.stride = 0;
  EXPECT_THROW(detect(series_of(noise(10, 1)), cfg), Error);
  cfg = {};
  auto s = series_of(noise(10, 1));
  s.times.pop_back();
  EXPECT_THROW(detect(s, cfg), Error);
}

TEST(EventIo, JsonRoundTrip) {
  AnomalousEvent ev;
  ev.id = "exp-1:S1:PM25:0";
  ev.station_id = "S1";
  ev.attribute = Attribute::NO2;
  ev.start = from_epoch_seconds(1704067200);
  ev.end = from_epoch_seconds(1704070800);
  ev.score = 1.2345678;
  ev.severity = 2;
  ev.tags = {"traffic", "night"};
  ev.comment = "check, later";
  ev.experiment_id = "exp-1";
  ev.dataset_id = "ds-1";
  ev.provenance = Provenance{0.5, 0, 168, 3, 4};
  const auto j = event_to_json(ev);
  EXPECT_EQ(j["start"], "2024-01-01T00:00:00Z");
  EXPECT_EQ(j["score"].get<double>(), 1.234568);
  EXPECT_EQ(j["source"], "detected");
  auto back = event_from_json(j);
  EXPECT_EQ(back.score, 1.234568);
  back.score = ev.score;
  EXPECT_EQ(back, ev);
  EXPECT_EQ(write_events_jsonl({ev, ev}).size(), 2 * (j.dump().size() + 1));
  EXPECT_THROW(event_from_json(nlohmann::json{{"id", 3}}), Error);
}
