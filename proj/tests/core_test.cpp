#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aqad/core/attribute.hpp"
#include "aqad/core/csv.hpp"
#include "aqad/core/error.hpp"
#include "aqad/core/hash.hpp"
#include "aqad/core/series.hpp"
#include "aqad/core/time.hpp"
#include "aqad/core/transforms.hpp"

using namespace aqad;

namespace {

const Duration kHour{3600};

Instant at(const char* iso) { return parse_iso8601(iso); }

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no aqad::Error thrown";
  return Errc::Io;
}

RegularSeries regular(Instant start, std::vector<std::optional<double>> v) {
  RegularSeries s;
  s.start = start;
  s.interval = kHour;
  s.values = std::move(v);
  return s;
}

RegularSeries full(Instant start, std::size_t n, double base) {
  std::vector<std::optional<double>> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(base + static_cast<double>(i));
  return regular(start, v);
}

FeatureMatrix column_matrix(const std::vector<std::optional<double>>& pollutant) {
  const auto t0 = at("2024-01-01T00:00:00Z");
  std::array<RegularSeries, 4> weather;
  for (auto& w : weather) w = full(t0, pollutant.size(), 1.0);
  return join_weather(regular(t0, pollutant), weather);
}

}  // namespace

TEST(Time, IsoRoundTrip) {
  const auto t = at("2024-03-05T07:08:09Z");
  EXPECT_EQ(to_epoch_seconds(t), 1709622489);
  EXPECT_EQ(format_iso8601(t), "2024-03-05T07:08:09Z");
  EXPECT_EQ(code_of([] { parse_iso8601("2024-13-01T00:00:00Z"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] { parse_iso8601("yesterday"); }), Errc::ParseError);
}

TEST(Time, FloorIsEpochAligned) {
  EXPECT_EQ(floor_to_interval(at("2024-01-01T00:10:00Z"), kHour), at("2024-01-01T00:00:00Z"));
  EXPECT_EQ(floor_to_interval(at("2024-01-01T05:00:00Z"), Duration{3 * 3600}), at("2024-01-01T03:00:00Z"));
}

TEST(Attribute, Spellings) {
  for (Attribute a : kAllAttributes) EXPECT_EQ(attribute_from_string(to_string(a)), a);
  EXPECT_EQ(to_string(Attribute::PM25), "PM25");
  EXPECT_FALSE(parse_attribute("pm2.5"));
  EXPECT_EQ(code_of([] { attribute_from_string("ozone"); }), Errc::UnknownAttribute);
  EXPECT_TRUE(is_pollutant(Attribute::SO2));
  EXPECT_FALSE(is_pollutant(Attribute::humidity));
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Csv, QuotedFields) {
  const auto f = csv::split_line(R"(a,"b,c","say ""hi""",)");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "say \"hi\"");
  EXPECT_EQ(f[3], "");
  EXPECT_EQ(csv::split_line(csv::quote("x,\"y\""))[0], "x,\"y\"");
}

TEST(Csv, ReadingsParse) {
  const auto rows = csv::parse_readings(
      "station_id,timestamp,attribute,value\n"
      "S1,2024-01-01T00:00:00Z,PM25,12.5\r\n"
      "\n"
      "S1,2024-01-01T01:00:00Z,temperature,-3\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].attribute, Attribute::PM25);
  EXPECT_DOUBLE_EQ(rows[1].value, -3.0);
  EXPECT_EQ(rows[1].line, 4u);
}

TEST(Csv, ReadingsErrorsNameTheLine) {
  try {
    csv::parse_readings("station_id,timestamp,attribute,value\nS1,2024-01-01T00:00:00Z,PM25,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { csv::parse_readings("a,b\n"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] {
              csv::parse_readings("station_id,timestamp,attribute,value\nS1,2024-01-01T00:00:00Z,dust,1\n");
            }),
            Errc::UnknownAttribute);
  EXPECT_EQ(code_of([] {
              csv::parse_readings("station_id,timestamp,attribute,value\nS1,2024-01-01T00:00:00Z,PM25,nan\n");
            }),
            Errc::NonFiniteValue);
}

TEST(Csv, StationsRoundTrip) {
  std::vector<Station> st{{"A", "Alpha, east", 22.3, 114.1, StationKind::roadside},
                          {"B", "Beta", 22.4, 114.2, StationKind::general}};
  const auto back = csv::parse_stations(csv::write_stations(st));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "Alpha, east");
  EXPECT_EQ(back[0].kind, StationKind::roadside);
  EXPECT_DOUBLE_EQ(back[1].longitude, 114.2);
}

TEST(RawSeries, RejectsDuplicatesDisorderAndNonFinite) {
  RawSeries s("S", Attribute::NO2);
  s.push_back({at("2024-01-01T00:00:00Z"), 1.0});
  EXPECT_EQ(code_of([&] { s.push_back({at("2024-01-01T00:00:00Z"), 2.0}); }), Errc::DuplicateTimestamp);
  EXPECT_THROW(s.push_back({at("2023-12-31T00:00:00Z"), 2.0}), Error);
  EXPECT_EQ(code_of([&] { s.push_back({at("2024-01-02T00:00:00Z"), INFINITY}); }), Errc::NonFiniteValue);
  EXPECT_EQ(s.size(), 1u);
}

TEST(Resample, MeanOfBucket) {
  RawSeries s("S", Attribute::PM25, {{at("2024-01-01T00:10:00Z"), 2}, {at("2024-01-01T00:50:00Z"), 4}});
  const auto r = resample(s, kHour, Aggregation::mean);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.values[0], 3.0);
  EXPECT_EQ(r.start, at("2024-01-01T00:00:00Z"));
  EXPECT_EQ(resample(s, kHour, Aggregation::max).values[0], 4.0);
  EXPECT_EQ(resample(s, kHour, Aggregation::last).values[0], 4.0);
}

TEST(Resample, SinglePointAnyAggregation) {
  RawSeries s("S", Attribute::PM25, {{at("2024-01-01T00:10:00Z"), 2}});
  for (auto agg : {Aggregation::mean, Aggregation::max, Aggregation::last}) {
    const auto r = resample(s, kHour, agg);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r.values[0], 2.0);
  }
}

TEST(Resample, EmptyBucketIsMissing) {
  RawSeries s("S", Attribute::PM25, {{at("2024-01-01T00:05:00Z"), 1}, {at("2024-01-01T02:30:00Z"), 7}});
  const auto r = resample(s, kHour);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r.values[0], 1.0);
  EXPECT_FALSE(r.values[1]);
  EXPECT_EQ(r.values[2], 7.0);
  EXPECT_EQ(r.missing_count(), 1u);
}

TEST(Resample, Errors) {
  EXPECT_EQ(code_of([] { resample(RawSeries("S", Attribute::CO), kHour); }), Errc::EmptySeries);
  RawSeries s("S", Attribute::PM25, {{at("2024-01-01T00:05:00Z"), 1}});
  EXPECT_THROW(resample(s, Duration{0}), Error);
}

TEST(Resample, IdempotentOnRegularSeries) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  RawSeries s("S", Attribute::PM25);
  for (int i = 0; i < 200; ++i) {
    if (i % 7 == 3) continue;
    s.push_back({at("2024-01-01T00:00:00Z") + kHour * i, n(rng)});
  }
  const auto once = resample(s, kHour, Aggregation::last);
  RawSeries again("S", Attribute::PM25);
  for (std::size_t i = 0; i < once.size(); ++i)
    if (once.values[i]) again.push_back({once.time_at(i), *once.values[i]});
  const auto twice = resample(again, kHour, Aggregation::last);
  EXPECT_EQ(once.start, twice.start);
  EXPECT_EQ(once.values, twice.values);
}

TEST(JoinWeather, AlignedInputsHaveNoGaps) {
  const auto t0 = at("2024-01-01T00:00:00Z");
  std::array<RegularSeries, 4> w{full(t0, 5, 10), full(t0, 5, 20), full(t0, 5, 30), full(t0, 5, 40)};
  const auto m = join_weather(full(t0, 5, 0), w);
  EXPECT_EQ(m.rows(), 5);
  EXPECT_EQ(m.missing_count(), 0);
  EXPECT_DOUBLE_EQ(m.values(2, 0), 12.0);
  EXPECT_DOUBLE_EQ(m.values(2, 3), 42.0);
  EXPECT_DOUBLE_EQ(m.values(2, kPollutantColumn), 2.0);
}

TEST(JoinWeather, LateWeatherLeavesLeadingGaps) {
  const auto t0 = at("2024-01-01T00:00:00Z");
  std::array<RegularSeries, 4> w;
  for (auto& s : w) s = full(t0 + 2 * kHour, 10, 0);
  const auto m = join_weather(full(t0, 5, 0), w);
  EXPECT_EQ(m.rows(), 5);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(m.present(r, c), r >= 2) << r << "," << c;
    EXPECT_TRUE(m.present(r, kPollutantColumn));
  }
}

TEST(JoinWeather, GranularityMismatch) {
  const auto t0 = at("2024-01-01T00:00:00Z");
  std::array<RegularSeries, 4> w;
  for (auto& s : w) s = full(t0, 5, 0);
  w[0].interval = Duration{3 * 3600};
  EXPECT_EQ(code_of([&] { join_weather(full(t0, 5, 0), w); }), Errc::GranularityMismatch);
}

TEST(Impute, InteriorLinearAndEdgeFill) {
  auto m = impute(column_matrix({1.0, std::nullopt, 3.0}));
  EXPECT_TRUE(m.complete());
  EXPECT_DOUBLE_EQ(m.values(1, kPollutantColumn), 2.0);

  m = impute(column_matrix({std::nullopt, 5.0, 5.0}));
  EXPECT_DOUBLE_EQ(m.values(0, kPollutantColumn), 5.0);

  m = impute(column_matrix({2.0, 2.0, 2.0}));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(m.values(i, kPollutantColumn), 2.0);
}

TEST(Impute, AllMissingColumnIsUnimputable) {
  EXPECT_EQ(code_of([] { impute(column_matrix({std::nullopt, std::nullopt, std::nullopt})); }),
            Errc::UnimputableColumn);
}

TEST(Impute, LongGapsExcludeRows) {
  std::vector<std::optional<double>> v(12, 1.0);
  for (int i = 3; i < 8; ++i) v[i] = std::nullopt;
  const auto m = impute(column_matrix(v), 4);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(m.excluded[i], i >= 3 && i < 8) << i;
  const auto lenient = impute(column_matrix(v), 5);
  for (int i = 0; i < 12; ++i) EXPECT_FALSE(lenient.excluded[i]);
}

TEST(Impute, NeverTouchesPresentValues) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  std::bernoulli_distribution gap(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<double>> v(40);
    for (auto& x : v)
      if (!gap(rng)) x = u(rng);
    v[5] = 1.0;
    v[30] = 2.0;
    const auto in = column_matrix(v);
    const auto out = impute(in);
    EXPECT_EQ(out.missing_count(), 0);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) {
        EXPECT_EQ(out.values(static_cast<Eigen::Index>(i), kPollutantColumn), *v[i]);
      }
  }
}

TEST(Norm, TwoPointAndDegenerate) {
  auto m = impute(column_matrix({0.0, 10.0}));
  const auto st = fit_norm(m, {0, 2});
  EXPECT_DOUBLE_EQ(st.mean(kPollutantColumn), 5.0);
  EXPECT_DOUBLE_EQ(st.std(kPollutantColumn), 5.0);
  const auto n = apply_norm(m, st);
  EXPECT_DOUBLE_EQ(n.values(0, kPollutantColumn), -1.0);
  EXPECT_DOUBLE_EQ(n.values(1, kPollutantColumn), 1.0);

  auto c = impute(column_matrix({7.0, 7.0, 7.0}));
  const auto cs = fit_norm(c, {0, 3});
  EXPECT_TRUE(cs.degenerate[kPollutantColumn]);
  EXPECT_DOUBLE_EQ(cs.std(kPollutantColumn), 1.0);
  const auto cn = apply_norm(c, cs);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(cn.values(i, kPollutantColumn), 0.0);
}

TEST(Norm, EmptyFitRange) {
  auto m = impute(column_matrix({0.0, 10.0}));
  EXPECT_EQ(code_of([&] { fit_norm(m, {1, 1}); }), Errc::EmptyFitRange);
}

TEST(Norm, FitUsesOnlyTheRange) {
  auto m = impute(column_matrix({0.0, 2.0, 1000.0}));
  const auto st = fit_norm(m, {0, 2});
  EXPECT_DOUBLE_EQ(st.mean(kPollutantColumn), 1.0);
}

TEST(Norm, InverseIsIdentity) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(30, 8);
  std::vector<std::optional<double>> v;
  for (int i = 0; i < 100; ++i) v.push_back(n(rng));
  const auto m = impute(column_matrix(v));
  const auto st = fit_norm(m, {0, 50});
  const auto back = invert_norm(apply_norm(m, st), st);
  for (int i = 0; i < 100; ++i)
    EXPECT_NEAR(back.values(i, kPollutantColumn), m.values(i, kPollutantColumn), 1e-12);
  EXPECT_NEAR(st.invert(kPollutantColumn, apply_norm(m, st).values(7, kPollutantColumn)),
              m.values(7, kPollutantColumn), 1e-12);
}

TEST(Windows, CountsAndTargets) {
  std::vector<std::optional<double>> v;
  for (int i = 0; i < 10; ++i) v.push_back(100.0 + i);
  const auto m = impute(column_matrix(v));
  const auto w = make_windows(m, 3);
  EXPECT_EQ(w.size(), 7);
  EXPECT_DOUBLE_EQ(w.target(0), 103.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    EXPECT_DOUBLE_EQ(w.target(i), m.values(i + 3, kPollutantColumn));
    EXPECT_EQ(w.target_time(i), m.time_at(i + 3));
    EXPECT_DOUBLE_EQ(w.input(i)(2, kPollutantColumn), m.values(i + 2, kPollutantColumn));
  }
  EXPECT_EQ(make_windows(m, 9).size(), 1);
  EXPECT_EQ(code_of([&] { make_windows(m, 10); }), Errc::SeriesTooShort);
}

TEST(Windows, ExcludedRowsMakeWindowsUntrainable) {
  std::vector<std::optional<double>> v(20, 1.0);
  for (int i = 8; i < 12; ++i) v[i] = std::nullopt;
  const auto m = impute(column_matrix(v), 2);
  const auto w = make_windows(m, 3);
  // Window i touches rows i..i+3.
  for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_EQ(w.trainable(i), i + 3 < 8 || i > 11) << i;
}
