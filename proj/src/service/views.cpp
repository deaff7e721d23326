#include "aqad/service/views.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <regex>

#include "aqad/core/error.hpp"
#include "aqad/detector/event_io.hpp"

namespace aqad::service {

using nlohmann::json;
namespace chr = std::chrono;

SeriesView downsample(const SeriesView& in, std::size_t resolution) {
  const std::size_t n = in.size();
  if (resolution == 0 || n <= resolution || resolution < 2) return in;
  const std::size_t buckets = resolution / 2;
  SeriesView out;
  out.times.reserve(resolution);
  out.values.reserve(resolution);
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets;
    const std::size_t hi = (b + 1) * n / buckets;
    std::optional<std::size_t> imin, imax;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!in.values[i]) continue;
      if (!imin || *in.values[i] < *in.values[*imin]) imin = i;
      if (!imax || *in.values[i] > *in.values[*imax]) imax = i;
    }
    if (!imin) {
      out.times.push_back(in.times[lo]);
      out.values.push_back(std::nullopt);
      continue;
    }
    const std::size_t first = std::min(*imin, *imax);
    const std::size_t second = std::max(*imin, *imax);
    out.times.push_back(in.times[first]);
    out.values.push_back(in.values[first]);
    if (second != first) {
      out.times.push_back(in.times[second]);
      out.values.push_back(in.values[second]);
    }
  }
  return out;
}

SeriesView series(const Dataset& dataset, const std::string& station_id, Attribute attribute,
                  std::optional<Instant> from, std::optional<Instant> to, std::size_t resolution) {
  if (!dataset.find_station(station_id)) throw Error(Errc::UnknownStation, "no station \"" + station_id + "\"");
  const RawSeries* raw = dataset.find_series(station_id, attribute);
  if (!raw || raw->empty()) {
    throw Error(Errc::NotFound, "station \"" + station_id + "\" has no " + std::string(to_string(attribute)) + " readings");
  }
  if (from && to && *to < *from) throw Error(Errc::InvalidArgument, "series range ends before it starts");
  const Instant first = raw->points().front().time;
  const Instant last = raw->points().back().time;
  if ((from && *from > last) || (to && *to < first)) {
    throw Error(Errc::OutOfRange, "requested range misses the data range [" + format_iso8601(first) + ", " +
                                      format_iso8601(last) + "]");
  }
  SeriesView v;
  for (const Reading& r : raw->points()) {
    if ((from && r.time < *from) || (to && r.time > *to)) continue;
    v.times.push_back(r.time);
    v.values.push_back(r.value);
  }
  return downsample(v, resolution);
}

json series_to_json(const SeriesView& s) {
  json times = json::array();
  json values = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    times.push_back(format_iso8601(s.times[i]));
    values.push_back(s.values[i] ? json(*s.values[i]) : json(nullptr));
  }
  return {{"times", times}, {"values", values}};
}

json signals(const pipeline::ExperimentResult& result, const std::string& station_id, Attribute pollutant) {
  auto it = std::find_if(result.models.begin(), result.models.end(), [&](const pipeline::ModelResult& m) {
    return m.key.station_id == station_id && m.key.pollutant == pollutant;
  });
  if (it == result.models.end()) {
    throw Error(Errc::NotFound, "experiment " + result.experiment_id + " has no model for " + station_id + "/" +
                                    std::string(to_string(pollutant)));
  }
  const pipeline::ModelResult& m = *it;
  auto array = [](const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); };
  json times = json::array();
  for (Instant t : m.predictions.times) times.push_back(format_iso8601(t));
  json windows = json::array();
  for (const auto& w : m.windows) {
    if (w.end <= w.begin || static_cast<std::size_t>(w.end) > m.errors.times.size()) continue;
    json row = {{"start", format_iso8601(m.errors.times[static_cast<std::size_t>(w.begin)])},
                {"end", format_iso8601(m.errors.times[static_cast<std::size_t>(w.end - 1)])},
                {"calm", w.calm},
                {"theta", w.threshold ? json(w.threshold->theta) : json(nullptr)},
                {"k", w.threshold ? json(w.threshold->k) : json(nullptr)}};
    windows.push_back(std::move(row));
  }
  json events = json::array();
  for (const auto& ev : m.events) events.push_back(detector::event_to_json(ev));
  return {{"experiment_id", result.experiment_id},
          {"station_id", station_id},
          {"attribute", std::string(to_string(pollutant))},
          {"state", std::string(pipeline::to_string(m.state))},
          {"mape", m.mape ? json(*m.mape) : json(nullptr)},
          {"h", m.errors.h},
          {"w_ma", m.errors.w_ma},
          {"times", times},
          {"y", array(m.predictions.y)},
          {"y_hat", array(m.predictions.y_hat)},
          {"e", array(m.errors.e)},
          {"e_s", array(m.errors.e_s)},
          {"windows", windows},
          {"events", events}};
}

std::string_view to_string(PeriodLevel level) noexcept {
  switch (level) {
    case PeriodLevel::year: return "year";
    case PeriodLevel::month: return "month";
    case PeriodLevel::day: return "day";
  }
  return "";
}

PeriodLevel period_level_from_string(std::string_view name) {
  for (PeriodLevel l : {PeriodLevel::year, PeriodLevel::month, PeriodLevel::day}) {
    if (to_string(l) == name) return l;
  }
  throw Error(Errc::InvalidArgument, "level must be year, month or day, got \"" + std::string(name) + "\"");
}

namespace {

struct Civil {
  int year;
  unsigned month;
  unsigned day;
  unsigned hour;
};

Civil civil(Instant t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{day};
  const auto hour = chr::duration_cast<chr::hours>(t - day).count();
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
          static_cast<unsigned>(hour)};
}

std::string label(int y, unsigned m = 0, unsigned d = 0) {
  char buf[32];
  if (m == 0) std::snprintf(buf, sizeof buf, "%04d", y);
  else if (d == 0) std::snprintf(buf, sizeof buf, "%04d-%02u", y, m);
  else std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

}  // namespace

PeriodAggregate period_aggregate(const RegularSeries& hourly, PeriodLevel level, const std::string& anchor) {
  PeriodAggregate out;
  out.level = level;
  out.anchor = anchor;
  int anchor_year = 0;
  unsigned anchor_month = 0;
  std::smatch m;
  if (level == PeriodLevel::month) {
    if (!std::regex_match(anchor, m, std::regex(R"((\d{4}))"))) {
      throw Error(Errc::InvalidArgument, "month level needs a YYYY anchor, got \"" + anchor + "\"");
    }
    anchor_year = std::stoi(m[1]);
  } else if (level == PeriodLevel::day) {
    if (!std::regex_match(anchor, m, std::regex(R"((\d{4})-(\d{2}))")) || std::stoi(m[2]) < 1 || std::stoi(m[2]) > 12) {
      throw Error(Errc::InvalidArgument, "day level needs a YYYY-MM anchor, got \"" + anchor + "\"");
    }
    anchor_year = std::stoi(m[1]);
    anchor_month = static_cast<unsigned>(std::stoi(m[2]));
  }

  struct Acc {
    PeriodBucket bucket;
    std::vector<double> sum;
    std::vector<int> count;
  };
  std::map<std::pair<int, unsigned>, Acc> acc;  // (year, month) or (year, day) key per level

  for (std::size_t i = 0; i < hourly.size(); ++i) {
    const Instant t = hourly.time_at(i);
    const Civil c = civil(t);
    std::pair<int, unsigned> key;
    std::size_t slot = 0;
    std::size_t width = 0;
    switch (level) {
      case PeriodLevel::year:
        key = {c.year, 0};
        slot = c.month - 1;
        width = 12;
        break;
      case PeriodLevel::month:
        if (c.year != anchor_year) continue;
        key = {c.year, c.month};
        slot = c.day - 1;
        width = static_cast<unsigned>(
            chr::year_month_day_last{chr::year{c.year} / chr::month{c.month} / chr::last}.day());
        break;
      case PeriodLevel::day:
        if (c.year != anchor_year || c.month != anchor_month) continue;
        key = {c.year, c.day};
        slot = c.hour;
        width = 24;
        break;
    }
    auto [it, inserted] = acc.try_emplace(key);
    Acc& a = it->second;
    if (inserted) {
      a.sum.assign(width, 0.0);
      a.count.assign(width, 0);
      switch (level) {
        case PeriodLevel::year:
          a.bucket.label = label(c.year);
          a.bucket.start = chr::sys_days{chr::year{c.year} / 1 / 1};
          break;
        case PeriodLevel::month:
          a.bucket.label = label(c.year, c.month);
          a.bucket.start = chr::sys_days{chr::year{c.year} / chr::month{c.month} / 1};
          break;
        case PeriodLevel::day: {
          a.bucket.label = label(c.year, c.month, c.day);
          a.bucket.start = chr::sys_days{chr::year{c.year} / chr::month{c.month} / chr::day{c.day}};
          const chr::weekday first{chr::sys_days{chr::year{c.year} / chr::month{c.month} / 1}};
          const unsigned offset = first.iso_encoding() - 1;
          a.bucket.week_row = static_cast<int>((c.day - 1 + offset) / 7);
          a.bucket.weekday = static_cast<int>((c.day - 1 + offset) % 7);
          break;
        }
      }
    }
    if (hourly.values[i]) {
      a.sum[slot] += *hourly.values[i];
      ++a.count[slot];
    }
  }

  for (auto& [key, a] : acc) {
    a.bucket.values.resize(a.sum.size());
    for (std::size_t s = 0; s < a.sum.size(); ++s) {
      if (a.count[s] > 0) a.bucket.values[s] = a.sum[s] / a.count[s];
    }
    out.buckets.push_back(std::move(a.bucket));
  }
  return out;
}

json aggregate_to_json(const PeriodAggregate& a) {
  json buckets = json::array();
  for (const auto& b : a.buckets) {
    json values = json::array();
    for (const auto& v : b.values) values.push_back(v ? json(*v) : json(nullptr));
    json row = {{"label", b.label}, {"start", format_iso8601(b.start)}, {"values", values}};
    if (a.level == PeriodLevel::day) {
      row["week_row"] = b.week_row;
      row["weekday"] = b.weekday;
    }
    buckets.push_back(std::move(row));
  }
  return {{"level", std::string(to_string(a.level))}, {"anchor", a.anchor}, {"buckets", buckets}};
}

}  // namespace aqad::service
