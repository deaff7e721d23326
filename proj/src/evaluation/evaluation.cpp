#include "aqad/evaluation/evaluation.hpp"

#include <algorithm>

#include "aqad/core/csv.hpp"
#include "aqad/core/error.hpp"

namespace aqad::evaluation {
namespace {

std::vector<Span> clip_all(std::span<const Span> spans, Span range) {
  std::vector<Span> out;
  for (const Span& s : spans) {
    Span c{std::max(s.begin, range.begin), std::min(s.end, range.end)};
    if (!c.empty()) out.push_back(c);
  }
  return out;
}

bool covered(const std::vector<Span>& spans, Instant from, Instant to) {
  return std::any_of(spans.begin(), spans.end(),
                     [&](const Span& s) { return s.begin <= from && to <= s.end; });
}

}  // namespace

LabeledIntervals build_intervals(std::span<const Span> gt, std::span<const Span> det, Span range) {
  if (range.empty()) throw Error(Errc::InvalidArgument, "evaluation range is empty");
  const std::vector<Span> g = clip_all(gt, range);
  const std::vector<Span> d = clip_all(det, range);

  LabeledIntervals li;
  li.boundaries = {range.begin, range.end};
  for (const auto* spans : {&g, &d}) {
    for (const Span& s : *spans) {
      li.boundaries.push_back(s.begin);
      li.boundaries.push_back(s.end);
    }
  }
  std::sort(li.boundaries.begin(), li.boundaries.end());
  li.boundaries.erase(std::unique(li.boundaries.begin(), li.boundaries.end()), li.boundaries.end());

  for (std::size_t i = 0; i + 1 < li.boundaries.size(); ++i) {
    const Instant from = li.boundaries[i];
    const Instant to = li.boundaries[i + 1];
    li.gt.push_back(covered(g, from, to));
    li.det.push_back(covered(d, from, to));
    li.weights.push_back(static_cast<double>((to - from).count()));
  }
  return li;
}

double f_beta_score(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

Scores weighted_metrics(const LabeledIntervals& li, double beta) {
  if (!(beta > 0.0)) throw Error(Errc::InvalidArgument, "beta must be > 0");
  Scores s;
  for (std::size_t i = 0; i < li.size(); ++i) {
    const double w = li.weights[i];
    if (li.gt[i] && li.det[i]) s.tp += w;
    if (!li.gt[i] && li.det[i]) s.fp += w;
    if (li.gt[i] && !li.det[i]) s.fn += w;
  }
  if (s.tp + s.fp > 0.0) s.precision = s.tp / (s.tp + s.fp);
  if (s.tp + s.fn > 0.0) s.recall = s.tp / (s.tp + s.fn);
  if (s.precision && s.recall) s.f_beta = f_beta_score(*s.precision, *s.recall, beta);
  return s;
}

Span event_span(const detector::AnomalousEvent& ev, Duration interval) {
  return {ev.start, ev.end + interval};
}

std::vector<LabelRow> parse_labels(std::string_view text) {
  std::vector<LabelRow> rows;
  csv::for_each_record(text, "station_id,attribute,start,end", [&](const auto& f, std::size_t line) {
    if (f.size() != 4) throw Error(Errc::ParseError, "line " + std::to_string(line) + ": expected 4 fields");
    LabelRow row;
    row.station_id = f[0];
    try {
      row.attribute = attribute_from_string(f[1]);
      row.span = {parse_iso8601(f[2]), parse_iso8601(f[3])};
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
    }
    if (row.span.end < row.span.begin) {
      throw Error(Errc::ParseError, "line " + std::to_string(line) + ": end before start");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

std::string write_labels(const std::vector<LabelRow>& rows) {
  std::string out = "station_id,attribute,start,end\n";
  for (const LabelRow& r : rows) {
    out += csv::quote(r.station_id) + ',' + std::string(to_string(r.attribute)) + ',' +
           format_iso8601(r.span.begin) + ',' + format_iso8601(r.span.end) + '\n';
  }
  return out;
}

void fill_means(MetricReport& report) {
  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const MetricRow& row : report.rows) {
      if (const auto& v = row.scores.*member) {
        sum += *v;
        ++n;
      }
    }
    return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
  };
  report.mean_precision = mean_of(&Scores::precision);
  report.mean_recall = mean_of(&Scores::recall);
  report.mean_f_beta = mean_of(&Scores::f_beta);
}

nlohmann::json report_to_json(const MetricReport& report) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const MetricRow& r : report.rows) {
    rows.push_back({{"station_id", r.station_id},
                    {"attribute", std::string(to_string(r.attribute))},
                    {"precision", opt(r.scores.precision)},
                    {"recall", opt(r.scores.recall)},
                    {"f_beta", opt(r.scores.f_beta)},
                    {"tp_seconds", r.scores.tp},
                    {"fp_seconds", r.scores.fp},
                    {"fn_seconds", r.scores.fn}});
  }
  return {{"beta", report.beta},
          {"rows", rows},
          {"mean", {{"precision", opt(report.mean_precision)},
                    {"recall", opt(report.mean_recall)},
                    {"f_beta", opt(report.mean_f_beta)}}}};
}

}  // namespace aqad::evaluation
