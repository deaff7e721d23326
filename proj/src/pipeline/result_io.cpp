#include "aqad/pipeline/runner.hpp"

#include "aqad/core/error.hpp"
#include "aqad/detector/event_io.hpp"

namespace aqad::pipeline {
namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json selection_json(const Selection& s) {
  std::vector<std::string> pollutants;
  for (Attribute a : s.pollutants) pollutants.emplace_back(to_string(a));
  return {{"stations", s.stations}, {"pollutants", pollutants}};
}

json windows_json(const std::vector<detector::WindowDiagnostics>& windows) {
  json out = json::array();
  for (const auto& w : windows) {
    out.push_back({{"begin", w.begin},
                   {"end", w.end},
                   {"calm", w.calm},
                   {"threshold", w.threshold ? detector::diagnostics_to_json(*w.threshold) : json(nullptr)}});
  }
  return out;
}

json events_json(const std::vector<detector::AnomalousEvent>& events) {
  json out = json::array();
  for (const auto& ev : events) out.push_back(detector::event_to_json(ev));
  return out;
}

json summary_json(const ExperimentSummary& s) {
  return {{"model_count", s.model_count},
          {"failed_count", s.failed_count},
          {"event_count", s.event_count},
          {"mean_events_per_model", s.mean_events_per_model}};
}

json header_json(const ExperimentResult& r) {
  return {{"experiment_id", r.experiment_id}, {"config_hash", r.config_hash}, {"dataset_id", r.dataset_id},
          {"seed", r.seed},                   {"interval", r.interval_seconds}, {"config", config_to_json(r.config)},
          {"selection", selection_json(r.selection)}, {"summary", summary_json(r.summary)}};
}

json model_header_json(const ModelResult& m) {
  return {{"station_id", m.key.station_id},
          {"pollutant", std::string(to_string(m.key.pollutant))},
          {"state", std::string(to_string(m.state))},
          {"error", m.error},
          {"mape", optional_json(m.mape)},
          {"train_windows", m.train_windows},
          {"loss_history", m.loss_history},
          {"event_count", m.events.size()},
          {"windows", windows_json(m.windows)},
          {"events", events_json(m.events)}};
}

}  // namespace

json report_to_json(const ExperimentResult& r) {
  json j = header_json(r);
  j["models"] = json::array();
  for (const ModelResult& m : r.models) j["models"].push_back(model_header_json(m));
  return j;
}

json result_to_json(const ExperimentResult& r) {
  json j = header_json(r);
  j["models"] = json::array();
  for (const ModelResult& m : r.models) {
    json mj = model_header_json(m);
    std::vector<std::int64_t> times;
    for (Instant t : m.predictions.times) times.push_back(to_epoch_seconds(t));
    mj["checkpoint"] = m.checkpoint;
    mj["signals"] = {{"times", times},
                     {"y", vector_json(m.predictions.y)},
                     {"y_hat", vector_json(m.predictions.y_hat)},
                     {"e", vector_json(m.errors.e)},
                     {"e_s", vector_json(m.errors.e_s)},
                     {"h", m.errors.h},
                     {"w_ma", m.errors.w_ma}};
    j["models"].push_back(std::move(mj));
  }
  return j;
}

ExperimentResult result_from_json(const json& j) {
  try {
    ExperimentResult r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.interval_seconds = j.at("interval").get<std::int64_t>();
    r.config = config_from_json(j.at("config"));
    r.selection.stations = j.at("selection").at("stations").get<std::vector<std::string>>();
    for (const auto& p : j.at("selection").at("pollutants")) {
      r.selection.pollutants.push_back(attribute_from_string(p.get<std::string>()));
    }
    for (const json& mj : j.at("models")) {
      ModelResult m;
      m.key = {mj.at("station_id").get<std::string>(), attribute_from_string(mj.at("pollutant").get<std::string>())};
      m.state = model_state_from_string(mj.at("state").get<std::string>());
      m.error = mj.at("error").get<std::string>();
      if (!mj.at("mape").is_null()) m.mape = mj.at("mape").get<double>();
      m.train_windows = mj.at("train_windows").get<std::int64_t>();
      m.loss_history = mj.at("loss_history").get<std::vector<double>>();
      for (const json& wj : mj.at("windows")) {
        detector::WindowDiagnostics w;
        w.begin = wj.at("begin").get<Eigen::Index>();
        w.end = wj.at("end").get<Eigen::Index>();
        w.calm = wj.at("calm").get<bool>();
        if (!wj.at("threshold").is_null()) w.threshold = detector::diagnostics_from_json(wj.at("threshold"));
        m.windows.push_back(w);
      }
      for (const json& ej : mj.at("events")) m.events.push_back(detector::event_from_json(ej));
      if (mj.contains("checkpoint")) m.checkpoint = mj.at("checkpoint").get<std::string>();
      if (mj.contains("signals")) {
        const json& s = mj.at("signals");
        for (auto t : s.at("times").get<std::vector<std::int64_t>>()) m.predictions.times.push_back(from_epoch_seconds(t));
        m.predictions.y = vector_from(s.at("y"));
        m.predictions.y_hat = vector_from(s.at("y_hat"));
        m.errors.times = m.predictions.times;
        m.errors.e = vector_from(s.at("e"));
        m.errors.e_s = vector_from(s.at("e_s"));
        m.errors.h = s.at("h").get<Eigen::Index>();
        m.errors.w_ma = s.at("w_ma").get<Eigen::Index>();
      }
      r.models.push_back(std::move(m));
    }
    r.summary = summarize(r.models);
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("experiment result: ") + e.what());
  }
}

}  // namespace aqad::pipeline
