#include "aqad/pipeline/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "aqad/core/error.hpp"
#include "aqad/core/hash.hpp"
#include "aqad/core/transforms.hpp"
#include "aqad/regressor/checkpoint.hpp"
#include "aqad/regressor/train.hpp"

namespace aqad::pipeline {
namespace {

// Intermediate data flowing between blocks of one sub-pipeline.
struct ModelWork {
  std::optional<RegularSeries> pollutant;
  std::array<RegularSeries, 4> weather;
  std::optional<FeatureMatrix> features;
  std::optional<FeatureMatrix> raw_features;  // before normalization
  std::optional<NormStats> norm;
  std::optional<WindowedDataset> windows;
  std::optional<regressor::PredictionSet> predictions;
  std::optional<detector::ErrorSeries> errors;
  RowRange fit_rows;
};

std::uint64_t derive_seed(std::uint64_t seed, const ModelKey& key) {
  const std::string digest =
      sha256_hex(std::to_string(seed) + "|" + key.station_id + "|" + std::string(to_string(key.pollutant)));
  return std::stoull(digest.substr(0, 16), nullptr, 16);
}

template <typename T>
T& need(std::optional<T>& slot, const char* what) {
  if (!slot) throw Error(Errc::InvalidConfig, std::string("no ") + what + " available at this block");
  return *slot;
}

RowRange training_rows(const PipelineConfig& c, Eigen::Index rows) {
  if (c.find("window")) {
    const auto l_s = param_int(c, "window", "l_s");
    const Eigen::Index windows = std::max<Eigen::Index>(0, rows - l_s);
    const auto train = static_cast<Eigen::Index>(std::floor(c.split * static_cast<double>(windows)));
    return {0, std::min(rows, std::max<Eigen::Index>(1, train) + l_s)};
  }
  return {0, std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(c.split * static_cast<double>(rows))))};
}

regressor::TrainConfig train_config(const PipelineConfig& c, std::uint64_t seed) {
  regressor::TrainConfig t;
  t.epochs = static_cast<int>(param_int(c, "lstm_regressor", "epochs"));
  t.learning_rate = param_real(c, "lstm_regressor", "learning_rate");
  t.batch_size = static_cast<int>(param_int(c, "lstm_regressor", "batch_size"));
  t.optimizer = regressor::optimizer_from_string(param_choice(c, "lstm_regressor", "optimizer"));
  t.clip_norm = param_real(c, "lstm_regressor", "clip_norm");
  t.seed = seed;
  return t;
}

detector::DetectConfig detect_config(const PipelineConfig& c) {
  detector::DetectConfig d;
  d.h = param_int(c, "find_anomaly", "h");
  const auto stride = param_int(c, "find_anomaly", "stride");
  d.stride = stride > 0 ? stride : std::max<Eigen::Index>(1, d.h / 2);
  d.min_gap = param_int(c, "find_anomaly", "min_gap");
  const double k_min = param_real(c, "find_anomaly", "k_min");
  const double k_max = param_real(c, "find_anomaly", "k_max");
  const double k_step = param_real(c, "find_anomaly", "k_step");
  d.k_grid.clear();
  for (int i = 0;; ++i) {
    const double k = k_min + k_step * i;
    if (k > k_max + 1e-9 * k_step) break;
    d.k_grid.push_back(k);
  }
  return d;
}

void finish_predictions(ModelResult& out, ModelWork& w, regressor::PredictionSet p) {
  if (w.norm) {
    const double mean = w.norm->mean(kPollutantColumn);
    const double sd = w.norm->std(kPollutantColumn);
    p.y = (p.y.array() * sd + mean).matrix();
    p.y_hat = (p.y_hat.array() * sd + mean).matrix();
  }
  if (!p.empty()) out.mape = regressor::mape(p);
  w.predictions = std::move(p);
}

}  // namespace

std::string_view to_string(ModelState s) noexcept {
  switch (s) {
    case ModelState::pending: return "pending";
    case ModelState::running: return "running";
    case ModelState::done: return "done";
    case ModelState::failed: return "failed";
    case ModelState::cancelled: return "cancelled";
  }
  return "";
}

ModelState model_state_from_string(std::string_view name) {
  for (ModelState s : {ModelState::pending, ModelState::running, ModelState::done, ModelState::failed,
                       ModelState::cancelled}) {
    if (to_string(s) == name) return s;
  }
  throw Error(Errc::ParseError, "unknown model state \"" + std::string(name) + "\"");
}

std::vector<ModelKey> plan_models(const Dataset& dataset, const Selection& selection) {
  std::vector<std::string> stations = selection.stations;
  if (stations.empty()) {
    for (const Station& s : dataset.stations) stations.push_back(s.id);
  }
  std::vector<ModelKey> out;
  for (const std::string& sid : stations) {
    if (!dataset.find_station(sid)) throw Error(Errc::UnknownStation, "station \"" + sid + "\" not in dataset");
    for (Attribute p : kPollutants) {
      const bool wanted = selection.pollutants.empty()
                              ? dataset.find_series(sid, p) != nullptr
                              : std::find(selection.pollutants.begin(), selection.pollutants.end(), p) !=
                                    selection.pollutants.end();
      if (wanted) out.push_back({sid, p});
    }
  }
  return out;
}

std::string experiment_id(const std::string& config_hash, const std::string& dataset_id, std::uint64_t seed,
                          const Selection& selection) {
  std::string key = config_hash + "|" + dataset_id + "|" + std::to_string(seed) + "|";
  for (const auto& s : selection.stations) key += s + ",";
  key += "|";
  for (Attribute a : selection.pollutants) key += std::string(to_string(a)) + ",";
  return "exp-" + sha256_hex(key).substr(0, 16);
}

ModelResult run_model(const PipelineConfig& c, const Dataset& dataset, const ModelKey& key, std::uint64_t seed,
                      const std::string& exp_id) {
  ModelResult out;
  out.key = key;
  out.state = ModelState::running;
  const Duration interval{c.interval_seconds};
  const std::uint64_t model_seed = derive_seed(seed, key);
  ModelWork w;
  try {
    for (const BlockSpec& block : c.blocks) {
      const std::string& name = block.name;
      if (name == "resample") {
        const auto agg = aggregation_from_string(param_choice(c, name, "agg"));
        const RawSeries* raw = dataset.find_series(key.station_id, key.pollutant);
        if (!raw) {
          throw Error(Errc::EmptySeries, "no " + std::string(to_string(key.pollutant)) + " readings at " +
                                             key.station_id);
        }
        w.pollutant = resample(*raw, interval, agg);
        for (std::size_t i = 0; i < kWeather.size(); ++i) {
          const RawSeries* ws = dataset.find_series(key.station_id, kWeather[i]);
          w.weather[i] = ws ? resample(*ws, interval, agg) : RegularSeries{w.pollutant->start, interval, {}};
        }
      } else if (name == "join_weather") {
        w.features = join_weather(need(w.pollutant, "regular series"), w.weather);
      } else if (name == "impute") {
        w.features = impute(need(w.features, "feature matrix"),
                            static_cast<std::size_t>(param_int(c, name, "max_gap")));
        w.raw_features = w.features;
        w.fit_rows = training_rows(c, w.features->rows());
      } else if (name == "normalize") {
        FeatureMatrix& f = need(w.features, "feature matrix");
        w.norm = fit_norm(f, w.fit_rows);
        f = apply_norm(f, *w.norm);
      } else if (name == "window") {
        w.windows = make_windows(need(w.features, "feature matrix"), param_int(c, name, "l_s"));
        out.train_windows = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::floor(c.split * static_cast<double>(w.windows->size()))));
      } else if (name == "lstm_regressor") {
        const WindowedDataset& data = need(w.windows, "windows");
        auto params = regressor::init(param_int(c, name, "hidden_dim"), model_seed, data.input_dim());
        auto trained = regressor::train(std::move(params), data.head(out.train_windows), train_config(c, model_seed));
        out.loss_history = trained.loss_history;
        out.checkpoint = regressor::write_checkpoint(
            {trained.params, w.norm.value_or(NormStats{}), data.length(), config_hash(c)});
        finish_predictions(out, w, regressor::predict_series(trained.params, data));
      } else if (name == "persistence_regressor") {
        finish_predictions(out, w, regressor::persistence_baseline(need(w.windows, "windows")));
      } else if (name == "errors") {
        w.errors = detector::errors(need(w.predictions, "predictions"));
      } else if (name == "smooth") {
        detector::ErrorSeries& e = need(w.errors, "errors");
        e.w_ma = param_int(c, name, "w_ma");
        e.e_s = detector::smooth(e.e, e.w_ma);
      } else if (name == "find_anomaly") {
        detector::ErrorSeries& e = need(w.errors, "errors");
        if (e.e_s.size() != e.e.size()) throw Error(Errc::InvalidConfig, "find_anomaly needs smoothed errors");
        detector::DetectConfig cfg = detect_config(c);
        e.h = cfg.h;
        const FeatureMatrix& base = need(w.raw_features, "feature matrix");
        const double scale = w.norm ? w.norm->std(kPollutantColumn) : fit_norm(base, w.fit_rows).std(kPollutantColumn);
        cfg.min_error = param_real(c, name, "calm_level") * scale;
        auto detection = detector::detect_smoothed(e.e_s, e.times, cfg);
        out.windows = std::move(detection.windows);
        out.events = std::move(detection.events);
        for (std::size_t i = 0; i < out.events.size(); ++i) {
          auto& ev = out.events[i];
          ev.id = exp_id + ":" + key.station_id + ":" + std::string(to_string(key.pollutant)) + ":" + std::to_string(i);
          ev.station_id = key.station_id;
          ev.attribute = key.pollutant;
          ev.experiment_id = exp_id;
          ev.dataset_id = dataset.id;
        }
      } else {
        throw Error(Errc::InvalidConfig, "unknown block " + name);
      }
    }
    if (w.predictions) out.predictions = std::move(*w.predictions);
    if (w.errors) out.errors = std::move(*w.errors);
    out.state = ModelState::done;
  } catch (const Error& e) {
    out.state = ModelState::failed;
    out.error = e.what();
  }
  return out;
}

ExperimentSummary summarize(const std::vector<ModelResult>& models) {
  ExperimentSummary s;
  s.model_count = static_cast<std::int64_t>(models.size());
  for (const ModelResult& m : models) {
    if (m.state == ModelState::failed) ++s.failed_count;
    s.event_count += static_cast<std::int64_t>(m.events.size());
  }
  s.mean_events_per_model =
      s.model_count > 0 ? static_cast<double>(s.event_count) / static_cast<double>(s.model_count) : 0.0;
  return s;
}

ExperimentResult run(const PipelineConfig& config, const Dataset& dataset, const Selection& selection,
                     std::uint64_t seed, const RunOptions& options) {
  if (auto v = validate(config); !v.empty()) {
    throw Error(Errc::InvalidConfig, v.front().field + ": " + v.front().message);
  }
  const PipelineConfig canonical = canonicalize(config);
  ExperimentResult result;
  result.config = canonical;
  result.config_hash = config_hash(canonical);
  result.dataset_id = dataset.id;
  result.seed = seed;
  result.interval_seconds = canonical.interval_seconds;
  result.selection = selection;
  result.experiment_id = experiment_id(result.config_hash, dataset.id, seed, selection);

  const std::vector<ModelKey> keys = plan_models(dataset, selection);
  result.models.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) result.models[i].key = keys[i];

  auto notify = [&](std::size_t i, ModelState s) {
    if (options.on_progress) options.on_progress(i, keys[i], s);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      if (options.stop.stop_requested()) {
        result.models[i].state = ModelState::cancelled;
        notify(i, ModelState::cancelled);
        continue;
      }
      notify(i, ModelState::running);
      result.models[i] = run_model(canonical, dataset, keys[i], seed, result.experiment_id);
      notify(i, result.models[i].state);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(keys.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  result.summary = summarize(result.models);
  return result;
}

std::vector<detector::AnomalousEvent> all_events(const ExperimentResult& r) {
  std::vector<detector::AnomalousEvent> out;
  for (const ModelResult& m : r.models) out.insert(out.end(), m.events.begin(), m.events.end());
  return out;
}

}  // namespace aqad::pipeline
