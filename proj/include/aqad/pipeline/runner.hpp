#pragma once

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "aqad/core/series.hpp"
#include "aqad/detector/detector.hpp"
#include "aqad/pipeline/config.hpp"
#include "aqad/regressor/predict.hpp"

namespace aqad::pipeline {

struct Selection {
  std::vector<std::string> stations;  // empty: every station in the dataset
  std::vector<Attribute> pollutants;  // empty: every pollutant present
};

struct ModelKey {
  std::string station_id;
  Attribute pollutant = Attribute::PM25;

  friend bool operator==(const ModelKey&, const ModelKey&) = default;
};

enum class ModelState { pending, running, done, failed, cancelled };

std::string_view to_string(ModelState s) noexcept;
ModelState model_state_from_string(std::string_view name);

/// Everything one (station, pollutant) sub-pipeline produced. Predictions
/// and errors are in the pollutant's original units.
struct ModelResult {
  ModelKey key;
  ModelState state = ModelState::pending;
  std::string error;
  std::string checkpoint;  // serialized LSTM checkpoint, empty for other regressors
  std::vector<double> loss_history;
  std::int64_t train_windows = 0;
  regressor::PredictionSet predictions;
  detector::ErrorSeries errors;
  std::vector<detector::WindowDiagnostics> windows;
  std::vector<detector::AnomalousEvent> events;
  std::optional<double> mape;
};

struct ExperimentSummary {
  std::int64_t model_count = 0;
  std::int64_t failed_count = 0;
  std::int64_t event_count = 0;
  double mean_events_per_model = 0.0;
};

struct ExperimentResult {
  std::string experiment_id;
  std::string config_hash;
  std::string dataset_id;
  std::uint64_t seed = 0;
  std::int64_t interval_seconds = 3600;
  PipelineConfig config;
  Selection selection;
  std::vector<ModelResult> models;
  ExperimentSummary summary;
};

struct RunOptions {
  unsigned threads = 1;
  std::stop_token stop;  // checked before each model starts
  // Called from worker threads whenever a model changes state.
  std::function<void(std::size_t index, const ModelKey&, ModelState)> on_progress;
};

/// Models the selection expands to, in execution order. Throws
/// UnknownStation for stations absent from the dataset.
std::vector<ModelKey> plan_models(const Dataset& dataset, const Selection& selection);

/// Content address of an experiment: identical config, dataset, seed and
/// selection give the same id.
std::string experiment_id(const std::string& config_hash, const std::string& dataset_id, std::uint64_t seed,
                          const Selection& selection);

/// Runs the pipeline per (station, pollutant). A failing model is recorded
/// with its error and never aborts the others. Throws InvalidConfig for an
/// invalid config.
ExperimentResult run(const PipelineConfig& config, const Dataset& dataset, const Selection& selection,
                     std::uint64_t seed, const RunOptions& options = {});

/// Single model; exposed for tests.
ModelResult run_model(const PipelineConfig& canonical, const Dataset& dataset, const ModelKey& key,
                      std::uint64_t seed, const std::string& experiment_id);

ExperimentSummary summarize(const std::vector<ModelResult>& models);

// Full result, including signals, for storage. Round-trips exactly.
nlohmann::json result_to_json(const ExperimentResult& r);
ExperimentResult result_from_json(const nlohmann::json& j);

/// Report without per-step signals: summary, per-model status, MAPE, loss
/// history, window diagnostics and events.
nlohmann::json report_to_json(const ExperimentResult& r);

std::vector<detector::AnomalousEvent> all_events(const ExperimentResult& r);

}  // namespace aqad::pipeline
