#pragma once

#include <json.hpp>

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aqad/evaluation/evaluation.hpp"
#include "aqad/pipeline/runner.hpp"
#include "aqad/service/store.hpp"

namespace aqad::service {

enum class JobState { pending, running, done, cancelled };

std::string_view to_string(JobState s) noexcept;

struct ModelStatus {
  pipeline::ModelKey key;
  pipeline::ModelState state = pipeline::ModelState::pending;
  std::string error;
};

struct ExperimentStatus {
  std::string id;
  JobState state = JobState::pending;
  std::vector<JobState> history;  // every state the job has been in, in order
  std::vector<ModelStatus> models;
  std::int64_t finished = 0;  // models done, failed or cancelled
  bool cached = false;        // served from a stored result without running
};

nlohmann::json status_to_json(const ExperimentStatus& s);

struct SubmitRequest {
  pipeline::PipelineConfig config;
  std::string dataset_id;
  pipeline::Selection selection;
  std::uint64_t seed = 0;
  std::string author = "api";
};

// {"config": {...} (optional, defaults), "dataset_id", "seed", "selection":
//  {"stations": [...], "pollutants": [...]}}
SubmitRequest submit_request_from_json(const nlohmann::json& j);

/// Runs experiments off the caller's thread. Finished experiments go to the
/// store, keyed by content id, so resubmitting identical work returns the
/// stored result. Cancellation is honoured between models.
class ExperimentService {
 public:
  explicit ExperimentService(Store& store, unsigned threads_per_job = 1);
  ~ExperimentService();  // cancels and joins running jobs

  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  /// Throws InvalidConfig (message lists the violations), UnknownDataset,
  /// UnknownStation.
  std::string submit(const SubmitRequest& request);
  ExperimentStatus poll(const std::string& id) const;  // throws UnknownExperiment
  ExperimentStatus cancel(const std::string& id);
  ExperimentStatus wait(const std::string& id) const;
  /// Stored result when done; for a job that was cancelled, the models that
  /// completed; nullopt while still running.
  std::optional<pipeline::ExperimentResult> fetch(const std::string& id) const;
  std::vector<ExperimentStatus> list() const;

 private:
  struct Job;

  ExperimentStatus stored_status(const std::string& id) const;

  Store& store_;
  unsigned threads_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::shared_ptr<Job>> retired_;  // replaced cancelled jobs, joined on destruction
};

/// Scores every model of a result against label rows for its station and
/// pollutant, over the span the model produced predictions for.
evaluation::MetricReport evaluate_result(const pipeline::ExperimentResult& result,
                                         const std::vector<evaluation::LabelRow>& labels, double beta);

}  // namespace aqad::service
