#include "aqad/service/experiments.hpp"

#include <algorithm>

#include "aqad/core/error.hpp"

namespace aqad::service {

using nlohmann::json;

struct ExperimentService::Job {
  ExperimentStatus status;
  std::optional<pipeline::ExperimentResult> result;
  std::stop_source stop;
  std::jthread thread;
};

std::string_view to_string(JobState s) noexcept {
  switch (s) {
    case JobState::pending: return "pending";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::cancelled: return "cancelled";
  }
  return "";
}

json status_to_json(const ExperimentStatus& s) {
  json models = json::array();
  for (const auto& m : s.models) {
    json row = {{"station_id", m.key.station_id},
                {"pollutant", std::string(to_string(m.key.pollutant))},
                {"state", std::string(pipeline::to_string(m.state))}};
    if (!m.error.empty()) row["error"] = m.error;
    models.push_back(std::move(row));
  }
  json history = json::array();
  for (JobState h : s.history) history.push_back(std::string(to_string(h)));
  return {{"id", s.id},
          {"state", std::string(to_string(s.state))},
          {"history", history},
          {"models", models},
          {"finished", s.finished},
          {"total", s.models.size()},
          {"cached", s.cached}};
}

SubmitRequest submit_request_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "submit body must be an object");
  SubmitRequest r;
  try {
    r.config = j.contains("config") ? pipeline::config_from_json(j.at("config")) : pipeline::default_config();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.author = j.value("author", r.author);
    if (j.contains("selection")) {
      const json& sel = j.at("selection");
      r.selection.stations = sel.value("stations", std::vector<std::string>{});
      for (const auto& p : sel.value("pollutants", std::vector<std::string>{})) {
        r.selection.pollutants.push_back(attribute_from_string(p));
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("submit body: ") + e.what());
  }
  return r;
}

ExperimentService::ExperimentService(Store& store, unsigned threads_per_job)
    : store_(store), threads_(std::max(1u, threads_per_job)) {}

ExperimentService::~ExperimentService() {
  std::vector<std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, job] : jobs_) jobs.push_back(job);
    jobs.insert(jobs.end(), retired_.begin(), retired_.end());
  }
  for (auto& job : jobs) {
    job->stop.request_stop();
    if (job->thread.joinable()) job->thread.join();
  }
}

std::string ExperimentService::submit(const SubmitRequest& request) {
  if (auto violations = pipeline::validate(request.config); !violations.empty()) {
    std::string message;
    for (const auto& v : violations) message += (message.empty() ? "" : "; ") + v.field + ": " + v.message;
    throw Error(Errc::InvalidConfig, message);
  }
  std::shared_ptr<const Dataset> dataset = store_.dataset(request.dataset_id);
  const auto keys = pipeline::plan_models(*dataset, request.selection);
  const auto canonical = pipeline::canonicalize(request.config);
  const std::string id =
      pipeline::experiment_id(pipeline::config_hash(canonical), dataset->id, request.seed, request.selection);

  std::lock_guard lock(mutex_);
  if (store_.has_experiment(id)) return id;
  if (auto it = jobs_.find(id); it != jobs_.end()) {
    if (it->second->status.state != JobState::cancelled) return id;
    retired_.push_back(it->second);
  }

  auto job = std::make_shared<Job>();
  job->status.id = id;
  job->status.history = {JobState::pending};
  for (const auto& k : keys) job->status.models.push_back({k, pipeline::ModelState::pending, {}});
  jobs_[id] = job;

  job->thread = std::jthread([this, job, dataset, request] {
    {
      std::lock_guard lock(mutex_);
      job->status.state = JobState::running;
      job->status.history.push_back(JobState::running);
    }
    changed_.notify_all();
    pipeline::RunOptions options;
    options.threads = threads_;
    options.stop = job->stop.get_token();
    options.on_progress = [this, job](std::size_t i, const pipeline::ModelKey&, pipeline::ModelState s) {
      {
        std::lock_guard lock(mutex_);
        job->status.models[i].state = s;
        if (s != pipeline::ModelState::running) ++job->status.finished;
      }
      changed_.notify_all();
    };
    std::optional<pipeline::ExperimentResult> result;
    std::string failure;
    try {
      result = pipeline::run(request.config, *dataset, request.selection, request.seed, options);
      const bool complete = std::none_of(result->models.begin(), result->models.end(), [](const auto& m) {
        return m.state == pipeline::ModelState::cancelled;
      });
      if (complete) store_.put_experiment(*result, request.author);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    {
      std::lock_guard lock(mutex_);
      if (result) {
        for (std::size_t i = 0; i < result->models.size(); ++i) job->status.models[i].error = result->models[i].error;
      } else {
        for (auto& m : job->status.models) {
          if (m.state == pipeline::ModelState::pending || m.state == pipeline::ModelState::running) {
            m.state = pipeline::ModelState::failed;
            m.error = failure;
          }
        }
      }
      const bool cancelled = job->stop.stop_requested() &&
                             std::any_of(job->status.models.begin(), job->status.models.end(), [](const ModelStatus& m) {
                               return m.state == pipeline::ModelState::cancelled;
                             });
      job->status.state = cancelled ? JobState::cancelled : JobState::done;
      job->status.history.push_back(job->status.state);
      job->result = std::move(result);
    }
    changed_.notify_all();
  });
  return id;
}

ExperimentStatus ExperimentService::stored_status(const std::string& id) const {
  auto result = store_.experiment(id);
  ExperimentStatus s;
  s.id = id;
  s.state = JobState::done;
  s.history = {JobState::done};
  s.cached = true;
  for (const auto& m : result->models) s.models.push_back({m.key, m.state, m.error});
  s.finished = static_cast<std::int64_t>(s.models.size());
  return s;
}

ExperimentStatus ExperimentService::poll(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = jobs_.find(id); it != jobs_.end()) return it->second->status;
  }
  return stored_status(id);
}

ExperimentStatus ExperimentService::cancel(const std::string& id) {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(mutex_);
    if (auto it = jobs_.find(id); it != jobs_.end()) job = it->second;
  }
  if (!job) return stored_status(id);  // finished work cannot be cancelled
  job->stop.request_stop();
  return poll(id);
}

ExperimentStatus ExperimentService::wait(const std::string& id) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    lock.unlock();
    return stored_status(id);
  }
  auto job = it->second;
  changed_.wait(lock, [&] { return job->status.state == JobState::done || job->status.state == JobState::cancelled; });
  return job->status;
}

std::optional<pipeline::ExperimentResult> ExperimentService::fetch(const std::string& id) const {
  if (store_.has_experiment(id)) return *store_.experiment(id);
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(Errc::UnknownExperiment, "no experiment \"" + id + "\"");
  const Job& job = *it->second;
  if (job.status.state != JobState::cancelled && job.status.state != JobState::done) return std::nullopt;
  if (!job.result) return std::nullopt;
  pipeline::ExperimentResult partial = *job.result;
  std::erase_if(partial.models, [](const pipeline::ModelResult& m) { return m.state != pipeline::ModelState::done; });
  partial.summary = pipeline::summarize(partial.models);
  return partial;
}

std::vector<ExperimentStatus> ExperimentService::list() const {
  std::map<std::string, ExperimentStatus> out;
  for (const auto& id : store_.experiment_ids()) out[id] = stored_status(id);
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, job] : jobs_) {
      if (!out.count(id)) out[id] = job->status;
    }
  }
  std::vector<ExperimentStatus> v;
  for (auto& [id, s] : out) v.push_back(std::move(s));
  return v;
}

evaluation::MetricReport evaluate_result(const pipeline::ExperimentResult& result,
                                         const std::vector<evaluation::LabelRow>& labels, double beta) {
  if (!(beta > 0.0)) throw Error(Errc::InvalidArgument, "beta must be positive");
  evaluation::MetricReport report;
  report.beta = beta;
  const Duration interval{result.interval_seconds};
  for (const auto& m : result.models) {
    if (m.state != pipeline::ModelState::done || m.predictions.times.empty()) continue;
    std::vector<evaluation::Span> gt;
    for (const auto& l : labels) {
      if (l.station_id == m.key.station_id && l.attribute == m.key.pollutant) gt.push_back(l.span);
    }
    std::vector<evaluation::Span> det;
    for (const auto& ev : m.events) det.push_back(evaluation::event_span(ev, interval));
    const evaluation::Span range{m.predictions.times.front(), m.predictions.times.back() + interval};
    report.rows.push_back(
        {m.key.station_id, m.key.pollutant, evaluation::weighted_metrics(evaluation::build_intervals(gt, det, range), beta)});
  }
  evaluation::fill_means(report);
  return report;
}

}  // namespace aqad::service
