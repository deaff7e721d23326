#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "aqad/core/series.hpp"
#include "aqad/detector/detector.hpp"
#include "aqad/pipeline/runner.hpp"

namespace aqad::service {

struct DatasetInfo {
  std::string id;
  std::size_t station_count = 0;
  std::size_t reading_count = 0;
  Instant ingested_at{};
  std::string author;
};

struct IngestOutcome {
  DatasetInfo info;
  bool created = false;  // false when identical content was already stored
};

struct Annotation {
  std::string event_id;
  std::string author;
  Instant at{};
  std::string text;
  std::vector<std::string> tags;
};

/// A detected event is never edited in place: edits land in `override` and
/// deletes set `hidden`. Manual events are edited directly and removed on
/// delete; the journal keeps their history.
struct EventRecord {
  detector::AnomalousEvent original;
  std::optional<detector::AnomalousEvent> override;
  bool hidden = false;
  std::vector<Annotation> annotations;
  Instant modified_at{};
  std::string modified_by;

  const detector::AnomalousEvent& effective() const { return override ? *override : original; }
};

struct NewEvent {
  std::string station_id;
  Attribute attribute = Attribute::PM25;
  Instant start{};
  Instant end{};
  int severity = 0;
  std::vector<std::string> tags;
  std::string comment;
  std::string dataset_id;     // may be empty when experiment_id is given
  std::string experiment_id;  // optional link
};

struct EventPatch {
  std::optional<Instant> start;
  std::optional<Instant> end;
  std::optional<int> severity;
  std::optional<std::vector<std::string>> tags;
  std::optional<std::string> comment;
};

struct EventFilter {
  std::optional<std::string> experiment_id;
  std::optional<std::string> station_id;
  std::optional<Attribute> attribute;
  bool include_hidden = false;
};

NewEvent new_event_from_json(const nlohmann::json& j);  // throws InvalidArgument
EventPatch event_patch_from_json(const nlohmann::json& j);
nlohmann::json event_patch_to_json(const EventPatch& p);
nlohmann::json record_to_json(const EventRecord& r);

/// File-backed store under one directory:
///
///   journal.jsonl            one mutation per line, replayed on open
///   blobs/<sha>.csv|.json    dataset CSVs and experiment results by content
///
/// Reads take a shared lock; mutations are serialized and each one is
/// appended (and flushed) to the journal before it becomes visible.
class Store {
 public:
  using Clock = std::function<Instant()>;

  /// Creates the directory if needed and replays the journal. Throws Io or
  /// ParseError on a damaged journal.
  explicit Store(std::filesystem::path dir, Clock clock = {});
  ~Store();

  const std::filesystem::path& dir() const { return dir_; }

  IngestOutcome ingest(const std::string& readings_csv, const std::string& stations_csv,
                       const std::string& author = "cli");
  std::vector<DatasetInfo> datasets() const;
  std::shared_ptr<const Dataset> dataset(const std::string& id) const;  // throws UnknownDataset
  // Most recently ingested dataset holding the station, or throws.
  std::shared_ptr<const Dataset> dataset_for_station(const std::string& station_id) const;

  void put_experiment(const pipeline::ExperimentResult& result, const std::string& author = "cli");
  bool has_experiment(const std::string& id) const;
  std::shared_ptr<const pipeline::ExperimentResult> experiment(const std::string& id) const;  // UnknownExperiment
  std::vector<std::string> experiment_ids() const;
  // Drops the experiment and its detected events (with their edits).
  void delete_experiment(const std::string& id, const std::string& author = "cli");

  EventRecord create_event(const NewEvent& e, const std::string& author);
  EventRecord modify_event(const std::string& id, const EventPatch& patch, const std::string& author);
  // Detected: hidden. Manual: removed. Returns the record as it stood after.
  EventRecord delete_event(const std::string& id, const std::string& author);
  Annotation annotate(const std::string& id, const std::string& text, const std::vector<std::string>& tags,
                      const std::string& author);
  EventRecord event(const std::string& id) const;  // throws NotFound
  std::vector<EventRecord> events(const EventFilter& filter = {}) const;

  /// SHA-256 over a canonical rendering of datasets, experiments and event
  /// records; equal digests mean equal state.
  std::string state_digest() const;
  std::int64_t journal_length() const;

 private:
  struct State;

  void append(nlohmann::json entry);
  void apply(const nlohmann::json& entry, State& s) const;
  std::string write_blob(const std::string& content, const std::string& ext);
  std::string read_blob(const std::string& name) const;
  void check_range(const State& s, const detector::AnomalousEvent& ev, const std::string& dataset_id) const;

  std::filesystem::path dir_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<State> state_;
};

}  // namespace aqad::service
