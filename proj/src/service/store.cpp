#include "aqad/service/store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "aqad/core/error.hpp"
#include "aqad/core/hash.hpp"
#include "aqad/detector/event_io.hpp"
#include "aqad/service/ingest.hpp"

namespace aqad::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct Store::State {
  struct DatasetEntry {
    DatasetInfo info;
    std::shared_ptr<const Dataset> data;
    std::int64_t order = 0;
  };
  std::map<std::string, DatasetEntry> datasets;
  std::map<std::string, std::shared_ptr<const pipeline::ExperimentResult>> experiments;
  std::map<std::string, EventRecord> events;
  std::int64_t next_manual = 1;
  std::int64_t seq = 0;
};

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key) || j.at(key).is_null()) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

Instant time_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(Errc::InvalidArgument, std::string("missing time field \"") + key + "\"");
  }
  return parse_iso8601(j.at(key).get<std::string>());
}

void check_severity(int s) {
  if (s < 0 || s > 4) throw Error(Errc::InvalidArgument, "severity must be 0..4, got " + std::to_string(s));
}

detector::AnomalousEvent patched(detector::AnomalousEvent ev, const EventPatch& p) {
  if (p.start) ev.start = *p.start;
  if (p.end) ev.end = *p.end;
  if (p.severity) ev.severity = *p.severity;
  if (p.tags) ev.tags = *p.tags;
  if (p.comment) ev.comment = *p.comment;
  return ev;
}

json annotation_to_json(const Annotation& a) {
  return {{"event_id", a.event_id}, {"author", a.author}, {"at", format_iso8601(a.at)}, {"text", a.text},
          {"tags", a.tags}};
}

}  // namespace

NewEvent new_event_from_json(const json& j) {
  try {
    NewEvent e;
    e.station_id = j.at("station_id").get<std::string>();
    e.attribute = attribute_from_string(j.at("attribute").get<std::string>());
    e.start = time_field(j, "start");
    e.end = time_field(j, "end");
    e.severity = j.at("severity").get<int>();
    e.tags = string_list(j, "tags");
    e.comment = j.value("comment", "");
    e.dataset_id = j.value("dataset_id", "");
    e.experiment_id = j.value("experiment_id", "");
    return e;
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidArgument, std::string("event needs station_id, attribute, start, end, severity: ") + ex.what());
  }
}

EventPatch event_patch_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "patch must be an object");
  EventPatch p;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "start") p.start = parse_iso8601(value.get<std::string>());
      else if (key == "end") p.end = parse_iso8601(value.get<std::string>());
      else if (key == "severity") p.severity = value.get<int>();
      else if (key == "tags") p.tags = value.get<std::vector<std::string>>();
      else if (key == "comment") p.comment = value.get<std::string>();
      else throw Error(Errc::InvalidArgument, "event field \"" + key + "\" cannot be modified");
    }
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidArgument, std::string("bad patch: ") + ex.what());
  }
  return p;
}

json event_patch_to_json(const EventPatch& p) {
  json j = json::object();
  if (p.start) j["start"] = format_iso8601(*p.start);
  if (p.end) j["end"] = format_iso8601(*p.end);
  if (p.severity) j["severity"] = *p.severity;
  if (p.tags) j["tags"] = *p.tags;
  if (p.comment) j["comment"] = *p.comment;
  return j;
}

json record_to_json(const EventRecord& r) {
  json j = detector::event_to_json(r.effective());
  j["hidden"] = r.hidden;
  j["overridden"] = r.override.has_value();
  j["original"] = detector::event_to_json(r.original);
  j["annotations"] = json::array();
  for (const auto& a : r.annotations) j["annotations"].push_back(annotation_to_json(a));
  j["modified_at"] = format_iso8601(r.modified_at);
  j["modified_by"] = r.modified_by;
  return j;
}

Store::Store(fs::path dir, Clock clock) : dir_(std::move(dir)), clock_(std::move(clock)), state_(std::make_unique<State>()) {
  if (!clock_) {
    clock_ = [] { return std::chrono::floor<Duration>(std::chrono::system_clock::now()); };
  }
  std::error_code ec;
  fs::create_directories(dir_ / "blobs", ec);
  if (ec) throw Error(Errc::Io, "cannot create " + (dir_ / "blobs").string() + ": " + ec.message());

  std::ifstream in(dir_ / "journal.jsonl");
  if (!in) return;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json entry = json::parse(lines[i], nullptr, false);
    if (entry.is_discarded()) {
      // A torn final line from an interrupted append is dropped.
      if (i + 1 == lines.size()) break;
      throw Error(Errc::ParseError, "journal line " + std::to_string(i + 1) + " is not JSON");
    }
    try {
      apply(entry, *state_);
    } catch (const json::exception& ex) {
      throw Error(Errc::ParseError, "journal line " + std::to_string(i + 1) + ": " + ex.what());
    }
  }
}

Store::~Store() = default;

std::string Store::write_blob(const std::string& content, const std::string& ext) {
  const std::string name = sha256_hex(content) + ext;
  const fs::path target = dir_ / "blobs" / name;
  if (fs::exists(target)) return name;
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
  return name;
}

std::string Store::read_blob(const std::string& name) const {
  std::ifstream in(dir_ / "blobs" / name, std::ios::binary);
  if (!in) throw Error(Errc::Io, "missing blob " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Store::append(json entry) {
  entry["seq"] = state_->seq + 1;
  std::ofstream out(dir_ / "journal.jsonl", std::ios::app | std::ios::binary);
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "cannot append to journal in " + dir_.string());
  apply(entry, *state_);
}

void Store::apply(const json& entry, State& s) const {
  const std::string op = entry.at("op").get<std::string>();
  const Instant at = parse_iso8601(entry.at("at").get<std::string>());
  const std::string author = entry.value("author", "");
  s.seq = entry.at("seq").get<std::int64_t>();

  if (op == "ingest") {
    auto ds = std::make_shared<Dataset>(
        parse_dataset(read_blob(entry.at("readings_blob")), read_blob(entry.at("stations_blob"))));
    if (ds->id != entry.at("dataset_id").get<std::string>()) {
      throw Error(Errc::ParseError, "dataset blob does not hash to " + entry.at("dataset_id").get<std::string>());
    }
    State::DatasetEntry d;
    d.info = {ds->id, ds->stations.size(), ds->reading_count(), at, author};
    d.order = s.seq;
    d.data = std::move(ds);
    s.datasets[d.info.id] = std::move(d);
  } else if (op == "experiment") {
    auto result = std::make_shared<pipeline::ExperimentResult>(
        pipeline::result_from_json(json::parse(read_blob(entry.at("blob")))));
    for (const auto& ev : pipeline::all_events(*result)) {
      EventRecord rec;
      rec.original = ev;
      rec.modified_at = at;
      rec.modified_by = author;
      s.events[ev.id] = std::move(rec);
    }
    s.experiments[result->experiment_id] = std::move(result);
  } else if (op == "experiment.delete") {
    const std::string id = entry.at("experiment_id");
    s.experiments.erase(id);
    std::erase_if(s.events, [&](const auto& kv) {
      return kv.second.original.source == detector::EventSource::detected && kv.second.original.experiment_id == id;
    });
  } else if (op == "event.create") {
    EventRecord rec;
    rec.original = detector::event_from_json(entry.at("event"));
    rec.modified_at = at;
    rec.modified_by = author;
    s.events[rec.original.id] = std::move(rec);
    ++s.next_manual;
  } else if (op == "event.modify") {
    EventRecord& rec = s.events.at(entry.at("event_id").get<std::string>());
    auto next = patched(rec.effective(), event_patch_from_json(entry.at("patch")));
    if (rec.original.source == detector::EventSource::detected) {
      rec.override = std::move(next);
    } else {
      rec.original = std::move(next);
    }
    rec.modified_at = at;
    rec.modified_by = author;
  } else if (op == "event.delete") {
    const std::string id = entry.at("event_id");
    EventRecord& rec = s.events.at(id);
    if (rec.original.source == detector::EventSource::detected) {
      rec.hidden = true;
      rec.modified_at = at;
      rec.modified_by = author;
    } else {
      s.events.erase(id);
    }
  } else if (op == "event.annotate") {
    const std::string id = entry.at("event_id");
    s.events.at(id).annotations.push_back(
        {id, author, at, entry.at("text").get<std::string>(), string_list(entry, "tags")});
  } else {
    throw Error(Errc::ParseError, "unknown journal op \"" + op + "\"");
  }
}

IngestOutcome Store::ingest(const std::string& readings_csv, const std::string& stations_csv,
                            const std::string& author) {
  Dataset ds = parse_dataset(readings_csv, stations_csv);
  std::unique_lock lock(mutex_);
  if (auto it = state_->datasets.find(ds.id); it != state_->datasets.end()) return {it->second.info, false};
  json entry = {{"op", "ingest"},
                {"at", format_iso8601(clock_())},
                {"author", author},
                {"dataset_id", ds.id},
                {"readings_blob", write_blob(readings_csv, ".csv")},
                {"stations_blob", write_blob(stations_csv, ".csv")}};
  append(std::move(entry));
  return {state_->datasets.at(ds.id).info, true};
}

std::vector<DatasetInfo> Store::datasets() const {
  std::shared_lock lock(mutex_);
  std::vector<const State::DatasetEntry*> entries;
  for (const auto& [id, d] : state_->datasets) entries.push_back(&d);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->order < b->order; });
  std::vector<DatasetInfo> out;
  for (const auto* d : entries) out.push_back(d->info);
  return out;
}

std::shared_ptr<const Dataset> Store::dataset(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->datasets.find(id);
  if (it == state_->datasets.end()) throw Error(Errc::UnknownDataset, "no dataset \"" + id + "\"");
  return it->second.data;
}

std::shared_ptr<const Dataset> Store::dataset_for_station(const std::string& station_id) const {
  std::shared_lock lock(mutex_);
  const State::DatasetEntry* best = nullptr;
  for (const auto& [id, d] : state_->datasets) {
    if (d.data->find_station(station_id) && (!best || d.order > best->order)) best = &d;
  }
  if (!best) throw Error(Errc::UnknownStation, "no dataset holds station \"" + station_id + "\"");
  return best->data;
}

void Store::put_experiment(const pipeline::ExperimentResult& result, const std::string& author) {
  const std::string content = pipeline::result_to_json(result).dump();
  std::unique_lock lock(mutex_);
  if (!state_->datasets.count(result.dataset_id)) {
    throw Error(Errc::UnknownDataset, "experiment refers to unknown dataset \"" + result.dataset_id + "\"");
  }
  if (state_->experiments.count(result.experiment_id)) return;
  append({{"op", "experiment"},
          {"at", format_iso8601(clock_())},
          {"author", author},
          {"experiment_id", result.experiment_id},
          {"blob", write_blob(content, ".json")}});
}

bool Store::has_experiment(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return state_->experiments.count(id) > 0;
}

std::shared_ptr<const pipeline::ExperimentResult> Store::experiment(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->experiments.find(id);
  if (it == state_->experiments.end()) throw Error(Errc::UnknownExperiment, "no experiment \"" + id + "\"");
  return it->second;
}

std::vector<std::string> Store::experiment_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, r] : state_->experiments) out.push_back(id);
  return out;
}

void Store::delete_experiment(const std::string& id, const std::string& author) {
  std::unique_lock lock(mutex_);
  if (!state_->experiments.count(id)) throw Error(Errc::UnknownExperiment, "no experiment \"" + id + "\"");
  append({{"op", "experiment.delete"}, {"at", format_iso8601(clock_())}, {"author", author}, {"experiment_id", id}});
}

void Store::check_range(const State& s, const detector::AnomalousEvent& ev, const std::string& dataset_id) const {
  if (ev.end < ev.start) throw Error(Errc::InvalidArgument, "event end precedes its start");
  check_severity(ev.severity);
  auto it = s.datasets.find(dataset_id);
  if (it == s.datasets.end()) throw Error(Errc::UnknownDataset, "no dataset \"" + dataset_id + "\"");
  const RawSeries* series = it->second.data->find_series(ev.station_id, ev.attribute);
  if (!series || series->empty()) {
    throw Error(Errc::NotFound, "dataset " + dataset_id + " has no " + std::string(to_string(ev.attribute)) +
                                    " readings for station \"" + ev.station_id + "\"");
  }
  const Instant first = series->points().front().time;
  const Instant last = series->points().back().time;
  if (ev.start < first || ev.end > last) {
    throw Error(Errc::OutOfRange, "event [" + format_iso8601(ev.start) + ", " + format_iso8601(ev.end) +
                                      "] lies outside the data range [" + format_iso8601(first) + ", " +
                                      format_iso8601(last) + "]");
  }
}

EventRecord Store::create_event(const NewEvent& e, const std::string& author) {
  std::unique_lock lock(mutex_);
  detector::AnomalousEvent ev;
  ev.station_id = e.station_id;
  ev.attribute = e.attribute;
  ev.start = e.start;
  ev.end = e.end;
  ev.severity = e.severity;
  ev.source = detector::EventSource::manual;
  ev.tags = e.tags;
  ev.comment = e.comment;
  ev.experiment_id = e.experiment_id;
  ev.dataset_id = e.dataset_id;
  if (!e.experiment_id.empty()) {
    auto it = state_->experiments.find(e.experiment_id);
    if (it == state_->experiments.end()) throw Error(Errc::UnknownExperiment, "no experiment \"" + e.experiment_id + "\"");
    if (ev.dataset_id.empty()) ev.dataset_id = it->second->dataset_id;
  }
  if (ev.dataset_id.empty()) throw Error(Errc::InvalidArgument, "event needs dataset_id or experiment_id");
  check_range(*state_, ev, ev.dataset_id);
  ev.id = "manual-" + std::to_string(state_->next_manual);
  append({{"op", "event.create"},
          {"at", format_iso8601(clock_())},
          {"author", author},
          {"event", detector::event_to_json(ev)}});
  return state_->events.at(ev.id);
}

EventRecord Store::modify_event(const std::string& id, const EventPatch& patch, const std::string& author) {
  std::unique_lock lock(mutex_);
  auto it = state_->events.find(id);
  if (it == state_->events.end()) throw Error(Errc::NotFound, "no event \"" + id + "\"");
  const detector::AnomalousEvent next = patched(it->second.effective(), patch);
  check_range(*state_, next, next.dataset_id);
  append({{"op", "event.modify"},
          {"at", format_iso8601(clock_())},
          {"author", author},
          {"event_id", id},
          {"patch", event_patch_to_json(patch)}});
  return state_->events.at(id);
}

EventRecord Store::delete_event(const std::string& id, const std::string& author) {
  std::unique_lock lock(mutex_);
  auto it = state_->events.find(id);
  if (it == state_->events.end()) throw Error(Errc::NotFound, "no event \"" + id + "\"");
  EventRecord before = it->second;
  append({{"op", "event.delete"}, {"at", format_iso8601(clock_())}, {"author", author}, {"event_id", id}});
  if (auto after = state_->events.find(id); after != state_->events.end()) return after->second;
  return before;
}

Annotation Store::annotate(const std::string& id, const std::string& text, const std::vector<std::string>& tags,
                           const std::string& author) {
  std::unique_lock lock(mutex_);
  if (!state_->events.count(id)) throw Error(Errc::NotFound, "no event \"" + id + "\"");
  if (text.empty() && tags.empty()) throw Error(Errc::InvalidArgument, "annotation needs text or tags");
  append({{"op", "event.annotate"},
          {"at", format_iso8601(clock_())},
          {"author", author},
          {"event_id", id},
          {"text", text},
          {"tags", tags}});
  return state_->events.at(id).annotations.back();
}

EventRecord Store::event(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->events.find(id);
  if (it == state_->events.end()) throw Error(Errc::NotFound, "no event \"" + id + "\"");
  return it->second;
}

std::vector<EventRecord> Store::events(const EventFilter& f) const {
  std::shared_lock lock(mutex_);
  std::vector<EventRecord> out;
  for (const auto& [id, rec] : state_->events) {
    const auto& ev = rec.effective();
    if (rec.hidden && !f.include_hidden) continue;
    if (f.experiment_id && ev.experiment_id != *f.experiment_id) continue;
    if (f.station_id && ev.station_id != *f.station_id) continue;
    if (f.attribute && ev.attribute != *f.attribute) continue;
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    return std::tie(a.effective().start, a.effective().id) < std::tie(b.effective().start, b.effective().id);
  });
  return out;
}

std::string Store::state_digest() const {
  std::shared_lock lock(mutex_);
  json j;
  j["datasets"] = json::object();
  for (const auto& [id, d] : state_->datasets) {
    j["datasets"][id] = {{"stations", d.info.station_count},
                         {"readings", d.info.reading_count},
                         {"ingested_at", format_iso8601(d.info.ingested_at)}};
  }
  j["experiments"] = json::object();
  for (const auto& [id, r] : state_->experiments) j["experiments"][id] = sha256_hex(pipeline::result_to_json(*r).dump());
  j["events"] = json::object();
  for (const auto& [id, rec] : state_->events) j["events"][id] = record_to_json(rec);
  j["next_manual"] = state_->next_manual;
  return sha256_hex(j.dump());
}

std::int64_t Store::journal_length() const {
  std::shared_lock lock(mutex_);
  return state_->seq;
}

}  // namespace aqad::service
