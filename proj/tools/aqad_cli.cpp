// aqad command-line front end. Every command works on a data directory
// (--data, $AQAD_DATA, or ./aqad-data) holding the journal and blobs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aqad/core/error.hpp"
#include "aqad/detector/event_io.hpp"
#include "aqad/evaluation/evaluation.hpp"
#include "aqad/service/experiments.hpp"
#include "aqad/service/http_api.hpp"
#include "aqad/service/store.hpp"
#include "aqad/service/synth.hpp"
#include "aqad/service/views.hpp"

// After the Eigen-based headers: resolv.h, pulled in here, defines _res.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aqad;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

json read_json(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, path + " is not valid JSON");
  return j;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string default_data_dir() {
  if (const char* env = std::getenv("AQAD_DATA"); env && *env) return env;
  return "aqad-data";
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "   n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * *v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aqad: air-quality anomaly detection pipeline, store and API server"};
  app.require_subcommand(1);
  std::string data_dir = default_data_dir();
  app.add_option("--data", data_dir, "data directory (journal and blobs)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and store a readings + stations CSV pair");
  std::string readings_path, stations_path, author = "cli";
  ingest->add_option("--readings", readings_path, "readings CSV")->required();
  ingest->add_option("--stations", stations_path, "stations CSV")->required();
  ingest->add_option("--author", author);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted anomalies");
  std::string spec_path, out_dir;
  synth->add_option("--spec", spec_path, "JSON spec (defaults when omitted)");
  synth->add_option("--out", out_dir, "output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "run a pipeline experiment and write report.json + events.jsonl");
  std::string config_path, dataset_id;
  std::vector<std::string> stations, pollutants;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string run_out;
  run->add_option("--config", config_path, "pipeline config JSON (default pipeline when omitted)");
  run->add_option("--dataset", dataset_id, "dataset id")->required();
  run->add_option("--stations", stations, "station ids (default: all)");
  run->add_option("--pollutants", pollutants, "pollutants (default: all present)");
  run->add_option("--seed", seed, "training seed")->required();
  run->add_option("--threads", threads, "models trained in parallel");
  run->add_option("--out", run_out, "report directory (default: <data>/runs/<experiment id>)");

  // eval
  auto* eval = app.add_subcommand("eval", "score an experiment's events against labeled intervals");
  std::string experiment_id, labels_path, eval_out;
  double beta = 0.5;
  eval->add_option("--experiment", experiment_id)->required();
  eval->add_option("--labels", labels_path, "labels CSV")->required();
  eval->add_option("--beta", beta, "F-beta weight");
  eval->add_option("--out", eval_out, "report file (default: <data>/runs/<experiment id>/eval.json)");

  // serve
  auto* serve = app.add_subcommand("serve", "serve the HTTP API");
  int port = 8080;
  std::string host = "127.0.0.1", ui_dir;
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->add_option("--ui", ui_dir, "static files mounted at /");
  serve->add_option("--threads", threads, "models trained in parallel per experiment");

  // validate / blocks / digest
  auto* validate = app.add_subcommand("validate", "check a pipeline config against the block registry");
  validate->add_option("--config", config_path)->required();
  auto* blocks = app.add_subcommand("blocks", "print the block registry");
  auto* digest = app.add_subcommand("digest", "print the store state digest");
  auto* datasets = app.add_subcommand("datasets", "list stored datasets");
  auto* experiments = app.add_subcommand("experiments", "list stored experiments");

  // signals
  auto* signals = app.add_subcommand("signals", "print aligned y, y_hat, e, e_s and events for one model");
  std::string station, attribute;
  signals->add_option("--experiment", experiment_id)->required();
  signals->add_option("--station", station)->required();
  signals->add_option("--attribute", attribute)->required();

  // events
  auto* events = app.add_subcommand("events", "list and edit events");
  events->require_subcommand(1);
  auto* ev_list = events->add_subcommand("list", "list events");
  bool include_hidden = false;
  ev_list->add_option("--experiment", experiment_id);
  ev_list->add_option("--station", station);
  ev_list->add_option("--attribute", attribute);
  ev_list->add_flag("--all", include_hidden, "include hidden detected events");

  auto* ev_create = events->add_subcommand("create", "create a manual event");
  std::string start, end, comment, text, event_id;
  int severity = -1;
  std::vector<std::string> tags;
  ev_create->add_option("--station", station)->required();
  ev_create->add_option("--attribute", attribute)->required();
  ev_create->add_option("--start", start, "ISO-8601 UTC")->required();
  ev_create->add_option("--end", end, "ISO-8601 UTC, inclusive")->required();
  ev_create->add_option("--severity", severity, "0..4")->required();
  ev_create->add_option("--comment", comment);
  ev_create->add_option("--tag", tags);
  ev_create->add_option("--dataset", dataset_id);
  ev_create->add_option("--experiment", experiment_id);
  ev_create->add_option("--author", author);

  auto* ev_modify = events->add_subcommand("modify", "change an event's interval, severity, tags or comment");
  ev_modify->add_option("id", event_id)->required();
  auto* mod_start = ev_modify->add_option("--start", start);
  auto* mod_end = ev_modify->add_option("--end", end);
  auto* mod_severity = ev_modify->add_option("--severity", severity);
  auto* mod_comment = ev_modify->add_option("--comment", comment);
  auto* mod_tags = ev_modify->add_option("--tag", tags);
  ev_modify->add_option("--author", author);

  auto* ev_delete = events->add_subcommand("delete", "delete a manual event or hide a detected one");
  ev_delete->add_option("id", event_id)->required();
  ev_delete->add_option("--author", author);

  auto* ev_annotate = events->add_subcommand("annotate", "attach a comment and tags to an event");
  ev_annotate->add_option("id", event_id)->required();
  ev_annotate->add_option("--text", text);
  ev_annotate->add_option("--tag", tags);
  ev_annotate->add_option("--author", author);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto spec = spec_path.empty() ? service::SynthSpec{} : service::synth_spec_from_json(read_json(spec_path));
      const auto out = service::synth_generate(spec);
      const fs::path dir(out_dir);
      write_file(dir / "readings.csv", out.readings_csv);
      write_file(dir / "stations.csv", out.stations_csv);
      write_file(dir / "labels.csv", out.labels_csv);
      print({{"readings", (dir / "readings.csv").string()},
             {"stations", (dir / "stations.csv").string()},
             {"labels", (dir / "labels.csv").string()},
             {"anomalies", out.anomalies.size()}});
      return 0;
    }
    if (blocks->parsed()) {
      print(pipeline::registry_to_json());
      return 0;
    }
    if (validate->parsed()) {
      const auto config = pipeline::config_from_json(read_json(config_path));
      const auto violations = pipeline::validate(config);
      json out = {{"valid", violations.empty()}, {"violations", pipeline::violations_to_json(violations)}};
      if (violations.empty()) out["config_hash"] = pipeline::config_hash(pipeline::canonicalize(config));
      print(out);
      return violations.empty() ? 0 : 1;
    }

    service::Store store(data_dir);

    if (ingest->parsed()) {
      const auto outcome = store.ingest(read_file(readings_path), read_file(stations_path), author);
      print({{"id", outcome.info.id},
             {"station_count", outcome.info.station_count},
             {"reading_count", outcome.info.reading_count},
             {"created", outcome.created}});
      return 0;
    }
    if (digest->parsed()) {
      print({{"digest", store.state_digest()}, {"journal_length", store.journal_length()}});
      return 0;
    }
    if (datasets->parsed()) {
      json out = json::array();
      for (const auto& d : store.datasets()) {
        out.push_back({{"id", d.id}, {"station_count", d.station_count}, {"reading_count", d.reading_count}});
      }
      print(out);
      return 0;
    }
    if (experiments->parsed()) {
      print(store.experiment_ids());
      return 0;
    }
    if (run->parsed()) {
      service::SubmitRequest request;
      request.config = config_path.empty() ? pipeline::default_config() : pipeline::config_from_json(read_json(config_path));
      request.dataset_id = dataset_id;
      request.seed = seed;
      request.author = author;
      request.selection.stations = stations;
      for (const auto& p : pollutants) request.selection.pollutants.push_back(attribute_from_string(p));
      service::ExperimentService service(store, threads);
      const std::string id = service.submit(request);
      const auto status = service.wait(id);
      auto result = service.fetch(id);
      if (!result) throw Error(Errc::Io, "experiment " + id + " finished without a result");
      const fs::path dir = run_out.empty() ? fs::path(data_dir) / "runs" / id : fs::path(run_out);
      write_file(dir / "report.json", pipeline::report_to_json(*result).dump(2) + "\n");
      write_file(dir / "events.jsonl", detector::write_events_jsonl(pipeline::all_events(*result)));
      print({{"experiment_id", id},
             {"cached", status.cached},
             {"report", (dir / "report.json").string()},
             {"events", (dir / "events.jsonl").string()},
             {"model_count", result->summary.model_count},
             {"failed_count", result->summary.failed_count},
             {"event_count", result->summary.event_count}});
      return result->summary.failed_count == result->summary.model_count && result->summary.model_count > 0 ? 1 : 0;
    }
    if (eval->parsed()) {
      auto result = store.experiment(experiment_id);
      const auto labels = evaluation::parse_labels(read_file(labels_path));
      const auto report = service::evaluate_result(*result, labels, beta);
      const fs::path path = eval_out.empty() ? fs::path(data_dir) / "runs" / experiment_id / "eval.json" : fs::path(eval_out);
      write_file(path, evaluation::report_to_json(report).dump(2) + "\n");
      std::cerr << "station     attribute  precision  recall  F" << beta << "\n";
      for (const auto& row : report.rows) {
        std::fprintf(stderr, "%-11s %-10s %s     %s  %s\n", row.station_id.c_str(),
                     std::string(to_string(row.attribute)).c_str(), pct(row.scores.precision).c_str(),
                     pct(row.scores.recall).c_str(), pct(row.scores.f_beta).c_str());
      }
      std::fprintf(stderr, "%-22s %s     %s  %s\n", "mean", pct(report.mean_precision).c_str(),
                   pct(report.mean_recall).c_str(), pct(report.mean_f_beta).c_str());
      print({{"report", path.string()},
             {"precision", report.mean_precision ? json(*report.mean_precision) : json(nullptr)},
             {"recall", report.mean_recall ? json(*report.mean_recall) : json(nullptr)},
             {"f_beta", report.mean_f_beta ? json(*report.mean_f_beta) : json(nullptr)}});
      return 0;
    }
    if (signals->parsed()) {
      print(service::signals(*store.experiment(experiment_id), station, attribute_from_string(attribute)));
      return 0;
    }
    if (ev_list->parsed()) {
      service::EventFilter f;
      if (!experiment_id.empty()) f.experiment_id = experiment_id;
      if (!station.empty()) f.station_id = station;
      if (!attribute.empty()) f.attribute = attribute_from_string(attribute);
      f.include_hidden = include_hidden;
      json out = json::array();
      for (const auto& r : store.events(f)) out.push_back(service::record_to_json(r));
      print(out);
      return 0;
    }
    if (ev_create->parsed()) {
      service::NewEvent e;
      e.station_id = station;
      e.attribute = attribute_from_string(attribute);
      e.start = parse_iso8601(start);
      e.end = parse_iso8601(end);
      e.severity = severity;
      e.tags = tags;
      e.comment = comment;
      e.dataset_id = dataset_id;
      e.experiment_id = experiment_id;
      print(service::record_to_json(store.create_event(e, author)));
      return 0;
    }
    if (ev_modify->parsed()) {
      service::EventPatch p;
      if (*mod_start) p.start = parse_iso8601(start);
      if (*mod_end) p.end = parse_iso8601(end);
      if (*mod_severity) p.severity = severity;
      if (*mod_comment) p.comment = comment;
      if (*mod_tags) p.tags = tags;
      print(service::record_to_json(store.modify_event(event_id, p, author)));
      return 0;
    }
    if (ev_delete->parsed()) {
      print(service::record_to_json(store.delete_event(event_id, author)));
      return 0;
    }
    if (ev_annotate->parsed()) {
      const auto a = store.annotate(event_id, text, tags, author);
      print({{"event_id", a.event_id}, {"author", a.author}, {"at", format_iso8601(a.at)}, {"text", a.text}, {"tags", a.tags}});
      return 0;
    }
    if (serve->parsed()) {
      service::ExperimentService service(store, threads);
      httplib::Server server;
      service::mount_api(server, store, service);
      if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
        throw Error(Errc::Io, "cannot serve static files from " + ui_dir);
      }
      std::cerr << "aqad: serving " << data_dir << " on http://" << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error(Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "aqad: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "aqad: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
