#include "aqad/service/http_api.hpp"

#include <json.hpp>

#include <charconv>
#include <map>

#include "aqad/core/transforms.hpp"
#include "aqad/detector/event_io.hpp"
#include "aqad/service/views.hpp"

// After the Eigen-based headers: resolv.h, pulled in here, defines _res.
#include <httplib.h>

namespace aqad::service {

using nlohmann::json;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::NotFound:
    case Errc::UnknownDataset:
    case Errc::UnknownExperiment:
    case Errc::UnknownStation:
      return 404;
    case Errc::IngestConflict:
      return 409;
    case Errc::InvalidArgument:
    case Errc::ParseError:
    case Errc::UnknownAttribute:
    case Errc::OutOfRange:
    case Errc::InvalidConfig:
    case Errc::DuplicateTimestamp:
    case Errc::NonFiniteValue:
    case Errc::GranularityMismatch:
    case Errc::SeriesTooShort:
    case Errc::EmptySeries:
      return 400;
    default:
      return 500;
  }
}

namespace {

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

void send(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send(res, {{"error", code}, {"message", message}}, status);
}

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "request body is not JSON");
  return j;
}

std::string author_of(const httplib::Request& req, const json& body) {
  if (body.is_object() && body.contains("author") && body.at("author").is_string()) return body.at("author");
  if (req.has_header("X-Author")) return req.get_header_value("X-Author");
  return "api";
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

std::string required(const httplib::Request& req, const char* name) {
  auto v = param(req, name);
  if (!v || v->empty()) throw Error(Errc::InvalidArgument, std::string("query parameter \"") + name + "\" is required");
  return *v;
}

std::size_t size_param(const httplib::Request& req, const char* name) {
  auto v = param(req, name);
  if (!v || v->empty()) return 0;
  std::size_t out = 0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || end != v->data() + v->size()) {
    throw Error(Errc::InvalidArgument, std::string("query parameter \"") + name + "\" must be a non-negative integer");
  }
  return out;
}

std::shared_ptr<const Dataset> pick_dataset(const Store& store, const httplib::Request& req, const std::string& station) {
  if (auto id = param(req, "dataset"); id && !id->empty()) return store.dataset(*id);
  return store.dataset_for_station(station);
}

json station_json(const Dataset& ds, const Station& s) {
  json attributes = json::array();
  std::optional<Instant> first, last;
  for (const auto& [key, series] : ds.readings) {
    if (key.first != s.id || series.empty()) continue;
    attributes.push_back(std::string(to_string(key.second)));
    const Instant a = series.points().front().time;
    const Instant b = series.points().back().time;
    if (!first || a < *first) first = a;
    if (!last || b > *last) last = b;
  }
  return {{"id", s.id},
          {"name", s.name},
          {"latitude", s.latitude},
          {"longitude", s.longitude},
          {"kind", std::string(to_string(s.kind))},
          {"dataset_id", ds.id},
          {"attributes", attributes},
          {"start", first ? json(format_iso8601(*first)) : json(nullptr)},
          {"end", last ? json(format_iso8601(*last)) : json(nullptr)}};
}

json dataset_info_json(const DatasetInfo& d) {
  return {{"id", d.id},
          {"station_count", d.station_count},
          {"reading_count", d.reading_count},
          {"ingested_at", format_iso8601(d.ingested_at)},
          {"author", d.author}};
}

}  // namespace

void mount_api(httplib::Server& server, Store& store, ExperimentService& experiments) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, X-Author"},
                              {"Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/health", guarded([](const auto&, auto& res) { send(res, {{"ok", true}}); }));

  server.Get("/api/blocks", guarded([](const auto&, auto& res) { send(res, pipeline::registry_to_json()); }));

  server.Get("/api/configs/default", guarded([](const auto&, auto& res) {
               send(res, pipeline::config_to_json(pipeline::default_config()));
             }));

  server.Post("/api/configs/validate", guarded([](const auto& req, auto& res) {
                const json body = body_of(req);
                const auto config = pipeline::config_from_json(body.contains("config") ? body.at("config") : body);
                const auto violations = pipeline::validate(config);
                json out = {{"valid", violations.empty()}, {"violations", pipeline::violations_to_json(violations)}};
                if (violations.empty()) {
                  const auto canonical = pipeline::canonicalize(config);
                  out["config_hash"] = pipeline::config_hash(canonical);
                  out["canonical"] = pipeline::config_to_json(canonical);
                }
                send(res, out);
              }));

  server.Get("/api/datasets", guarded([&store](const auto&, auto& res) {
               json out = json::array();
               for (const auto& d : store.datasets()) out.push_back(dataset_info_json(d));
               send(res, out);
             }));

  server.Post("/api/datasets", guarded([&store](const auto& req, auto& res) {
                const json body = body_of(req);
                const auto outcome = store.ingest(body.at("readings_csv").get<std::string>(),
                                                  body.at("stations_csv").get<std::string>(), author_of(req, body));
                json out = dataset_info_json(outcome.info);
                out["created"] = outcome.created;
                send(res, out, outcome.created ? 201 : 200);
              }));

  server.Get("/api/stations", guarded([&store](const auto& req, auto& res) {
               json out = json::array();
               if (auto id = param(req, "dataset"); id && !id->empty()) {
                 auto ds = store.dataset(*id);
                 for (const auto& s : ds->stations) out.push_back(station_json(*ds, s));
               } else {
                 // Latest dataset wins for a station present in several.
                 std::map<std::string, json> seen;
                 for (const auto& info : store.datasets()) {
                   auto ds = store.dataset(info.id);
                   for (const auto& s : ds->stations) seen[s.id] = station_json(*ds, s);
                 }
                 for (auto& [id, row] : seen) out.push_back(std::move(row));
               }
               send(res, out);
             }));

  server.Get("/api/series", guarded([&store](const auto& req, auto& res) {
               const std::string station = required(req, "station");
               const Attribute attribute = attribute_from_string(required(req, "attribute"));
               auto ds = pick_dataset(store, req, station);
               std::optional<Instant> from, to;
               if (auto v = param(req, "from")) from = parse_iso8601(*v);
               if (auto v = param(req, "to")) to = parse_iso8601(*v);
               const std::size_t resolution = size_param(req, "resolution");
               json out = series_to_json(series(*ds, station, attribute, from, to, resolution));
               out["dataset_id"] = ds->id;
               out["station_id"] = station;
               out["attribute"] = std::string(to_string(attribute));
               send(res, out);
             }));

  server.Get("/api/aggregates", guarded([&store](const auto& req, auto& res) {
               const std::string station = required(req, "station");
               const Attribute attribute = attribute_from_string(required(req, "attribute"));
               const PeriodLevel level = period_level_from_string(param(req, "level").value_or("year"));
               auto ds = pick_dataset(store, req, station);
               const RawSeries* raw = ds->find_series(station, attribute);
               if (!ds->find_station(station)) throw Error(Errc::UnknownStation, "no station \"" + station + "\"");
               PeriodAggregate agg;
               if (raw && !raw->empty()) {
                 agg = period_aggregate(resample(*raw, Duration{3600}), level, param(req, "anchor").value_or(""));
               } else {
                 agg.level = level;
                 agg.anchor = param(req, "anchor").value_or("");
               }
               json out = aggregate_to_json(agg);
               out["dataset_id"] = ds->id;
               out["station_id"] = station;
               out["attribute"] = std::string(to_string(attribute));
               send(res, out);
             }));

  server.Get("/api/experiments", guarded([&experiments](const auto&, auto& res) {
               json out = json::array();
               for (const auto& s : experiments.list()) out.push_back(status_to_json(s));
               send(res, out);
             }));

  server.Post("/api/experiments", guarded([&experiments](const auto& req, auto& res) {
                const json body = body_of(req);
                SubmitRequest request = submit_request_from_json(body);
                request.author = author_of(req, body);
                const std::string id = experiments.submit(request);
                send(res, status_to_json(experiments.poll(id)), 202);
              }));

  server.Get("/api/experiments/:id", guarded([&experiments, &store](const auto& req, auto& res) {
               const std::string id = req.path_params.at("id");
               json out = status_to_json(experiments.poll(id));
               if (store.has_experiment(id)) {
                 auto r = store.experiment(id);
                 out["summary"] = {{"model_count", r->summary.model_count},
                                   {"failed_count", r->summary.failed_count},
                                   {"event_count", r->summary.event_count},
                                   {"mean_events_per_model", r->summary.mean_events_per_model}};
                 out["dataset_id"] = r->dataset_id;
                 out["config_hash"] = r->config_hash;
                 out["config"] = pipeline::config_to_json(r->config);
                 out["seed"] = r->seed;
               }
               send(res, out);
             }));

  server.Delete("/api/experiments/:id", guarded([&store](const auto& req, auto& res) {
                  store.delete_experiment(req.path_params.at("id"), author_of(req, json::object()));
                  send(res, {{"deleted", req.path_params.at("id")}});
                }));

  server.Post("/api/experiments/:id/cancel", guarded([&experiments](const auto& req, auto& res) {
                send(res, status_to_json(experiments.cancel(req.path_params.at("id"))));
              }));

  server.Get("/api/experiments/:id/result", guarded([&experiments](const auto& req, auto& res) {
               const std::string id = req.path_params.at("id");
               auto result = experiments.fetch(id);
               if (!result) {
                 send(res, {{"error", "NotReady"}, {"status", status_to_json(experiments.poll(id))}}, 409);
                 return;
               }
               send(res, pipeline::report_to_json(*result));
             }));

  server.Get("/api/experiments/:id/signals", guarded([&experiments](const auto& req, auto& res) {
               const std::string id = req.path_params.at("id");
               auto result = experiments.fetch(id);
               if (!result) {
                 send(res, {{"error", "NotReady"}, {"status", status_to_json(experiments.poll(id))}}, 409);
                 return;
               }
               send(res, signals(*result, required(req, "station"), attribute_from_string(required(req, "attribute"))));
             }));

  server.Post("/api/experiments/:id/evaluate", guarded([&experiments](const auto& req, auto& res) {
                const std::string id = req.path_params.at("id");
                const json body = body_of(req);
                auto result = experiments.fetch(id);
                if (!result) {
                  send(res, {{"error", "NotReady"}, {"status", status_to_json(experiments.poll(id))}}, 409);
                  return;
                }
                const auto labels = evaluation::parse_labels(body.at("labels_csv").get<std::string>());
                send(res, evaluation::report_to_json(evaluate_result(*result, labels, body.value("beta", 0.5))));
              }));

  server.Get("/api/events", guarded([&store](const auto& req, auto& res) {
               EventFilter f;
               if (auto v = param(req, "experiment"); v && !v->empty()) f.experiment_id = *v;
               if (auto v = param(req, "station"); v && !v->empty()) f.station_id = *v;
               if (auto v = param(req, "attribute"); v && !v->empty()) f.attribute = attribute_from_string(*v);
               if (auto v = param(req, "include_hidden")) f.include_hidden = *v == "1" || *v == "true";
               json out = json::array();
               for (const auto& r : store.events(f)) out.push_back(record_to_json(r));
               send(res, out);
             }));

  server.Post("/api/events", guarded([&store](const auto& req, auto& res) {
                const json body = body_of(req);
                send(res, record_to_json(store.create_event(new_event_from_json(body), author_of(req, body))), 201);
              }));

  server.Get("/api/events/:id", guarded([&store](const auto& req, auto& res) {
               send(res, record_to_json(store.event(req.path_params.at("id"))));
             }));

  server.Patch("/api/events/:id", guarded([&store](const auto& req, auto& res) {
                 json body = body_of(req);
                 const std::string author = author_of(req, body);
                 if (body.is_object()) body.erase("author");
                 send(res, record_to_json(store.modify_event(req.path_params.at("id"), event_patch_from_json(body), author)));
               }));

  server.Delete("/api/events/:id", guarded([&store](const auto& req, auto& res) {
                  const std::string id = req.path_params.at("id");
                  const EventRecord after = store.delete_event(id, author_of(req, json::object()));
                  json out = record_to_json(after);
                  out["deleted"] = after.original.source == detector::EventSource::manual;
                  send(res, out);
                }));

  server.Post("/api/events/:id/annotations", guarded([&store](const auto& req, auto& res) {
                const json body = body_of(req);
                const Annotation a = store.annotate(req.path_params.at("id"), body.value("text", ""),
                                                    body.value("tags", std::vector<std::string>{}), author_of(req, body));
                send(res,
                     {{"event_id", a.event_id},
                      {"author", a.author},
                      {"at", format_iso8601(a.at)},
                      {"text", a.text},
                      {"tags", a.tags}},
                     201);
              }));
}

}  // namespace aqad::service
