#pragma once

#include "aqad/core/error.hpp"
#include "aqad/service/experiments.hpp"
#include "aqad/service/store.hpp"

namespace httplib {
class Server;
}

namespace aqad::service {

/// HTTP status used for an error code: 404 for unknown ids, 409 for
/// conflicts, 400 for bad input, 500 otherwise.
int http_status(Errc code) noexcept;

/// Registers every /api route on `server`. Bodies are JSON; errors come back
/// as {"error": <code>, "message": ...}. The author of a mutation is taken
/// from the body's "author" field, else the X-Author header, else "api".
///
///   GET    /api/health
///   GET    /api/blocks                      block registry schema
///   GET    /api/configs/default
///   POST   /api/configs/validate            {"valid", "violations", "config_hash"}
///   GET    /api/datasets
///   POST   /api/datasets                    {"readings_csv", "stations_csv"}
///   GET    /api/stations?dataset=
///   GET    /api/series?dataset=&station=&attribute=&from=&to=&resolution=
///   GET    /api/aggregates?dataset=&station=&attribute=&level=&anchor=
///   GET    /api/experiments
///   POST   /api/experiments                 {"config", "dataset_id", "seed", "selection"}
///   GET    /api/experiments/:id             status, per-model states
///   DELETE /api/experiments/:id
///   POST   /api/experiments/:id/cancel
///   GET    /api/experiments/:id/result      report (409 while running)
///   GET    /api/experiments/:id/signals?station=&attribute=
///   POST   /api/experiments/:id/evaluate    {"labels_csv", "beta"}
///   GET    /api/events?experiment=&station=&attribute=&include_hidden=
///   POST   /api/events
///   GET    /api/events/:id
///   PATCH  /api/events/:id
///   DELETE /api/events/:id
///   POST   /api/events/:id/annotations      {"text", "tags"}
void mount_api(httplib::Server& server, Store& store, ExperimentService& experiments);

}  // namespace aqad::service
