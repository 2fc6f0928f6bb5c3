#include "msdpp/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace msdpp {

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"code", code}, {"message", message}};
}

}  // namespace

Json gallery_meta(const Snapshot& snap) {
  std::size_t with_time = 0;
  std::size_t with_geo = 0;
  std::map<std::string, std::size_t> extra;
  for (const auto& r : snap.gallery) {
    with_time += r.time_minutes.has_value();
    with_geo += r.lat_deg.has_value() && r.lon_deg.has_value();
    for (const auto& [name, _] : r.extra) ++extra[name];
  }
  Json attrs = Json::array();
  for (const auto& s : snap.config.rerank.specs) attrs.push_back(to_json(s));
  return Json{{"items", snap.gallery.size()},
              {"appearance_dim", snap.gallery.empty() ? 0 : snap.gallery.front().appearance.size()},
              {"availability", Json{{"appearance", snap.gallery.size()},
                                    {"time", with_time},
                                    {"geo", with_geo},
                                    {"extra", extra}}},
              {"attributes", attrs},
              {"defaults", to_json(snap.config)}};
}

Json query_list(const Snapshot& snap) {
  Json qs = Json::array();
  for (const auto& q : snap.queries)
    qs.push_back(Json{{"query_id", q.query_id}, {"text", q.text ? Json(*q.text) : Json(nullptr)}});
  return Json{{"queries", qs}};
}

RerankServer::RerankServer(std::shared_ptr<const Snapshot> snapshot)
    : snapshot_(std::move(snapshot)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

RerankServer::~RerankServer() { stop(); }

int RerankServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw ValidationError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw ValidationError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void RerankServer::listen() { server_->listen_after_bind(); }

void RerankServer::stop() {
  if (server_) server_->stop();
}

bool RerankServer::running() const { return server_->is_running(); }

void RerankServer::install_routes() {
  // Engine errors are caught per request; the snapshot is never mutated.
  auto guarded = [this](auto&& body) {
    return [this, body](const httplib::Request& req, httplib::Response& res) {
      Json parsed;
      if (req.method == "POST") {
        try {
          parsed = Json::parse(req.body);
        } catch (const Json::exception& e) {
          auto err = error_body("bad_request", std::string("malformed JSON: ") + e.what());
          err["field"] = "$";
          reply(res, 400, err);
          return;
        }
      }
      try {
        reply(res, 200, body(parsed));
      } catch (const UnknownQuery& e) {
        auto err = error_body("not_found", e.what());
        err["query_id"] = e.id();
        reply(res, 404, err);
      } catch (const FieldError& e) {
        auto err = error_body("bad_request", e.what());
        err["field"] = e.field();
        reply(res, 400, err);
      } catch (const ValidationError& e) {
        auto err = error_body("bad_request", e.what());
        err["field"] = "$";
        reply(res, 400, err);
      } catch (const std::exception& e) {
        const auto id = "diag-" + std::to_string(next_diagnostic_.fetch_add(1));
        spdlog::error("{} {} failed [{}]: {}", req.method, req.path, id, e.what());
        auto err = error_body("engine_error", e.what());
        err["diagnostic_id"] = id;
        reply(res, 500, err);
      }
    };
  };

  server_->Get("/health", guarded([](const Json&) { return Json{{"status", "ok"}}; }));
  server_->Get("/queries", guarded([this](const Json&) { return query_list(*snapshot_); }));
  server_->Get("/gallery/meta", guarded([this](const Json&) { return gallery_meta(*snapshot_); }));
  server_->Post("/rerank", guarded([this](const Json& body) {
    return handle_rerank(*snapshot_, rerank_request_from_json(body));
  }));
  server_->Post("/sweep", guarded([this](const Json& body) {
    const auto request = sweep_request_from_json(body);
    const auto config = apply_overrides(snapshot_->config, request.overrides);
    return weight_sweep(*snapshot_, config, request);
  }));
}

}  // namespace msdpp
