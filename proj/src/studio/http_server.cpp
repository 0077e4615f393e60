#include "imp/studio/http_server.h"

#include <httplib.h>

#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/map_io.h"

namespace imp::studio {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kCountMismatch:
    case ErrorCode::kNoTemplateForCount: return 422;
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidDesign:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kOversizedElement: return 400;
    case ErrorCode::kEndpointUnreachable:
    case ErrorCode::kMalformedResponse: return 502;
    case ErrorCode::kTimeout: return 504;
    default: return 500;
  }
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const Error& e) {
  reply_json(res, status_for(e.code()),
             {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

ParseMode mode_for(const httplib::Request& req) {
  return req.has_param("lenient") && req.get_param_value("lenient") != "0" ? ParseMode::kLenient
                                                                           : ParseMode::kStrict;
}

// Runs a handler and maps library errors onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const json::exception& e) {
      reply_error(res, Error(ErrorCode::kParseError, e.what()));
    } catch (const std::exception& e) {
      reply_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

std::string sse_epoch_event(const EpochSnapshot& s) {
  return "id: " + std::to_string(s.epoch) + "\nevent: epoch\ndata: " + to_json(s).dump() + "\n\n";
}

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kStorageUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpServer::install_routes() {
  httplib::Server& s = *server_;

  s.Post("/designs", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = service_.create_design(design_from_json(parse_body(req), mode_for(req)));
    reply_json(res, 201, {{"id", id}});
  }));

  s.Get(R"(/designs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const DesignRecord r = service_.get_design(req.matches[1]);
    res.set_header("X-Created-Ms", std::to_string(r.created_ms));
    res.set_header("X-Updated-Ms", std::to_string(r.updated_ms));
    res.set_content(canonical_json(r.design), "application/json");
  }));

  s.Put(R"(/designs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    service_.put_design(req.matches[1], design_from_json(parse_body(req), mode_for(req)));
    reply_json(res, 200, {{"id", req.matches[1]}});
  }));

  s.Post(R"(/designs/([^/]+)/predict)",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const std::string id = req.matches[1];
           const Prediction p = service_.predict(id);
           const DesignRecord r = service_.get_design(id);
           json scores = json::array();
           for (std::size_t i = 0; i < p.scores.size() && i < r.design.elements.size(); ++i) {
             scores.push_back({{"id", r.design.elements[i].id}, {"score", p.scores[i]}});
           }
           char hash[17];
           std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(p.content_hash));
           reply_json(res, 200, {{"map", to_json(p.map)}, {"scores", scores}, {"cached", p.cached},
                                 {"hash", hash}});
         }));

  s.Get(R"(/designs/([^/]+)/map\.png)",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          const Prediction p = service_.predict(req.matches[1]);
          const auto png = encode_png(to_grayscale(p.map));
          res.set_content(std::string(png.begin(), png.end()), "image/png");
        }));

  s.Post(R"(/designs/([^/]+)/optimize)",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = req.body.empty() ? json::object() : parse_body(req);
           if (!body.is_object()) throw Error(ErrorCode::kParseError, "body must be an object");
           TargetSpec targets;
           if (body.contains("targets")) {
             if (!body["targets"].is_object()) throw Error(ErrorCode::kParseError, "targets must be an object");
             for (const auto& item : body["targets"].items()) {
               if (!item.value().is_number()) throw Error(ErrorCode::kParseError, "target values must be numbers");
               targets.targets[item.key()] = item.value().get<double>();
             }
           }
           std::optional<GAConfig> config;
           if (body.contains("config")) {
             // Fields absent from the request fall back to the service defaults.
             json merged = to_json(service_.config().ga_defaults);
             merged.update(body["config"]);
             config = ga_config_from_json(merged);
           }
           const std::string job = service_.submit_optimize(req.matches[1], std::move(targets), config);
           reply_json(res, 202, {{"job_id", job}});
         }));

  s.Post(R"(/designs/([^/]+)/reflow)",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           ReflowOptions options;
           options.group_overflow = body.value("group_overflow", false);
           const ReflowOutcome out = service_.reflow(req.matches[1], body.at("width").get<double>(),
                                                     body.at("height").get<double>(), options);
           reply_json(res, 201, {{"id", out.design_id},
                                 {"template_id", out.result.template_id},
                                 {"ranking", out.result.ranking},
                                 {"grouped", out.result.grouped},
                                 {"design", to_json(out.result.design)}});
         }));

  s.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const bool snapshots = !(req.has_param("snapshots") && req.get_param_value("snapshots") == "0");
    reply_json(res, 200, to_json(service_.get_job(req.matches[1]), snapshots));
  }));

  s.Delete(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply_json(res, 200, to_json(service_.cancel_job(req.matches[1]), false));
  }));

  s.Get(R"(/jobs/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string job_id = req.matches[1];
    service_.get_job(job_id);  // 404 before switching to a stream
    std::size_t next = 0;
    if (req.has_header("Last-Event-ID")) {
      try {
        next = static_cast<std::size_t>(std::stoll(req.get_header_value("Last-Event-ID")) + 1);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, "bad Last-Event-ID");
      }
    }
    auto cursor = std::make_shared<std::size_t>(next);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, job_id, cursor](std::size_t, httplib::DataSink& sink) {
          const EventBatch batch =
              service_.wait_events(job_id, *cursor, std::chrono::milliseconds(500));
          for (const EpochSnapshot& snap : batch.events) {
            const std::string frame = sse_epoch_event(snap);
            if (!sink.write(frame.data(), frame.size())) return false;
            ++*cursor;
          }
          if (batch.finished) {
            const std::string end =
                "event: end\ndata: " + json{{"state", std::string(to_string(batch.state))}}.dump() + "\n\n";
            sink.write(end.data(), end.size());
            sink.done();
            return true;
          }
          if (batch.events.empty()) {
            static const std::string ping = ": keep-alive\n\n";
            if (!sink.write(ping.data(), ping.size())) return false;
          }
          return sink.is_writable();
        });
  }));

  s.Get("/templates", guarded([this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const Template& t : service_.templates().templates()) out.push_back(to_json(t));
    reply_json(res, 200, out);
  }));
}

}  // namespace imp::studio
