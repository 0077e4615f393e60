#pragma once

#include <memory>
#include <string>

#include "imp/studio/service.h"

namespace httplib {
class Server;
}

namespace imp::studio {

// HTTP+JSON front of a Service.
//
//   POST   /designs                  create; 201 {"id"}
//   GET    /designs/{id}             canonical design JSON
//   PUT    /designs/{id}             replace; invalidates the prediction cache
//   POST   /designs/{id}/predict     {"map", "scores", "cached", "hash"}
//   GET    /designs/{id}/map.png     8-bit grayscale map
//   POST   /designs/{id}/optimize    {"targets":{id:value}, "config"?}; 202 {"job_id"}
//   POST   /designs/{id}/reflow      {"width","height","group_overflow"?}; 201
//   GET    /jobs/{id}                job state and snapshots
//   DELETE /jobs/{id}                cancel
//   GET    /jobs/{id}/events         server-sent events, one "epoch" event per epoch
//   GET    /templates
//
// Error mapping: 404 unknown id, 400 schema violation, 409 job conflict,
// 422 CountMismatch/NoTemplateForCount, 502/504 external predictor failures.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds and serves on a background thread; returns the bound port
  // (port 0 picks a free one). Throws Error(kStorageUnavailable) on bind failure.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// The SSE frame for one snapshot: "id: N\nevent: epoch\ndata: {...}\n\n".
std::string sse_epoch_event(const EpochSnapshot& snapshot);

}  // namespace imp::studio
