#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "msdpp/service.hpp"

namespace httplib {
class Server;
}

namespace msdpp {

/// Stateless HTTP front end over a read-only Snapshot.
///
///   GET  /health        {"status":"ok"}
///   GET  /queries       ids and texts
///   GET  /gallery/meta  item count and attribute availability
///   POST /rerank        RerankRequest -> rerank response
///   POST /sweep         weight sweep for one attribute -> curves + PRS
///
/// Errors are {"code", "message"} with "field" (400) or "diagnostic_id" (500).
class RerankServer {
 public:
  explicit RerankServer(std::shared_ptr<const Snapshot> snapshot);
  ~RerankServer();
  RerankServer(const RerankServer&) = delete;
  RerankServer& operator=(const RerankServer&) = delete;

  /// Binds host:port (port 0 picks a free port). Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<unsigned long> next_diagnostic_{1};
};

Json gallery_meta(const Snapshot& snap);
Json query_list(const Snapshot& snap);

}  // namespace msdpp
