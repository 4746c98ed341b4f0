#pragma once

#include <cstdint>
#include <map>
#include <stop_token>
#include <string>

#include <json.hpp>

#include "patrol/session.hpp"

namespace patrol {

struct ServiceRequest {
  std::string method;  // "GET", "POST", "DELETE"
  std::string path;
  nlohmann::json body = nlohmann::json::object();
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// Request router for the explorer session API. Transport-independent so
/// contract tests can drive it directly; `serve_http` binds it to a socket.
/// The endpoint reference lives in docs/api.md.
class ExplorerService {
 public:
  explicit ExplorerService(LayoutParams params = {}) : sessions_(params) {}

  ServiceResponse handle(const ServiceRequest& request);

  SessionManager& sessions() noexcept { return sessions_; }

 private:
  SessionManager sessions_;
};

/// Blocks serving HTTP on host:port until `stop` is requested. Returns false
/// if the port could not be bound.
bool serve_http(ExplorerService& service, const std::string& host, int port,
                std::stop_token stop = {});

/// Port from PATROLSCOPE_PORT, else 8077.
int default_port();

}  // namespace patrol
