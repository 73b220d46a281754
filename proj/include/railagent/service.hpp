#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "railagent/session.hpp"

namespace railagent {

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Transport-independent request dispatch for the session API.
///
///   POST /api/sessions                      {profile, config?} -> {session_id}
///   POST /api/sessions/{id}/messages        {text} -> {answer, outcome, round_index}
///   GET  /api/sessions/{id}/traces/{round}  -> canonical trace record
///   GET  /api/health                        -> {status}
///
/// Errors are returned as {code, message}.
class ApiRouter {
 public:
  explicit ApiRouter(SessionManager& sessions) : sessions_(sessions) {}
  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  SessionManager& sessions_;
};

/// Blocking HTTP front end over an ApiRouter.
class ApiServer {
 public:
  explicit ApiServer(const ApiRouter& router);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace railagent
