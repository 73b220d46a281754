#include "railagent/service.hpp"

#include <charconv>

#include <httplib.h>

#include "railagent/http.hpp"
#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

namespace {

ApiResponse json_response(int status, const ordered_json& j) { return {status, j.dump()}; }

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  return json_response(status, j);
}

std::optional<int> parse_positive(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

ApiResponse ApiRouter::handle(std::string_view method, std::string_view path, std::string_view body) const {
  auto parts = split(path, '/');
  std::vector<std::string> seg;
  for (auto& p : parts)
    if (!p.empty()) seg.push_back(p);
  if (seg.size() < 2 || seg[0] != "api") return error_response(404, "not_found", "unknown route");

  try {
    if (seg.size() == 2 && seg[1] == "health") {
      if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
      return json_response(200, {{"status", "ok"}});
    }
    if (seg[1] != "sessions") return error_response(404, "not_found", "unknown route");

    if (seg.size() == 2) {
      if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
      auto j = nlohmann::json::parse(body.empty() ? std::string_view("{}") : body);
      if (!j.is_object()) return error_response(400, "bad_request", "body must be an object");
      PassengerProfile profile;
      if (j.contains("profile")) profile = profile_from_json(j["profile"]);
      SessionOverrides ov;
      if (j.contains("config")) {
        const auto& c = j["config"];
        if (c.contains("max_iterations")) ov.max_iterations = c["max_iterations"].get<int>();
        if (c.contains("error_info")) ov.error_info = c["error_info"].get<bool>();
      }
      auto id = sessions_.create_session(profile, ov);
      return json_response(201, {{"session_id", id}});
    }

    const auto& id = seg[2];
    if (seg.size() == 4 && seg[3] == "messages") {
      if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
      auto j = nlohmann::json::parse(body);
      if (!j.is_object() || !j.contains("text") || !j["text"].is_string())
        return error_response(400, "bad_request", "body must contain a text string");
      auto text = j["text"].get<std::string>();
      if (trim(text).empty()) return error_response(400, "validation_error", "text must not be empty");
      auto r = sessions_.post_message(id, text);
      ordered_json out;
      out["answer"] = r.answer ? ordered_json(*r.answer) : ordered_json(nullptr);
      out["outcome"] = outcome_name(r.outcome);
      out["round_index"] = r.round_index;
      return json_response(200, out);
    }
    if (seg.size() == 5 && seg[3] == "traces") {
      if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
      auto round = parse_positive(seg[4]);
      if (!round) return error_response(400, "bad_request", "round index must be an integer");
      return {200, sessions_.get_trace(id, *round)};
    }
    return error_response(404, "not_found", "unknown route");
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const ValidationError& e) {
    return error_response(400, "validation_error", e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, "validation_error", e.what());
  } catch (const SessionNotFound& e) {
    return error_response(404, "session_not_found", e.what());
  } catch (const TraceNotFound& e) {
    return error_response(404, "not_found", e.what());
  } catch (const RoundInProgress& e) {
    return error_response(409, "round_in_progress", e.what());
  } catch (const TransportError& e) {
    return error_response(502, "backend_unavailable", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal_error", e.what());
  }
}

struct ApiServer::Impl {
  const ApiRouter& router;
  httplib::Server server;
  explicit Impl(const ApiRouter& r) : router(r) {}
};

ApiServer::ApiServer(const ApiRouter& router) : impl_(std::make_unique<Impl>(router)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    auto r = impl_->router.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw std::runtime_error("cannot bind port " + std::to_string(port));
  return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace railagent
