#include "railagent/http.hpp"

#include <httplib.h>

#include <cstdio>

namespace railagent {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("malformed url: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& req) override {
    auto [origin, path] = split_url(req.url);
    httplib::Client client(origin);
    if (!client.is_valid()) throw TransportError("unsupported url: " + req.url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers(req.headers.begin(), req.headers.end());
    httplib::Result res;
    if (req.method == "GET") {
      res = client.Get(path, headers);
    } else if (req.method == "POST") {
      auto it = req.headers.find("Content-Type");
      std::string ctype = it == req.headers.end() ? "application/json" : it->second;
      headers.erase("Content-Type");
      res = client.Post(path, headers, req.body, ctype);
    } else {
      throw TransportError("unsupported method " + req.method);
    }
    if (!res) throw TransportError("request to " + origin + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace railagent
