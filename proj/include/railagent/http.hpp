#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace railagent {

struct HttpRequest {
  std::string method = "GET";
  std::string url;  // absolute, scheme://host[:port]/path?query
  std::map<std::string, std::string> headers;
  std::string body;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Raised when no HTTP response could be obtained at all.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& req) = 0;
};

/// cpp-httplib backed client. https URLs need an OpenSSL-enabled build.
std::shared_ptr<HttpTransport> make_http_transport();

std::string url_encode(std::string_view s);

}  // namespace railagent
