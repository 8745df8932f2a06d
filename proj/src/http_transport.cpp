#include <httplib.h>

#include "aml/llm.hpp"

namespace aml {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& req) override {
    const SplitUrl url = split_url(req.url);
    // one client per request keeps the transport free of shared state
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : req.headers) {
      if (k == "Content-Type") content_type = v;
      else headers.emplace(k, v);
    }
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, headers, req.body, content_type);
    if (!res) {
      const auto err = res.error();
      const auto elapsed = std::chrono::steady_clock::now() - start;
      if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= req.timeout)) {
        throw TimeoutError("request to " + url.origin + " timed out");
      }
      throw TransportError("request to " + url.origin + " failed: " + httplib::to_string(err));
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace aml
