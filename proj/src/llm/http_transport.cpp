// Eigen must precede httplib: the OpenSSL headers it pulls in define
// macros that collide with Eigen's product kernels.
#include "gapbench/error.hpp"
#include "gapbench/llm.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace gapbench::llm {

namespace {

class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string origin, std::string prefix, std::string token)
      : client_(origin), prefix_(std::move(prefix)), token_(std::move(token)) {
    client_.set_connection_timeout(10);
    client_.set_read_timeout(600);
    client_.set_write_timeout(60);
  }

  HttpResponse post(const std::string& path, const std::string& body) override {
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = client_.Post(prefix_ + path, headers, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::Transport, "POST " + prefix_ + path + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  httplib::Client client_;
  std::string prefix_;
  std::string token_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url, std::string bearer_token) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "endpoint needs a scheme: " + base_url);
  const auto path_start = base_url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return std::make_unique<HttpTransport>(std::move(origin), std::move(prefix), std::move(bearer_token));
}

}  // namespace gapbench::llm
