#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace gapbench::llm {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;

  void validate() const;
};

struct EmbeddingRequest {
  std::string model;
  std::vector<std::string> texts;

  void validate() const;
};

std::string sha256_hex(std::string_view data);

/// Canonical serializations; the fingerprint is the SHA-256 of their dump.
nlohmann::ordered_json canonical_json(const ChatRequest& req);
nlohmann::ordered_json canonical_json(const EmbeddingRequest& req);
std::string fingerprint(const ChatRequest& req);
std::string fingerprint(const EmbeddingRequest& req);

enum class Mode { Live, Record, Replay };
std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body to a path under the configured endpoint. Implementations
/// throw Error{Transport} when no response was received.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body) = 0;
};

/// cpp-httplib client against an OpenAI-compatible base URL such as
/// "http://localhost:11434/v1".
std::unique_ptr<Transport> make_http_transport(const std::string& base_url, std::string bearer_token);

/// Environment variable read for the bearer token.
inline constexpr const char* kApiKeyEnv = "GAPBENCH_API_KEY";

/// Recorded responses, one JSON file per fingerprint. Loaded once; lookups
/// after construction only read the immutable map.
class ReplayStore {
 public:
  ReplayStore() = default;
  explicit ReplayStore(std::filesystem::path dir);

  [[nodiscard]] const nlohmann::ordered_json* find(const std::string& fingerprint) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

  /// Writes `<dir>/<fingerprint>.json`. Only valid for stores that are not
  /// used for replay; the in-memory map is left untouched.
  void write(const std::string& fingerprint, const nlohmann::ordered_json& fixture) const;

 private:
  std::filesystem::path dir_;
  std::unordered_map<std::string, nlohmann::ordered_json> entries_;
};

struct GatewayConfig {
  Mode mode = Mode::Replay;
  std::string endpoint;
  std::filesystem::path fixtures_dir;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  int retry_backoff_ms = 250;
};

struct GatewayStats {
  std::size_t chat_calls = 0;
  std::size_t embed_calls = 0;
  std::size_t network_attempts = 0;
  std::size_t retries = 0;
};

using Embedding = Eigen::VectorXd;

class Gateway {
 public:
  /// `transport` may be null in replay mode. In live/record mode a null
  /// transport is replaced by an HTTP transport for `config.endpoint`.
  explicit Gateway(GatewayConfig config, std::unique_ptr<Transport> transport = nullptr);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::string chat(const ChatRequest& req);
  std::vector<Embedding> embed(const EmbeddingRequest& req);

  [[nodiscard]] GatewayStats stats() const;
  [[nodiscard]] const GatewayConfig& config() const { return config_; }

 private:
  nlohmann::ordered_json call(const std::string& path, const nlohmann::ordered_json& body);
  nlohmann::ordered_json resolve(const std::string& fp, const nlohmann::ordered_json& request,
                                 const std::string& path, const nlohmann::ordered_json& wire_body,
                                 const std::function<nlohmann::ordered_json(const nlohmann::ordered_json&)>& extract);
  void check_dimension(const std::string& model, std::size_t dim);

  GatewayConfig config_;
  std::unique_ptr<Transport> transport_;
  ReplayStore store_;
  std::counting_semaphore<64> limiter_;
  std::atomic<std::size_t> chat_calls_{0};
  std::atomic<std::size_t> embed_calls_{0};
  std::atomic<std::size_t> network_attempts_{0};
  std::atomic<std::size_t> retries_{0};
  std::mutex dim_mutex_;
  std::map<std::string, std::size_t> dims_;
  std::mutex write_mutex_;
};

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace gapbench::llm
