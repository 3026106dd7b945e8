#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "gapbench/error.hpp"
#include "gapbench/llm.hpp"

namespace gapbench::llm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ptrdiff_t limiter_size(std::size_t requested) {
  return static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(requested, 1, 64));
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<64>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<64>& sem_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Consistency, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::Precondition, "chat request needs at least one message");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::Precondition, "temperature must be >= 0");
}

void EmbeddingRequest::validate() const {
  if (texts.empty()) throw Error(ErrorCode::Precondition, "embedding request needs at least one text");
}

ordered_json canonical_json(const ChatRequest& req) {
  ordered_json j;
  j["kind"] = "chat";
  j["model"] = req.model;
  j["messages"] = ordered_json::array();
  for (const auto& m : req.messages) {
    ordered_json msg;
    msg["role"] = m.role;
    msg["content"] = m.content;
    j["messages"].push_back(std::move(msg));
  }
  j["temperature"] = req.temperature;
  j["max_tokens"] = req.max_output_tokens;
  return j;
}

ordered_json canonical_json(const EmbeddingRequest& req) {
  ordered_json j;
  j["kind"] = "embedding";
  j["model"] = req.model;
  j["texts"] = req.texts;
  return j;
}

std::string fingerprint(const ChatRequest& req) { return sha256_hex(canonical_json(req).dump()); }

std::string fingerprint(const EmbeddingRequest& req) { return sha256_hex(canonical_json(req).dump()); }

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "replay";
}

Mode parse_mode(std::string_view text) {
  if (text == "live") return Mode::Live;
  if (text == "record") return Mode::Record;
  if (text == "replay") return Mode::Replay;
  throw Error(ErrorCode::Config, "unknown gateway mode: " + std::string(text));
}

ReplayStore::ReplayStore(fs::path dir) : dir_(std::move(dir)) {
  if (dir_.empty() || !fs::exists(dir_)) return;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    try {
      auto j = ordered_json::parse(in);
      entries_.emplace(entry.path().stem().string(), std::move(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Load, "corrupt fixture " + entry.path().string() + ": " + e.what());
    }
  }
}

const ordered_json* ReplayStore::find(const std::string& fingerprint) const {
  const auto it = entries_.find(fingerprint);
  return it == entries_.end() ? nullptr : &it->second;
}

void ReplayStore::write(const std::string& fingerprint, const ordered_json& fixture) const {
  if (dir_.empty()) throw Error(ErrorCode::Config, "record mode needs a fixtures directory");
  fs::create_directories(dir_);
  const auto path = dir_ / (fingerprint + ".json");
  const auto tmp = dir_ / (fingerprint + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write fixture " + tmp.string());
    out << fixture.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

Gateway::Gateway(GatewayConfig config, std::unique_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      store_(config_.fixtures_dir),
      limiter_(limiter_size(config_.max_in_flight)) {
  if (config_.max_attempts < 1) throw Error(ErrorCode::Config, "max_attempts must be >= 1");
  if (config_.mode == Mode::Replay && config_.fixtures_dir.empty()) {
    throw Error(ErrorCode::Config, "replay mode needs a fixtures directory");
  }
  if (config_.mode != Mode::Replay && !transport_) {
    if (config_.endpoint.empty()) throw Error(ErrorCode::Config, "live/record mode needs an endpoint");
    const char* token = std::getenv(kApiKeyEnv);
    transport_ = make_http_transport(config_.endpoint, token ? token : "");
  }
}

Gateway::~Gateway() = default;

GatewayStats Gateway::stats() const {
  return {chat_calls_.load(), embed_calls_.load(), network_attempts_.load(), retries_.load()};
}

ordered_json Gateway::call(const std::string& path, const ordered_json& body) {
  if (!transport_) throw Error(ErrorCode::Config, "no transport configured");
  SlotGuard slot(limiter_);
  const auto payload = body.dump();
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    ++network_attempts_;
    if (attempt > 1) {
      ++retries_;
      spdlog::warn("gateway: retrying {} (attempt {}/{}) after: {}", path, attempt, config_.max_attempts,
                   last_error);
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms * (attempt - 1)));
    }
    HttpResponse resp;
    try {
      resp = transport_->post(path, payload);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    if (resp.status == 429 || resp.status >= 500) {
      last_error = "HTTP " + std::to_string(resp.status);
      continue;
    }
    if (resp.status != 200) {
      throw Error(ErrorCode::Transport, path + " returned HTTP " + std::to_string(resp.status) + ": " + resp.body);
    }
    try {
      return ordered_json::parse(resp.body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Transport, path + " returned malformed JSON: " + e.what());
    }
  }
  throw Error(ErrorCode::Transport,
              path + " failed after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

ordered_json Gateway::resolve(const std::string& fp, const ordered_json& request, const std::string& path,
                              const ordered_json& wire_body,
                              const std::function<ordered_json(const ordered_json&)>& extract) {
  if (config_.mode == Mode::Replay) {
    const auto* fixture = store_.find(fp);
    if (!fixture) throw Error(ErrorCode::FixtureMissing, "fixture missing for fingerprint " + fp);
    return fixture->at("response");
  }
  auto response = extract(call(path, wire_body));
  if (config_.mode == Mode::Record) {
    ordered_json fixture;
    fixture["fingerprint"] = fp;
    fixture["request"] = request;
    fixture["response"] = response;
    std::lock_guard lock(write_mutex_);
    store_.write(fp, fixture);
  }
  return response;
}

std::string Gateway::chat(const ChatRequest& req) {
  req.validate();
  ++chat_calls_;
  const auto request = canonical_json(req);
  ordered_json wire;
  wire["model"] = req.model;
  wire["messages"] = request["messages"];
  wire["temperature"] = req.temperature;
  wire["max_tokens"] = req.max_output_tokens;
  wire["stream"] = false;
  const auto response = resolve(fingerprint(req), request, "/chat/completions", wire, [](const ordered_json& body) {
    try {
      ordered_json out;
      const auto& content = body.at("choices").at(0).at("message").at("content");
      out["content"] = content.is_null() ? std::string() : content.get<std::string>();
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Transport, std::string("unexpected chat response shape: ") + e.what());
    }
  });
  return response.at("content").get<std::string>();
}

std::vector<Embedding> Gateway::embed(const EmbeddingRequest& req) {
  req.validate();
  ++embed_calls_;
  const auto request = canonical_json(req);
  ordered_json wire;
  wire["model"] = req.model;
  wire["input"] = req.texts;
  const auto response = resolve(fingerprint(req), request, "/embeddings", wire, [](const ordered_json& body) {
    try {
      const auto& data = body.at("data");
      std::vector<std::pair<std::size_t, ordered_json>> rows;
      for (std::size_t i = 0; i < data.size(); ++i) {
        rows.emplace_back(data[i].value("index", i), data[i].at("embedding"));
      }
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      ordered_json out;
      out["embeddings"] = ordered_json::array();
      for (auto& [_, v] : rows) out["embeddings"].push_back(std::move(v));
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Transport, std::string("unexpected embedding response shape: ") + e.what());
    }
  });

  const auto& rows = response.at("embeddings");
  if (rows.size() != req.texts.size()) {
    throw Error(ErrorCode::Consistency, "embedding count " + std::to_string(rows.size()) + " != text count " +
                                            std::to_string(req.texts.size()));
  }
  std::vector<Embedding> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Embedding v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) v(static_cast<Eigen::Index>(i)) = row[i].get<double>();
    check_dimension(req.model, row.size());
    out.push_back(std::move(v));
  }
  return out;
}

void Gateway::check_dimension(const std::string& model, std::size_t dim) {
  std::lock_guard lock(dim_mutex_);
  const auto [it, inserted] = dims_.emplace(model, dim);
  if (!inserted && it->second != dim) {
    throw Error(ErrorCode::Consistency, "embedding dimension for " + model + " changed from " +
                                            std::to_string(it->second) + " to " + std::to_string(dim));
  }
  if (dim == 0) throw Error(ErrorCode::Consistency, "empty embedding vector from " + model);
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace gapbench::llm
