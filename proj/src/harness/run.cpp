#include <atomic>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "gapbench/error.hpp"
#include "gapbench/harness.hpp"

namespace gapbench::harness {

namespace {

constexpr std::string_view kRunSchema = "gapbench.run/1";

void put_prompts(Json& j, const extract::PromptSet& prompts) {
  j["prompt_version"] = prompts.version;
  j["prompt_digest"] = prompts.digest();
}

const extract::PromptSet& check_prompts(const Json& j, const extract::PromptSet& prompts) {
  const auto recorded = j.at("prompt_digest").get<std::string>();
  if (recorded != prompts.digest()) {
    throw Error(ErrorCode::Config, "prompt set " + prompts.version + " does not match the recorded digest " + recorded +
                                       " (version " + j.at("prompt_version").get<std::string>() + ")");
  }
  return prompts;
}

std::string error_text(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->code())) + ": " + e.what();
  return std::string("error: ") + e.what();
}

}  // namespace

Json config_snapshot(const RunConfig& config, const std::vector<std::string>& paper_ids) {
  Json j;
  j["schema"] = kRunSchema;
  j["extractor"] = extract::to_string(config.spec.family());
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, extract::PromptChainBinding>) {
          j["inference_model"] = b.inference_model;
          j["temperature"] = b.temperature;
          j["max_output_tokens"] = b.max_output_tokens;
          put_prompts(j, b.prompts);
        } else if constexpr (std::is_same_v<T, extract::RagBinding>) {
          j["inference_model"] = b.rag.inference_model;
          j["embedding_model"] = b.rag.embedding_model;
          j["temperature"] = b.rag.temperature;
          j["chunk_size"] = b.rag.chunk_size;
          j["chunk_overlap"] = b.rag.chunk_overlap();
          j["top_k"] = b.rag.top_k;
          j["retrieval_query"] = b.rag.retrieval_query;
          j["max_output_tokens"] = b.rag.max_output_tokens;
          put_prompts(j, b.prompts);
        }
      },
      config.spec.binding);
  j["seed"] = config.seed;
  j["repeat"] = config.repeat;
  j["papers"] = paper_ids;
  return j;
}

RunConfig config_from_snapshot(const Json& j, const extract::PromptSet& prompts) {
  if (j.value("schema", "") != kRunSchema) throw Error(ErrorCode::SchemaMismatch, "not a run snapshot");
  RunConfig config;
  config.seed = j.value("seed", std::uint64_t{0});
  config.repeat = j.value("repeat", std::size_t{0});
  switch (extract::parse_family(j.at("extractor").get<std::string>())) {
    case extract::Family::RuleBased: config.spec.binding = extract::RuleBasedBinding{}; break;
    case extract::Family::PromptChain: {
      extract::PromptChainBinding b;
      b.inference_model = j.at("inference_model").get<std::string>();
      b.temperature = j.at("temperature").get<double>();
      b.max_output_tokens = j.at("max_output_tokens").get<int>();
      b.prompts = check_prompts(j, prompts);
      config.spec.binding = b;
      break;
    }
    case extract::Family::Rag: {
      extract::RagBinding b;
      b.rag.inference_model = j.at("inference_model").get<std::string>();
      b.rag.embedding_model = j.at("embedding_model").get<std::string>();
      b.rag.temperature = j.at("temperature").get<double>();
      b.rag.chunk_size = j.at("chunk_size").get<std::size_t>();
      const auto overlap = j.at("chunk_overlap").get<std::size_t>();
      if (overlap != b.rag.chunk_size / 5) b.rag.chunk_overlap_override = overlap;
      b.rag.top_k = j.at("top_k").get<std::size_t>();
      b.rag.retrieval_query = j.at("retrieval_query").get<std::string>();
      b.rag.max_output_tokens = j.at("max_output_tokens").get<int>();
      b.prompts = check_prompts(j, prompts);
      config.spec.binding = b;
      break;
    }
  }
  return config;
}

std::vector<std::string> RunArtifact::paper_ids() const {
  std::vector<std::string> ids;
  for (const auto& p : papers) ids.push_back(p.paper_id);
  return ids;
}

Json to_json(const RunArtifact& a) {
  Json j;
  j["run_id"] = a.run_id;
  j["snapshot"] = a.snapshot;
  Json papers = Json::array();
  for (const auto& p : a.papers) {
    Json pj;
    pj["paper_id"] = p.paper_id;
    pj["records"] = Json::array();
    for (const auto& r : p.records) pj["records"].push_back(quant::to_json(r));
    pj["drops"] = Json::array();
    for (const auto& d : p.drops) pj["drops"].push_back({{"reason", d.reason}, {"detail", d.detail}});
    pj["logs"] = Json::array();
    for (const auto& l : p.logs) pj["logs"].push_back({{"reason", l.reason}, {"detail", l.detail}});
    pj["error"] = p.error ? Json(*p.error) : Json(nullptr);
    papers.push_back(std::move(pj));
  }
  j["papers"] = std::move(papers);
  return j;
}

RunArtifact artifact_from_json(const Json& j) {
  RunArtifact a;
  a.run_id = j.at("run_id").get<std::string>();
  a.snapshot = j.at("snapshot");
  for (const auto& pj : j.at("papers")) {
    PaperRun p;
    p.paper_id = pj.at("paper_id").get<std::string>();
    for (const auto& r : pj.at("records")) p.records.push_back(quant::record_from_json(r));
    for (const auto& d : pj.at("drops")) {
      p.drops.push_back({p.paper_id, d.at("reason").get<std::string>(), d.at("detail").get<std::string>()});
    }
    for (const auto& l : pj.at("logs")) {
      p.logs.push_back({p.paper_id, l.at("reason").get<std::string>(), l.at("detail").get<std::string>()});
    }
    if (!pj.at("error").is_null()) p.error = pj.at("error").get<std::string>();
    a.papers.push_back(std::move(p));
  }
  return a;
}

void write_artifact(const RunArtifact& artifact, const std::filesystem::path& path) {
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text << '\n')) throw Error(ErrorCode::Io, "cannot write " + p.string());
  };
  write(path, to_json(artifact).dump(2));
  Json timing{{"run_id", artifact.run_id}, {"wall_seconds", artifact.wall_seconds}};
  write(path.string() + ".timing.json", timing.dump(2));
}

RunArtifact read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Load, "cannot read artifact: " + path.string());
  RunArtifact a;
  try {
    a = artifact_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Load, path.string() + ": " + e.what());
  }
  std::ifstream timing(path.string() + ".timing.json");
  if (timing) {
    try {
      a.wall_seconds = Json::parse(timing).value("wall_seconds", 0.0);
    } catch (const nlohmann::json::exception&) {
      spdlog::warn("ignoring unreadable timing sidecar for {}", path.string());
    }
  }
  return a;
}

RunArtifact run_extraction(const std::vector<corpus::PaperDoc>& docs, const RunConfig& config,
                           llm::Gateway* gateway) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.paper_id).second) throw Error(ErrorCode::Validation, "duplicate paper id: " + d.paper_id);
    ids.push_back(d.paper_id);
  }
  if (config.spec.family() != extract::Family::RuleBased && !gateway) {
    throw Error(ErrorCode::Config, std::string(extract::to_string(config.spec.family())) + " extractor needs a gateway");
  }

  RunArtifact artifact;
  artifact.snapshot = config_snapshot(config, ids);
  artifact.run_id = llm::sha256_hex(artifact.snapshot.dump()).substr(0, 16);
  artifact.papers.resize(docs.size());

  auto process = [&](std::size_t i) {
    const auto& doc = docs[i];
    auto& out = artifact.papers[i];
    out.paper_id = doc.paper_id;
    if (doc.sentences.empty()) {
      out.logs.push_back({doc.paper_id, "empty-text", "document has no sentences"});
      return;
    }
    try {
      auto extraction = extract::run_extractor(config.spec, doc, gateway);
      auto cleaned = quant::clean_records(extraction.records);
      out.records = std::move(cleaned.records);
      out.drops = std::move(cleaned.drops);
      out.logs = std::move(extraction.logs);
    } catch (const std::exception& e) {
      out.records.clear();
      out.error = error_text(e);
      spdlog::error("{}: {}", doc.paper_id, *out.error);
    }
  };

  const auto workers = std::max<std::size_t>(1, std::min(config.workers, docs.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < docs.size(); i = next++) process(i);
      });
    }
  }
  artifact.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return artifact;
}

}  // namespace gapbench::harness
