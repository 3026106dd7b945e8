#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gapbench/corpus.hpp"
#include "gapbench/llm.hpp"

namespace gapbench::retrieval {

inline constexpr std::string_view kDefaultRetrievalQuery = "band gap value of a material in electronvolts";

struct Chunk {
  std::size_t chunk_id = 0;  // 1-based, document order
  std::string text;
  std::size_t token_count = 0;
  std::size_t first_sentence = 0;  // 1-based sentence indices, inclusive
  std::size_t last_sentence = 0;
};

struct RagConfig {
  std::size_t chunk_size = 1000;
  std::optional<std::size_t> chunk_overlap_override;
  std::size_t top_k = 10;
  double temperature = 0.0;
  std::string retrieval_query = std::string(kDefaultRetrievalQuery);
  std::string embedding_model = "bge-m3";
  std::string inference_model = "llama3.1:70b";
  int max_output_tokens = 2048;

  /// floor(chunk_size / 5) unless overridden.
  [[nodiscard]] std::size_t chunk_overlap() const {
    return chunk_overlap_override.value_or(chunk_size / 5);
  }
  /// Throws Error{Config} unless chunk_size > chunk_overlap and top_k >= 1.
  void validate() const;
};

/// Recursive splitting: blank-line paragraphs, then sentences, then
/// whitespace units, then single tokens, until every piece fits; pieces are
/// then merged into chunks of at most `chunk_size` tokens, each chunk
/// starting with up to `chunk_overlap` tokens carried over from the previous.
std::vector<Chunk> chunk_text(const corpus::PaperDoc& doc, std::size_t chunk_size, std::size_t chunk_overlap);

struct ScoredChunk {
  const Chunk* chunk = nullptr;
  double score = 0.0;
};

struct RetrievalResult {
  std::vector<ScoredChunk> ranked;
  std::string query;
};

/// Chunks of one paper with their embeddings as rows of a dense matrix.
/// Immutable once built.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::string paper_id, std::string model, std::vector<Chunk> chunks, Eigen::MatrixXd vectors);

  [[nodiscard]] const std::string& paper_id() const { return paper_id_; }
  [[nodiscard]] const std::string& model() const { return model_; }
  [[nodiscard]] const std::vector<Chunk>& chunks() const { return chunks_; }
  [[nodiscard]] const Eigen::MatrixXd& vectors() const { return vectors_; }
  [[nodiscard]] std::size_t size() const { return chunks_.size(); }
  [[nodiscard]] bool empty() const { return chunks_.empty(); }
  [[nodiscard]] Eigen::Index dimension() const { return vectors_.cols(); }

  /// Cosine scores, descending, ties by smaller chunk_id, truncated to k.
  [[nodiscard]] RetrievalResult search(const Eigen::Ref<const Eigen::VectorXd>& query, std::size_t k) const;

 private:
  std::string paper_id_;
  std::string model_;
  std::vector<Chunk> chunks_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd norms_;
};

/// Chunks the paper and embeds every chunk with one gateway call each.
VectorIndex build_index(const corpus::PaperDoc& doc, const RagConfig& config, llm::Gateway& gateway);

Eigen::VectorXd embed_query(std::string_view query, const std::string& model, llm::Gateway& gateway);

RetrievalResult retrieve(const VectorIndex& index, std::string_view query, std::size_t k, llm::Gateway& gateway);

/// 1-based rank of the first chunk containing `target_text` over the full
/// ranking, or nullopt when no chunk contains it.
std::optional<std::size_t> trace_target_rank(const VectorIndex& index, const Eigen::Ref<const Eigen::VectorXd>& query,
                                             std::string_view target_text);
std::optional<std::size_t> trace_target_rank(const VectorIndex& index, std::string_view query,
                                             std::string_view target_text, llm::Gateway& gateway);

/// Debug dump: one JSON line per chunk with id, sentence span, dimension and vector.
void dump_index(const VectorIndex& index, std::ostream& out);

}  // namespace gapbench::retrieval
