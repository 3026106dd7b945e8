#include <algorithm>
#include <numeric>

#include "gapbench/error.hpp"
#include "gapbench/retrieval.hpp"
#include "json.hpp"

namespace gapbench::retrieval {

VectorIndex::VectorIndex(std::string paper_id, std::string model, std::vector<Chunk> chunks, Eigen::MatrixXd vectors)
    : paper_id_(std::move(paper_id)),
      model_(std::move(model)),
      chunks_(std::move(chunks)),
      vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != chunks_.size()) {
    throw Error(ErrorCode::Consistency, "index needs one vector per chunk");
  }
  norms_ = vectors_.rowwise().norm();
}

RetrievalResult VectorIndex::search(const Eigen::Ref<const Eigen::VectorXd>& query, std::size_t k) const {
  RetrievalResult out;
  if (empty() || k == 0) return out;
  if (query.size() != vectors_.cols()) {
    throw Error(ErrorCode::Consistency, "query dimension " + std::to_string(query.size()) + " != index dimension " +
                                            std::to_string(vectors_.cols()));
  }
  const double qnorm = query.norm();
  const Eigen::VectorXd dots = vectors_ * query;
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(dots.size());
  for (Eigen::Index i = 0; i < dots.size(); ++i) {
    const double denom = norms_(i) * qnorm;
    if (denom > 0.0) scores(i) = dots(i) / denom;
  }

  std::vector<std::size_t> order(chunks_.size());
  std::iota(order.begin(), order.end(), 0);
  const auto n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto sa = scores(static_cast<Eigen::Index>(a));
                      const auto sb = scores(static_cast<Eigen::Index>(b));
                      if (sa != sb) return sa > sb;
                      return chunks_[a].chunk_id < chunks_[b].chunk_id;
                    });
  out.ranked.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.ranked.push_back({&chunks_[order[i]], scores(static_cast<Eigen::Index>(order[i]))});
  }
  return out;
}

VectorIndex build_index(const corpus::PaperDoc& doc, const RagConfig& config, llm::Gateway& gateway) {
  config.validate();
  auto chunks = chunk_text(doc, config.chunk_size, config.chunk_overlap());
  Eigen::MatrixXd vectors;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto v = gateway.embed({config.embedding_model, {chunks[i].text}}).front();
    if (i == 0) vectors.resize(static_cast<Eigen::Index>(chunks.size()), v.size());
    if (v.size() != vectors.cols()) throw Error(ErrorCode::Consistency, "embedding dimension changed within a paper");
    vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return {doc.paper_id, config.embedding_model, std::move(chunks), std::move(vectors)};
}

Eigen::VectorXd embed_query(std::string_view query, const std::string& model, llm::Gateway& gateway) {
  return gateway.embed({model, {std::string(query)}}).front();
}

RetrievalResult retrieve(const VectorIndex& index, std::string_view query, std::size_t k, llm::Gateway& gateway) {
  if (k < 1) throw Error(ErrorCode::Precondition, "retrieve needs k >= 1");
  if (index.empty()) return {{}, std::string(query)};
  auto result = index.search(embed_query(query, index.model(), gateway), k);
  result.query = std::string(query);
  return result;
}

std::optional<std::size_t> trace_target_rank(const VectorIndex& index, const Eigen::Ref<const Eigen::VectorXd>& query,
                                             std::string_view target_text) {
  if (index.empty()) return std::nullopt;
  const auto ranking = index.search(query, index.size());
  for (std::size_t i = 0; i < ranking.ranked.size(); ++i) {
    if (ranking.ranked[i].chunk->text.find(target_text) != std::string::npos) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> trace_target_rank(const VectorIndex& index, std::string_view query,
                                             std::string_view target_text, llm::Gateway& gateway) {
  if (index.empty()) return std::nullopt;
  return trace_target_rank(index, embed_query(query, index.model(), gateway), target_text);
}

void dump_index(const VectorIndex& index, std::ostream& out) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& c = index.chunks()[i];
    nlohmann::ordered_json j;
    j["paper_id"] = index.paper_id();
    j["chunk_id"] = c.chunk_id;
    j["span"] = {c.first_sentence, c.last_sentence};
    j["token_count"] = c.token_count;
    j["dimension"] = index.dimension();
    std::vector<double> v(static_cast<std::size_t>(index.dimension()));
    Eigen::Map<Eigen::VectorXd>(v.data(), index.dimension()) = index.vectors().row(static_cast<Eigen::Index>(i));
    j["vector"] = v;
    out << j.dump() << "\n";
  }
}

}  // namespace gapbench::retrieval
