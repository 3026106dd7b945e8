#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fake_model.hpp"
#include "gapbench/error.hpp"
#include "gapbench/retrieval.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace gapbench;
using retrieval::Chunk;
using retrieval::VectorIndex;

namespace {

corpus::PaperDoc doc_of(const std::string& text, const std::string& id = "p1") {
  return corpus::make_doc(id, corpus::SourceVariant::Arxiv, text);
}

std::vector<Chunk> plain_chunks(std::size_t n) {
  std::vector<Chunk> chunks;
  for (std::size_t i = 1; i <= n; ++i) chunks.push_back({i, "chunk " + std::to_string(i), 2, i, i});
  return chunks;
}

VectorIndex mock_index(const Eigen::MatrixXd& rows, std::vector<Chunk> chunks = {}) {
  if (chunks.empty()) chunks = plain_chunks(static_cast<std::size_t>(rows.rows()));
  return {"p1", "mock", std::move(chunks), rows};
}

std::vector<std::size_t> ids(const retrieval::RetrievalResult& r) {
  std::vector<std::size_t> out;
  for (const auto& s : r.ranked) out.push_back(s.chunk->chunk_id);
  return out;
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string("word");
  return s;
}

/// Gateway whose embeddings are looked up by exact text.
std::unique_ptr<llm::Gateway> table_gateway(std::map<std::string, Eigen::VectorXd> table) {
  auto transport = std::make_unique<testkit::ScriptedTransport>(
      [table](const std::string&, const std::string& body) -> llm::HttpResponse {
        std::vector<Eigen::VectorXd> out;
        const auto req = nlohmann::json::parse(body);
        for (const auto& t : req["input"]) out.push_back(table.at(t.get<std::string>()));
        return {200, testkit::embedding_body(out)};
      });
  llm::GatewayConfig config;
  config.mode = llm::Mode::Live;
  return std::make_unique<llm::Gateway>(config, std::move(transport));
}

}  // namespace

TEST(RagConfig, OverlapDefaultsToOneFifth) {
  retrieval::RagConfig c;
  EXPECT_EQ(c.chunk_size, 1000u);
  EXPECT_EQ(c.top_k, 10u);
  EXPECT_EQ(c.chunk_overlap(), 200u);
  c.chunk_size = 500;
  EXPECT_EQ(c.chunk_overlap(), 100u);
  c.chunk_size = 7;
  EXPECT_EQ(c.chunk_overlap(), 1u);
  c.chunk_overlap_override = 0;
  EXPECT_EQ(c.chunk_overlap(), 0u);
}

TEST(RagConfig, Validation) {
  retrieval::RagConfig c;
  EXPECT_NO_THROW(c.validate());
  c.chunk_overlap_override = 1000;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.chunk_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.top_k = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(retrieval::chunk_text(doc_of("a b"), 0, 0), Error);
}

TEST(Chunking, SmallDocumentIsOneChunk) {
  const auto doc = doc_of(words(99) + ".");
  ASSERT_EQ(corpus::count_tokens(doc.raw_text), 100u);
  const auto chunks = retrieval::chunk_text(doc, 1000, 200);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].chunk_id, 1u);
  EXPECT_EQ(chunks[0].token_count, 100u);
  EXPECT_EQ(chunks[0].text, doc.raw_text);
}

TEST(Chunking, EmptyDocumentHasNoChunks) { EXPECT_TRUE(retrieval::chunk_text(doc_of(""), 10, 2).empty()); }

TEST(Chunking, SizeBoundAndCoverageOn2500Tokens) {
  std::mt19937_64 rng(11);
  std::string text;
  while (corpus::count_tokens(text) < 2500) text += (text.empty() ? "" : " ") + testkit::filler_sentence(rng);
  const auto doc = doc_of(text);
  const auto chunks = retrieval::chunk_text(doc, 1000, 200);
  EXPECT_GE(chunks.size(), 3u);
  for (const auto& c : chunks) {
    EXPECT_LE(c.token_count, 1000u);
    EXPECT_EQ(c.token_count, corpus::count_tokens(c.text));
    EXPECT_LE(c.first_sentence, c.last_sentence);
  }
  EXPECT_TRUE(testkit::chunks_cover_all_tokens(doc, chunks));
}

TEST(Chunking, OverlapIsBounded) {
  std::mt19937_64 rng(12);
  const auto doc = doc_of(testkit::random_text(rng, 200));
  const auto chunks = retrieval::chunk_text(doc, 100, 20);
  const auto tokens = corpus::tokenize(doc.raw_text);
  std::size_t from = 0;
  std::size_t prev_end = 0;
  for (const auto& c : chunks) {
    const auto at = doc.raw_text.find(c.text, from);
    ASSERT_NE(at, std::string::npos);
    if (&c != &chunks.front()) {
      const auto shared = std::count_if(tokens.begin(), tokens.end(),
                                        [&](const auto& t) { return t.begin >= at && t.end <= prev_end; });
      EXPECT_LE(static_cast<std::size_t>(shared), 20u);
    }
    prev_end = at + c.text.size();
    from = at;
  }
}

TEST(Chunking, ParagraphsPreferredOverSentences) {
  const auto doc = doc_of("Alpha beta gamma.\n\nDelta epsilon zeta. Eta theta iota.");
  const auto chunks = retrieval::chunk_text(doc, 9, 0);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].text, "Alpha beta gamma.");
  EXPECT_EQ(chunks[1].text, "Delta epsilon zeta. Eta theta iota.");
  EXPECT_EQ(chunks[1].first_sentence, 2u);
  EXPECT_EQ(chunks[1].last_sentence, 3u);
}

TEST(Chunking, OversizedWordsSplitIntoTokens) {
  const auto doc = doc_of(words(30));
  for (const auto& c : retrieval::chunk_text(doc, 4, 1)) EXPECT_LE(c.token_count, 4u);
}

TEST(Index, HandCosineExample) {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0, 0, 1, 0.6, 0.8;
  const auto index = mock_index(rows);
  const auto r = index.search(Eigen::Vector2d(1, 0), 2);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(r.ranked[0].chunk->chunk_id, 1u);
  EXPECT_DOUBLE_EQ(r.ranked[0].score, 1.0);
  EXPECT_EQ(r.ranked[1].chunk->chunk_id, 3u);
  EXPECT_DOUBLE_EQ(r.ranked[1].score, 0.6);
}

TEST(Index, SingleChunkAndLargeK) {
  Eigen::MatrixXd one(1, 2);
  one << 0.3, 0.4;
  EXPECT_EQ(ids(mock_index(one).search(Eigen::Vector2d(-1, 5), 3)), std::vector<std::size_t>{1});

  Eigen::MatrixXd rows(3, 2);
  rows << 0, 1, 1, 0, 1, 1;
  EXPECT_EQ(ids(mock_index(rows).search(Eigen::Vector2d(1, 0), 50)), (std::vector<std::size_t>{2, 3, 1}));
}

TEST(Index, TiesBreakByChunkId) {
  Eigen::MatrixXd rows(4, 2);
  rows << 1, 1, 2, 0, 2, 2, 1, 0;
  EXPECT_EQ(ids(mock_index(rows).search(Eigen::Vector2d(1, 0), 4)), (std::vector<std::size_t>{2, 4, 1, 3}));
}

TEST(Index, DimensionMismatch) {
  Eigen::MatrixXd rows(1, 2);
  rows << 1, 0;
  EXPECT_THROW(mock_index(rows).search(Eigen::Vector3d(1, 0, 0), 1), Error);
  EXPECT_THROW(VectorIndex("p", "m", plain_chunks(2), rows), Error);
}

TEST(Index, MatchesSortAllOracleAndTruncatesMonotonically) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng() % 30;
    const auto dim = 2 + rng() % 63;
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = g(rng);
    if (n > 2) rows.row(1) = rows.row(0);  // exact tie
    Eigen::VectorXd q(static_cast<Eigen::Index>(dim));
    for (auto& x : q) x = g(rng);
    const auto index = mock_index(rows);
    std::vector<std::size_t> previous;
    for (std::size_t k = 1; k <= 20; ++k) {
      const auto got = index.search(q, k);
      const auto want = testkit::sort_all_oracle(rows, q, k);
      ASSERT_EQ(got.ranked.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got.ranked[i].chunk->chunk_id, want[i].first + 1);
        EXPECT_NEAR(got.ranked[i].score, want[i].second, 1e-12);
      }
      const auto now = ids(got);
      EXPECT_TRUE(std::equal(previous.begin(), previous.end(), now.begin()));
      previous = now;
    }
  }
}

TEST(Index, BuildEmbedsEveryChunkOnce) {
  auto gateway = testkit::live_gateway();
  std::mt19937_64 rng(3);
  const auto doc = doc_of(testkit::random_text(rng, 40));
  retrieval::RagConfig config;
  config.chunk_size = 50;
  const auto index = retrieval::build_index(doc, config, *gateway);
  EXPECT_EQ(index.size(), retrieval::chunk_text(doc, 50, 10).size());
  EXPECT_EQ(gateway->stats().embed_calls, index.size());
  EXPECT_EQ(static_cast<std::size_t>(index.vectors().rows()), index.size());
  EXPECT_EQ(index.dimension(), 64);
  EXPECT_EQ(index.paper_id(), "p1");
  EXPECT_EQ(index.model(), "bge-m3");
}

TEST(Index, EmptyDocumentGivesEmptyIndexAndResult) {
  auto gateway = testkit::live_gateway();
  const auto index = retrieval::build_index(doc_of(""), {}, *gateway);
  EXPECT_TRUE(index.empty());
  EXPECT_TRUE(retrieval::retrieve(index, "q", 3, *gateway).ranked.empty());
  EXPECT_EQ(gateway->stats().embed_calls, 0u);
  EXPECT_THROW(retrieval::retrieve(index, "q", 0, *gateway), Error);
}

TEST(Index, PapersGetSeparateIndexes) {
  auto gateway = testkit::live_gateway();
  const auto a = retrieval::build_index(doc_of("The band gap of ZnO is 3.4 eV.", "a"), {}, *gateway);
  const auto b = retrieval::build_index(doc_of("GaN films were grown. They are clear.", "b"), {}, *gateway);
  EXPECT_EQ(a.paper_id(), "a");
  EXPECT_EQ(b.paper_id(), "b");
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(b.chunks()[0].text, "GaN films were grown. They are clear.");
}

TEST(Retrieve, ThroughGateway) {
  const auto doc = doc_of("Alpha one.\n\nBeta two.\n\nGamma three.");
  auto gateway = table_gateway({{"Alpha one.", Eigen::Vector2d(1, 0)},
                                {"Beta two.", Eigen::Vector2d(0, 1)},
                                {"Gamma three.", Eigen::Vector2d(0.6, 0.8)},
                                {"query", Eigen::Vector2d(1, 0)}});
  retrieval::RagConfig config;
  config.chunk_size = 3;
  config.chunk_overlap_override = 0;
  const auto index = retrieval::build_index(doc, config, *gateway);
  ASSERT_EQ(index.size(), 3u);
  const auto r = retrieval::retrieve(index, "query", 2, *gateway);
  EXPECT_EQ(ids(r), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(r.query, "query");
  EXPECT_EQ(ids(retrieval::retrieve(index, "query", 2, *gateway)), ids(r));
}

TEST(TraceRank, Examples) {
  Eigen::MatrixXd one(1, 2);
  one << 1, 0;
  const auto single = mock_index(one, {{1, "The ZnO band gap (3.4 eV) is wide.", 9, 1, 1}});
  EXPECT_EQ(retrieval::trace_target_rank(single, Eigen::Vector2d(0, 1), "ZnO band gap (3.4 eV)"), 1u);
  EXPECT_EQ(retrieval::trace_target_rank(single, Eigen::Vector2d(0, 1), "GaN"), std::nullopt);

  Eigen::MatrixXd rows(3, 2);
  rows << 0, 1, 0.8, 0.6, 1, 0;
  const auto index = mock_index(rows, {{1, "Unrelated text about samples.", 4, 1, 1},
                                       {2, "The ZnO band gap (3.4 eV) is wide.", 9, 2, 2},
                                       {3, "Irrelevant text scoring higher.", 4, 3, 3}});
  EXPECT_EQ(retrieval::trace_target_rank(index, Eigen::Vector2d(1, 0), "ZnO band gap (3.4 eV)"), 2u);
}

TEST(Dump, OneJsonLinePerChunk) {
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0.6, 0.8;
  std::ostringstream out;
  retrieval::dump_index(mock_index(rows), out);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1]["chunk_id"], 2);
  EXPECT_EQ(lines[1]["dimension"], 2);
  EXPECT_EQ(lines[1]["vector"][1], 0.8);
}
