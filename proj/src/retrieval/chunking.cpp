#include <algorithm>
#include <deque>

#include "gapbench/error.hpp"
#include "gapbench/retrieval.hpp"

namespace gapbench::retrieval {

void RagConfig::validate() const {
  if (chunk_size < 1) throw Error(ErrorCode::Config, "chunk_size must be >= 1");
  if (chunk_overlap() >= chunk_size) {
    throw Error(ErrorCode::Config, "chunk_overlap (" + std::to_string(chunk_overlap()) +
                                       ") must be smaller than chunk_size (" + std::to_string(chunk_size) + ")");
  }
  if (top_k < 1) throw Error(ErrorCode::Config, "top_k must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::Config, "temperature must be >= 0");
}

namespace {

// Half-open range of token indices.
struct Piece {
  std::size_t first = 0;
  std::size_t last = 0;
  [[nodiscard]] std::size_t size() const { return last - first; }
};

enum class Level { Paragraph, Sentence, Word, Token };

class Splitter {
 public:
  Splitter(const corpus::PaperDoc& doc, std::size_t chunk_size)
      : tokens_(corpus::tokenize(doc.raw_text)), chunk_size_(chunk_size) {
    sentence_of_.reserve(tokens_.size());
    std::size_t s = 0;
    for (const auto& t : tokens_) {
      while (s + 1 < doc.sentences.size() && t.begin >= doc.sentences[s].end) ++s;
      sentence_of_.push_back(s);
    }
    paragraph_of_.reserve(tokens_.size());
    for (const auto idx : sentence_of_) {
      paragraph_of_.push_back(doc.sentences.empty() ? 0 : doc.sentences[idx].paragraph);
    }
  }

  std::vector<Piece> pieces() {
    std::vector<Piece> out;
    split({0, tokens_.size()}, Level::Paragraph, out);
    return out;
  }

  [[nodiscard]] const std::vector<corpus::TokenSpan>& tokens() const { return tokens_; }
  [[nodiscard]] std::size_t sentence_of(std::size_t token) const { return sentence_of_[token]; }

 private:
  // Boundary between token i-1 and token i at the given level.
  [[nodiscard]] bool boundary(std::size_t i, Level level) const {
    switch (level) {
      case Level::Paragraph: return paragraph_of_[i] != paragraph_of_[i - 1];
      case Level::Sentence: return sentence_of_[i] != sentence_of_[i - 1];
      case Level::Word: return tokens_[i].begin != tokens_[i - 1].end;
      case Level::Token: return true;
    }
    return true;
  }

  void split(Piece range, Level level, std::vector<Piece>& out) {
    if (range.size() == 0) return;
    if (level != Level::Paragraph && range.size() <= chunk_size_) {
      out.push_back(range);
      return;
    }
    const auto next = static_cast<Level>(static_cast<int>(level) + 1);
    std::size_t start = range.first;
    for (std::size_t i = range.first + 1; i <= range.last; ++i) {
      if (i == range.last || boundary(i, level)) {
        const Piece part{start, i};
        if (part.size() <= chunk_size_ || level == Level::Token) {
          out.push_back(part);
        } else {
          split(part, next, out);
        }
        start = i;
      }
    }
  }

  std::vector<corpus::TokenSpan> tokens_;
  std::vector<std::size_t> sentence_of_;
  std::vector<std::size_t> paragraph_of_;
  std::size_t chunk_size_;
};

}  // namespace

std::vector<Chunk> chunk_text(const corpus::PaperDoc& doc, std::size_t chunk_size, std::size_t chunk_overlap) {
  if (chunk_size < 1) throw Error(ErrorCode::Config, "chunk_size must be >= 1");
  if (chunk_overlap >= chunk_size) throw Error(ErrorCode::Config, "chunk_overlap must be smaller than chunk_size");

  Splitter splitter(doc, chunk_size);
  const auto pieces = splitter.pieces();
  const auto& tokens = splitter.tokens();

  std::vector<Chunk> chunks;
  auto emit = [&](const std::deque<Piece>& window) {
    const auto first = window.front().first;
    const auto last = window.back().last;
    Chunk c;
    c.chunk_id = chunks.size() + 1;
    c.text = doc.raw_text.substr(tokens[first].begin, tokens[last - 1].end - tokens[first].begin);
    c.token_count = last - first;
    c.first_sentence = doc.sentences.empty() ? 0 : doc.sentences[splitter.sentence_of(first)].index;
    c.last_sentence = doc.sentences.empty() ? 0 : doc.sentences[splitter.sentence_of(last - 1)].index;
    chunks.push_back(std::move(c));
  };

  std::deque<Piece> window;
  std::size_t total = 0;
  for (const auto& piece : pieces) {
    if (!window.empty() && total + piece.size() > chunk_size) {
      emit(window);
      while (!window.empty() && (total > chunk_overlap || total + piece.size() > chunk_size)) {
        total -= window.front().size();
        window.pop_front();
      }
    }
    window.push_back(piece);
    total += piece.size();
  }
  if (!window.empty()) emit(window);
  return chunks;
}

}  // namespace gapbench::retrieval
