#include <fstream>
#include <sstream>

#include "gapbench/error.hpp"
#include "gapbench/extract.hpp"
#include "resources.hpp"

namespace gapbench::extract {

namespace fs = std::filesystem;

namespace {

std::string read_prompt(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Load, "cannot read prompt file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::RuleBased: return "rule";
    case Family::PromptChain: return "chain";
    case Family::Rag: return "rag";
  }
  return "rule";
}

Family parse_family(std::string_view text) {
  if (text == "rule") return Family::RuleBased;
  if (text == "chain") return Family::PromptChain;
  if (text == "rag") return Family::Rag;
  throw Error(ErrorCode::Config, "unknown extractor family: " + std::string(text));
}

PromptSet PromptSet::defaults() {
  return {trimmed(std::string(resources::kPromptVersion)), trimmed(std::string(resources::kRelevancePrompt)),
          trimmed(std::string(resources::kExtractionPrompt)), trimmed(std::string(resources::kFollowupPrompt)),
          trimmed(std::string(resources::kRagPrompt))};
}

PromptSet PromptSet::load(const fs::path& dir) {
  PromptSet p;
  p.version = fs::exists(dir / "VERSION") ? trimmed(read_prompt(dir / "VERSION")) : dir.filename().string();
  p.relevance = trimmed(read_prompt(dir / "relevance.txt"));
  p.extraction = trimmed(read_prompt(dir / "extraction.txt"));
  p.followup = trimmed(read_prompt(dir / "followup.txt"));
  p.rag = trimmed(read_prompt(dir / "rag.txt"));
  p.validate();
  return p;
}

void PromptSet::validate() const {
  auto need = [](const std::string& text, std::string_view name, std::string_view placeholder) {
    if (text.empty()) throw Error(ErrorCode::Config, std::string(name) + " prompt is empty");
    if (text.find(placeholder) == std::string::npos) {
      throw Error(ErrorCode::Config, std::string(name) + " prompt lacks " + std::string(placeholder));
    }
  };
  need(relevance, "relevance", "{SENTENCE}");
  need(extraction, "extraction", "{SENTENCE}");
  need(followup, "followup", "{TRIPLETS}");
  need(rag, "rag", "{CONTEXT}");
}

std::string PromptSet::digest() const {
  return llm::sha256_hex(version + '\0' + relevance + '\0' + extraction + '\0' + followup + '\0' + rag);
}

std::string fill(std::string_view templ, std::string_view placeholder, std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = templ.find(placeholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(templ.substr(pos, hit - pos));
    out.append(value);
    pos = hit + placeholder.size();
  }
  out.append(templ.substr(pos));
  return out;
}

}  // namespace gapbench::extract
