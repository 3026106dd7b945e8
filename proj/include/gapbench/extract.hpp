#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gapbench/corpus.hpp"
#include "gapbench/llm.hpp"
#include "gapbench/quant.hpp"
#include "gapbench/retrieval.hpp"

namespace gapbench::extract {

enum class Family { RuleBased, PromptChain, Rag };
std::string_view to_string(Family family);
Family parse_family(std::string_view text);

/// Prompt texts with {SENTENCE}, {CONTEXT} and {TRIPLETS} placeholders.
struct PromptSet {
  std::string version;
  std::string relevance;
  std::string extraction;
  std::string followup;
  std::string rag;

  /// The versioned set compiled into the binary.
  static PromptSet defaults();
  /// Reads relevance.txt, extraction.txt, followup.txt, rag.txt and an
  /// optional VERSION file from `dir`.
  static PromptSet load(const std::filesystem::path& dir);

  void validate() const;
  /// SHA-256 over all prompt texts; recorded in run snapshots.
  [[nodiscard]] std::string digest() const;
};

std::string fill(std::string_view templ, std::string_view placeholder, std::string_view value);

struct RuleBasedBinding {};

struct PromptChainBinding {
  std::string inference_model = "qwen2.5:14b";
  double temperature = 0.0;
  int max_output_tokens = 1024;
  PromptSet prompts = PromptSet::defaults();
};

struct RagBinding {
  retrieval::RagConfig rag;
  PromptSet prompts = PromptSet::defaults();
};

/// The binding alternative fixes the family, so family-specific settings
/// exist exactly when that family is selected.
struct ExtractorSpec {
  std::variant<RuleBasedBinding, PromptChainBinding, RagBinding> binding;

  [[nodiscard]] Family family() const { return static_cast<Family>(binding.index()); }
};

struct ExtractionLog {
  std::string paper_id;
  std::string reason;
  std::string detail;

  friend bool operator==(const ExtractionLog&, const ExtractionLog&) = default;
};

struct ExtractionOutput {
  std::vector<quant::RawExtraction> records;
  std::vector<ExtractionLog> logs;
};

struct Triplet {
  std::string material;
  std::string value;
  std::string unit;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct ParsedReply {
  std::vector<Triplet> triplets;
  bool explicit_none = false;         // "No band gap data found." and similar
  std::vector<std::string> skipped;   // malformed candidate lines
};

/// Accepts "material | value | unit" lines (markdown table rows included)
/// and falls back to bracketed triples such as [ZnO, 3.4, eV].
ParsedReply parse_structured_reply(std::string_view text);

/// Renders triplets back into the line format used in prompts.
std::string format_triplets(const std::vector<Triplet>& triplets);

ExtractionOutput extract_rule_based(const corpus::PaperDoc& doc);

ExtractionOutput extract_prompt_chain(const corpus::PaperDoc& doc, const PromptChainBinding& binding,
                                      llm::Gateway& gateway);

ExtractionOutput extract_rag(const corpus::PaperDoc& doc, const RagBinding& binding, llm::Gateway& gateway);
/// Same, over an index already built for `doc`.
ExtractionOutput extract_rag(const corpus::PaperDoc& doc, const retrieval::VectorIndex& index,
                             const RagBinding& binding, llm::Gateway& gateway);

/// Dispatches on the binding. `gateway` may be null for RuleBased.
ExtractionOutput run_extractor(const ExtractorSpec& spec, const corpus::PaperDoc& doc, llm::Gateway* gateway);

/// Material mentions recognised by the rule-based extractor: element-symbol
/// formulas with optional phase prefixes ("H-", "2H-", "α-").
struct MaterialMention {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
};
std::vector<MaterialMention> find_materials(std::string_view sentence);

}  // namespace gapbench::extract
