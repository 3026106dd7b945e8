#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "gapbench/error.hpp"
#include "gapbench/extract.hpp"

namespace gapbench::extract {

namespace {

bool affirmative(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) ++i;
  if (reply.size() - i < 3) return false;
  return std::tolower(static_cast<unsigned char>(reply[i])) == 'y' &&
         std::tolower(static_cast<unsigned char>(reply[i + 1])) == 'e' &&
         std::tolower(static_cast<unsigned char>(reply[i + 2])) == 's';
}

void emit(ExtractionOutput& out, const std::string& paper_id, const std::vector<Triplet>& triplets,
          const std::string& source) {
  for (const auto& t : triplets) out.records.push_back({paper_id, t.material, t.value, t.unit, source});
}

std::string number_in(std::string_view value) {
  const auto b = value.find_first_of("0123456789");
  if (b == std::string_view::npos) return {};
  auto e = b;
  while (e < value.size() && (std::isdigit(static_cast<unsigned char>(value[e])) || value[e] == '.')) ++e;
  return std::string(value.substr(b, e - b));
}

}  // namespace

ExtractionOutput extract_prompt_chain(const corpus::PaperDoc& doc, const PromptChainBinding& binding,
                                      llm::Gateway& gateway) {
  binding.prompts.validate();
  ExtractionOutput out;
  auto ask = [&](std::vector<llm::ChatMessage>& conversation, std::string prompt) {
    conversation.push_back({"user", std::move(prompt)});
    auto reply = gateway.chat({binding.inference_model, conversation, binding.temperature, binding.max_output_tokens});
    conversation.push_back({"assistant", reply});
    return reply;
  };

  for (const auto& sentence : doc.sentences) {
    std::vector<llm::ChatMessage> conversation;
    const auto relevance = ask(conversation, fill(binding.prompts.relevance, "{SENTENCE}", sentence.text));
    if (!affirmative(relevance)) continue;

    const auto first = parse_structured_reply(ask(conversation, fill(binding.prompts.extraction, "{SENTENCE}", sentence.text)));
    if (first.triplets.empty()) {
      if (!first.explicit_none) {
        out.logs.push_back({doc.paper_id, "unparsable-reply", "sentence " + std::to_string(sentence.index)});
      }
      continue;
    }

    auto followup = fill(binding.prompts.followup, "{TRIPLETS}", format_triplets(first.triplets));
    followup = fill(followup, "{SENTENCE}", sentence.text);
    const auto second = parse_structured_reply(ask(conversation, std::move(followup)));
    if (second.triplets.empty() && !second.explicit_none) {
      out.logs.push_back({doc.paper_id, "unparsable-reply", "follow-up for sentence " + std::to_string(sentence.index)});
      continue;
    }
    emit(out, doc.paper_id, second.triplets, sentence.text);
  }
  return out;
}

ExtractionOutput extract_rag(const corpus::PaperDoc& doc, const RagBinding& binding, llm::Gateway& gateway) {
  binding.rag.validate();
  // The index lives only for this paper.
  return extract_rag(doc, retrieval::build_index(doc, binding.rag, gateway), binding, gateway);
}

ExtractionOutput extract_rag(const corpus::PaperDoc& doc, const retrieval::VectorIndex& index,
                             const RagBinding& binding, llm::Gateway& gateway) {
  binding.rag.validate();
  binding.prompts.validate();
  ExtractionOutput out;
  if (index.empty()) return out;
  const auto result = retrieval::retrieve(index, binding.rag.retrieval_query, binding.rag.top_k, gateway);

  std::vector<const retrieval::Chunk*> selected;
  for (const auto& hit : result.ranked) selected.push_back(hit.chunk);
  std::sort(selected.begin(), selected.end(),
            [](const retrieval::Chunk* a, const retrieval::Chunk* b) { return a->chunk_id < b->chunk_id; });
  std::string context;
  for (const auto* c : selected) {
    if (!context.empty()) context += "\n\n";
    context += c->text;
  }

  const auto reply = gateway.chat({binding.rag.inference_model,
                                   {{"user", fill(binding.prompts.rag, "{CONTEXT}", context)}},
                                   binding.rag.temperature,
                                   binding.rag.max_output_tokens});
  const auto parsed = parse_structured_reply(reply);
  if (parsed.triplets.empty() && !parsed.explicit_none) {
    out.logs.push_back({doc.paper_id, "unparsable-reply", reply});
    return out;
  }

  for (const auto& t : parsed.triplets) {
    // Source: first retrieved sentence mentioning the value's number.
    std::string source;
    const auto number = number_in(t.value);
    for (const auto* c : selected) {
      for (auto s = c->first_sentence; s <= c->last_sentence && source.empty() && s >= 1; ++s) {
        const auto& text = doc.sentences[s - 1].text;
        if (!number.empty() && text.find(number) != std::string::npos) source = text;
      }
      if (!source.empty()) break;
    }
    out.records.push_back({doc.paper_id, t.material, t.value, t.unit, source});
  }
  return out;
}

ExtractionOutput run_extractor(const ExtractorSpec& spec, const corpus::PaperDoc& doc, llm::Gateway* gateway) {
  return std::visit(
      [&](const auto& binding) -> ExtractionOutput {
        using T = std::decay_t<decltype(binding)>;
        if constexpr (std::is_same_v<T, RuleBasedBinding>) {
          return extract_rule_based(doc);
        } else {
          if (!gateway) throw Error(ErrorCode::Config, "this extractor needs a model gateway");
          if constexpr (std::is_same_v<T, PromptChainBinding>) {
            return extract_prompt_chain(doc, binding, *gateway);
          } else {
            return extract_rag(doc, binding, *gateway);
          }
        }
      },
      spec.binding);
}

}  // namespace gapbench::extract
