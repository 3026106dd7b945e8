#include <algorithm>
#include <map>
#include <tuple>

#include <spdlog/spdlog.h>

#include "gapbench/error.hpp"
#include "gapbench/harness.hpp"

namespace gapbench::harness {

void SweepGrid::validate() const {
  if (temperatures.empty() || chunk_sizes.empty() || top_ks.empty()) {
    throw Error(ErrorCode::Config, "sweep grid axes must be non-empty");
  }
}

std::vector<SweepRow> sweep_hyperparams(const std::vector<corpus::PaperDoc>& docs, const SweepGrid& grid,
                                        const RunConfig& base, llm::Gateway& gateway, const eval::GoldSet& gold,
                                        std::size_t subsets, std::vector<RunArtifact>* artifacts) {
  grid.validate();
  const auto* base_rag = std::get_if<extract::RagBinding>(&base.spec.binding);
  if (!base_rag) throw Error(ErrorCode::Config, "hyperparameter sweeps need the rag extractor");

  std::vector<SweepRow> rows;
  std::map<std::tuple<double, std::size_t, std::size_t>, std::size_t> seen;
  for (double t : grid.temperatures) {
    for (std::size_t c : grid.chunk_sizes) {
      for (std::size_t k : grid.top_ks) {
        auto binding = *base_rag;
        binding.rag.temperature = t;
        binding.rag.chunk_size = c;
        binding.rag.top_k = k;
        RunConfig config = base;
        config.spec.binding = binding;
        config.repeat = seen[{t, c, k}]++;

        SweepRow row{t, c, binding.rag.chunk_overlap(), k, {}, {}, {}};
        try {
          binding.rag.validate();
          auto artifact = run_extraction(docs, config, &gateway);
          row.run_id = artifact.run_id;
          row.report = run_evaluation(artifact, docs, gold, subsets);
          if (artifacts) artifacts->push_back(std::move(artifact));
        } catch (const std::exception& e) {
          row.error = e.what();
          spdlog::error("sweep point t={} chunk={} k={} failed: {}", t, c, k, e.what());
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

Json to_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["temperature"] = r.temperature;
    j["chunk_size"] = r.chunk_size;
    j["chunk_overlap"] = r.chunk_overlap;
    j["top_k"] = r.top_k;
    j["run_id"] = r.run_id;
    j["f_score"] = r.report && r.report->metrics.metrics.f_score ? Json(*r.report->metrics.metrics.f_score)
                                                                 : Json(nullptr);
    j["report"] = r.report ? to_json(*r.report) : Json(nullptr);
    j["error"] = r.error ? Json(*r.error) : Json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<Window> context_windows(std::size_t n, const ContextSweepSpec& spec) {
  if (spec.center < 1 || spec.center > n) {
    throw Error(ErrorCode::Precondition, "center sentence " + std::to_string(spec.center) + " outside 1.." +
                                             std::to_string(n));
  }
  if (spec.initial < 1 || spec.step < 1) throw Error(ErrorCode::Config, "window size and step must be >= 1");

  // Signed arithmetic so the unclamped window can run past either edge.
  const auto before = static_cast<long>(spec.initial / 2);
  const auto after = static_cast<long>(spec.initial) - before - 1;
  const auto last_index = static_cast<long>(n);
  long first = static_cast<long>(spec.center) - before;
  long last = static_cast<long>(spec.center) + after;
  if (first < 1) {
    last += 1 - first;
    first = 1;
  }
  if (last > last_index) {
    first -= last - last_index;
    last = last_index;
  }
  first = std::max(first, 1L);

  std::vector<Window> out{{static_cast<std::size_t>(first), static_cast<std::size_t>(last)}};
  const auto step = static_cast<long>(spec.step);
  while (first > 1 || last < last_index) {
    first = std::max(1L, first - step);
    last = std::min(last_index, last + step);
    out.push_back({static_cast<std::size_t>(first), static_cast<std::size_t>(last)});
  }
  return out;
}

std::vector<WindowTrace> context_sweep(const corpus::PaperDoc& doc, const ContextSweepSpec& spec,
                                       const extract::RagBinding& binding, llm::Gateway& gateway,
                                       const std::optional<eval::GoldRecord>& target) {
  if (!spec.paper_id.empty() && spec.paper_id != doc.paper_id) {
    throw Error(ErrorCode::Precondition, "context sweep for " + spec.paper_id + " given paper " + doc.paper_id);
  }
  binding.rag.validate();
  const auto windows = context_windows(doc.sentences.size(), spec);
  const auto& target_text = doc.sentences[spec.center - 1].text;
  const auto query = retrieval::embed_query(binding.rag.retrieval_query, binding.rag.embedding_model, gateway);

  std::vector<WindowTrace> out;
  for (const auto& w : windows) {
    const auto begin = doc.sentences[w.first - 1].begin;
    const auto end = doc.sentences[w.last - 1].end;
    const auto sub = corpus::make_doc(doc.paper_id, doc.variant, doc.raw_text.substr(begin, end - begin));
    const auto index = retrieval::build_index(sub, binding.rag, gateway);

    WindowTrace trace;
    trace.window = w;
    trace.chunks = index.size();
    trace.target_rank = retrieval::trace_target_rank(index, query, target_text);
    const auto extraction = extract::extract_rag(sub, index, binding, gateway);
    const auto cleaned = quant::clean_records(extraction.records);
    trace.records = cleaned.records.size();
    trace.target_extracted = std::any_of(cleaned.records.begin(), cleaned.records.end(), [&](const auto& r) {
      return target ? eval::record_matches(r, *target) : r.source == target_text;
    });
    out.push_back(trace);
  }
  return out;
}

Json to_json(const std::vector<WindowTrace>& trace) {
  Json out = Json::array();
  for (const auto& t : trace) {
    out.push_back({{"first", t.window.first},
                   {"last", t.window.last},
                   {"size", t.window.size()},
                   {"chunks", t.chunks},
                   {"target_rank", t.target_rank ? Json(*t.target_rank) : Json(nullptr)},
                   {"target_extracted", t.target_extracted},
                   {"records", t.records}});
  }
  return out;
}

}  // namespace gapbench::harness
