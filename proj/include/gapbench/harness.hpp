#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gapbench/corpus.hpp"
#include "gapbench/eval.hpp"
#include "gapbench/extract.hpp"
#include "gapbench/llm.hpp"
#include "gapbench/quant.hpp"

namespace gapbench::harness {

using Json = nlohmann::ordered_json;

struct RunConfig {
  extract::ExtractorSpec spec;
  std::uint64_t seed = 0;
  std::size_t workers = 4;
  /// Distinguishes repeated runs of an otherwise identical configuration.
  std::size_t repeat = 0;
};

/// Everything needed to re-execute a run in replay mode.
Json config_snapshot(const RunConfig& config, const std::vector<std::string>& paper_ids);
/// Inverse of config_snapshot. Prompts come from `prompts` and must match
/// the recorded digest.
RunConfig config_from_snapshot(const Json& snapshot,
                               const extract::PromptSet& prompts = extract::PromptSet::defaults());

struct PaperRun {
  std::string paper_id;
  std::vector<quant::PropertyRecord> records;
  std::vector<quant::DropLog> drops;
  std::vector<extract::ExtractionLog> logs;
  std::optional<std::string> error;
};

struct RunArtifact {
  std::string run_id;
  Json snapshot;
  std::vector<PaperRun> papers;
  double wall_seconds = 0.0;  // kept out of the artifact JSON

  [[nodiscard]] std::vector<std::string> paper_ids() const;
};

/// Deterministic: no timing, papers in corpus order.
Json to_json(const RunArtifact& artifact);
RunArtifact artifact_from_json(const Json& j);
/// Writes `path` plus `<path>.timing.json`.
void write_artifact(const RunArtifact& artifact, const std::filesystem::path& path);
RunArtifact read_artifact(const std::filesystem::path& path);

/// Applies the extractor to every paper on a bounded worker pool and cleans
/// the output. Per-paper failures are recorded, never thrown. `gateway` may
/// be null for the rule-based family.
RunArtifact run_extraction(const std::vector<corpus::PaperDoc>& docs, const RunConfig& config,
                           llm::Gateway* gateway);

struct SummaryRow {
  std::string tool;
  std::size_t extracted = 0;  // TP+FP
  std::size_t tp = 0;
  eval::Metrics metrics;
  double wall_seconds = 0.0;
};

SummaryRow summary_row(std::string tool, const eval::ConfusionCounts& counts, double wall_seconds = 0.0);

struct EvaluationReport {
  std::string run_id;
  std::string tool;
  eval::MetricsReport metrics;
  SummaryRow row;
};

/// Throws Error{Consistency} when the artifact and corpus disagree on
/// paper ids and Error{Validation} when gold names unknown papers.
EvaluationReport run_evaluation(const RunArtifact& artifact, const std::vector<corpus::PaperDoc>& docs,
                                const eval::GoldSet& gold, std::size_t subsets = 4,
                                const eval::ErrorOverrides* overrides = nullptr);

inline constexpr std::string_view kReportSchema = "gapbench.report/1";
Json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const Json& j);

struct SweepGrid {
  std::vector<double> temperatures{0.0};
  std::vector<std::size_t> chunk_sizes{1000};
  std::vector<std::size_t> top_ks{10};

  void validate() const;
};

struct SweepRow {
  double temperature = 0.0;
  std::size_t chunk_size = 0;
  std::size_t chunk_overlap = 0;
  std::size_t top_k = 0;
  std::string run_id;
  std::optional<EvaluationReport> report;
  std::optional<std::string> error;
};

/// Grid points in fixed order: temperature, then chunk size, then top-k.
/// Repeated points get distinct run ids.
std::vector<SweepRow> sweep_hyperparams(const std::vector<corpus::PaperDoc>& docs, const SweepGrid& grid,
                                        const RunConfig& base, llm::Gateway& gateway, const eval::GoldSet& gold,
                                        std::size_t subsets = 4, std::vector<RunArtifact>* artifacts = nullptr);
Json to_json(const std::vector<SweepRow>& rows);

struct ContextSweepSpec {
  std::string paper_id;
  std::size_t center = 1;  // 1-based sentence index
  std::size_t initial = 10;
  std::size_t step = 5;
};

struct Window {
  std::size_t first = 1;  // 1-based, inclusive
  std::size_t last = 1;

  [[nodiscard]] std::size_t size() const { return last - first + 1; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// W0 holds `initial` sentences around the center (half before, the rest
/// after, shifted inward at the edges); each next window adds `step`
/// sentences per side, clamped. Ends with the first whole-document window.
std::vector<Window> context_windows(std::size_t sentence_count, const ContextSweepSpec& spec);

struct WindowTrace {
  Window window;
  std::size_t chunks = 0;
  std::optional<std::size_t> target_rank;
  bool target_extracted = false;
  std::size_t records = 0;
};

/// Runs chunking, retrieval tracing and full RAG extraction per window.
/// `target` is the gold record expected from the center sentence.
std::vector<WindowTrace> context_sweep(const corpus::PaperDoc& doc, const ContextSweepSpec& spec,
                                       const extract::RagBinding& binding, llm::Gateway& gateway,
                                       const std::optional<eval::GoldRecord>& target = std::nullopt);
Json to_json(const std::vector<WindowTrace>& trace);

struct MetricDelta {
  std::string metric;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> delta;  // a - b
  std::optional<double> bar_a;
  std::optional<double> bar_b;
  std::optional<bool> exceeds_noise;  // |delta| > bar_a + bar_b
};

/// Every metric and breakdown cell. Throws Error{SchemaMismatch} when the
/// reports differ in schema or cell set.
std::vector<MetricDelta> compare_runs(const Json& a, const Json& b);
std::vector<MetricDelta> compare_runs(const EvaluationReport& a, const EvaluationReport& b);
Json to_json(const std::vector<MetricDelta>& deltas);

enum class ReportFormat { Tsv, Json };
ReportFormat parse_report_format(std::string_view text);

/// Summary TSV, or JSON with plot-ready series.
std::string render_report(const std::vector<EvaluationReport>& reports, ReportFormat format);
void emit_report(const std::vector<EvaluationReport>& reports, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace gapbench::harness
