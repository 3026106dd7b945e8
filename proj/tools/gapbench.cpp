#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gapbench/corpus.hpp"
#include "gapbench/error.hpp"
#include "gapbench/eval.hpp"
#include "gapbench/extract.hpp"
#include "gapbench/harness.hpp"
#include "gapbench/llm.hpp"

using namespace gapbench;
using harness::Json;

namespace {

struct Options {
  std::string corpus;
  std::string gold;
  std::string extractor = "rule";
  std::string endpoint = "http://localhost:11434/v1";
  std::optional<std::string> inference_model;
  std::string embedding_model = "bge-m3";
  std::size_t chunk_size = 1000;
  std::size_t top_k = 10;
  double temperature = 0.0;
  std::size_t subsets = 4;
  std::string fixtures;
  std::string mode = "replay";
  std::string out;
  std::uint64_t seed = 0;
  std::string prompts;
  std::size_t workers = 4;
  bool verbose = false;

  // eval
  std::string artifact;
  std::string overrides;
  // sweep
  std::vector<double> temperatures;
  std::vector<std::size_t> chunk_sizes;
  std::vector<std::size_t> top_ks;
  // context-sweep
  std::string paper;
  std::size_t center = 0;
  std::size_t initial = 10;
  std::size_t step = 5;
  // compare / report
  std::vector<std::string> reports;
  std::string format = "tsv";
};

void print_error(std::string_view code, std::string_view message) {
  std::cerr << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

std::vector<corpus::PaperDoc> load_docs(const Options& o) {
  if (o.corpus.empty()) throw Error(ErrorCode::Config, "--corpus is required");
  return corpus::load_corpus(corpus::read_manifest(o.corpus));
}

eval::GoldSet load_gold(const Options& o) {
  if (!o.gold.empty()) return eval::GoldSet::load(o.gold);
  if (!o.corpus.empty()) {
    const auto manifest = corpus::read_manifest(o.corpus);
    if (manifest.gold_path) return eval::GoldSet::load(*manifest.gold_path);
  }
  throw Error(ErrorCode::Config, "--gold is required (or a gold: line in the manifest)");
}

extract::PromptSet load_prompts(const Options& o) {
  return o.prompts.empty() ? extract::PromptSet::defaults() : extract::PromptSet::load(o.prompts);
}

extract::RagBinding rag_binding(const Options& o) {
  extract::RagBinding b;
  b.rag.chunk_size = o.chunk_size;
  b.rag.top_k = o.top_k;
  b.rag.temperature = o.temperature;
  b.rag.embedding_model = o.embedding_model;
  if (o.inference_model) b.rag.inference_model = *o.inference_model;
  b.prompts = load_prompts(o);
  b.rag.validate();
  return b;
}

harness::RunConfig run_config(const Options& o) {
  harness::RunConfig c;
  c.seed = o.seed;
  c.workers = o.workers;
  switch (extract::parse_family(o.extractor)) {
    case extract::Family::RuleBased: c.spec.binding = extract::RuleBasedBinding{}; break;
    case extract::Family::PromptChain: {
      extract::PromptChainBinding b;
      if (o.inference_model) b.inference_model = *o.inference_model;
      b.temperature = o.temperature;
      b.prompts = load_prompts(o);
      c.spec.binding = b;
      break;
    }
    case extract::Family::Rag: c.spec.binding = rag_binding(o); break;
  }
  return c;
}

std::unique_ptr<llm::Gateway> make_gateway(const Options& o) {
  llm::GatewayConfig g;
  g.mode = llm::parse_mode(o.mode);
  g.endpoint = o.endpoint;
  if (!o.fixtures.empty()) g.fixtures_dir = o.fixtures;
  return std::make_unique<llm::Gateway>(g);
}

void write_out(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + o.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) throw Error(ErrorCode::Io, "failed writing " + o.out);
}

Json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

int cmd_extract(const Options& o) {
  const auto docs = load_docs(o);
  const auto config = run_config(o);
  std::unique_ptr<llm::Gateway> gateway;
  if (config.spec.family() != extract::Family::RuleBased) gateway = make_gateway(o);
  const auto artifact = harness::run_extraction(docs, config, gateway.get());
  if (o.out.empty()) {
    write_out(o, harness::to_json(artifact).dump(2));
  } else {
    harness::write_artifact(artifact, o.out);
  }
  std::size_t records = 0, failed = 0;
  for (const auto& p : artifact.papers) {
    records += p.records.size();
    failed += p.error.has_value();
  }
  spdlog::info("run {}: {} papers, {} records, {} failed, {:.2f} s", artifact.run_id, artifact.papers.size(), records,
               failed, artifact.wall_seconds);
  if (failed) {
    print_error("paper-failures", std::to_string(failed) + " of " + std::to_string(artifact.papers.size()) +
                                      " papers failed; details are in the artifact");
    return 3;
  }
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.artifact.empty()) throw Error(ErrorCode::Config, "--artifact is required");
  const auto docs = load_docs(o);
  const auto gold = load_gold(o);
  const auto artifact = harness::read_artifact(o.artifact);
  std::optional<eval::ErrorOverrides> overrides;
  if (!o.overrides.empty()) overrides = eval::ErrorOverrides::load(o.overrides);
  const auto report = harness::run_evaluation(artifact, docs, gold, o.subsets, overrides ? &*overrides : nullptr);
  write_out(o, harness::to_json(report).dump(2));
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto docs = load_docs(o);
  const auto gold = load_gold(o);
  auto base = run_config(o);
  if (base.spec.family() != extract::Family::Rag) base.spec.binding = rag_binding(o);
  harness::SweepGrid grid;
  grid.temperatures = o.temperatures.empty() ? std::vector<double>{o.temperature} : o.temperatures;
  grid.chunk_sizes = o.chunk_sizes.empty() ? std::vector<std::size_t>{o.chunk_size} : o.chunk_sizes;
  grid.top_ks = o.top_ks.empty() ? std::vector<std::size_t>{o.top_k} : o.top_ks;
  auto gateway = make_gateway(o);
  const auto rows = harness::sweep_hyperparams(docs, grid, base, *gateway, gold, o.subsets);
  write_out(o, harness::to_json(rows).dump(2));
  return 0;
}

int cmd_context_sweep(const Options& o) {
  const auto docs = load_docs(o);
  const auto it = std::find_if(docs.begin(), docs.end(), [&](const auto& d) { return d.paper_id == o.paper; });
  if (it == docs.end()) throw Error(ErrorCode::Config, "paper " + o.paper + " is not in the corpus");
  auto gateway = make_gateway(o);
  const harness::ContextSweepSpec spec{o.paper, o.center, o.initial, o.step};
  const auto trace = harness::context_sweep(*it, spec, rag_binding(o), *gateway);
  write_out(o, harness::to_json(trace).dump(2));
  return 0;
}

int cmd_compare(const Options& o) {
  if (o.reports.size() != 2) throw Error(ErrorCode::Config, "compare needs exactly two report files");
  const auto deltas = harness::compare_runs(read_json(o.reports[0]), read_json(o.reports[1]));
  write_out(o, harness::to_json(deltas).dump(2));
  return 0;
}

int cmd_report(const Options& o) {
  std::vector<harness::EvaluationReport> reports;
  for (const auto& path : o.reports) reports.push_back(harness::report_from_json(read_json(path)));
  const auto format = harness::parse_report_format(o.format);
  if (o.out.empty()) {
    std::cout << harness::render_report(reports, format);
  } else {
    harness::emit_report(reports, format, o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("gapbench");
  spdlog::set_default_logger(logger);

  Options o;
  CLI::App app{"Band gap extraction benchmark"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--corpus", o.corpus, "Corpus manifest");
  app.add_option("--gold", o.gold, "Gold TSV (defaults to the manifest's gold: entry)");
  app.add_option("--extractor", o.extractor, "Extractor family")->check(CLI::IsMember({"rule", "chain", "rag"}));
  app.add_option("--endpoint", o.endpoint, "OpenAI-compatible base URL")->capture_default_str();
  app.add_option("--inference-model", o.inference_model, "Chat model id");
  app.add_option("--embedding-model", o.embedding_model, "Embedding model id")->capture_default_str();
  app.add_option("--chunk-size", o.chunk_size, "Chunk size in tokens")->capture_default_str();
  app.add_option("--top-k", o.top_k, "Chunks retrieved per paper")->capture_default_str();
  app.add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--subsets", o.subsets, "Evaluation subsets for error bars")->capture_default_str();
  app.add_option("--fixtures", o.fixtures, "Record/replay fixture directory");
  app.add_option("--mode", o.mode, "Gateway mode")->check(CLI::IsMember({"live", "record", "replay"}))->capture_default_str();
  app.add_option("--out", o.out, "Output path (stdout when omitted)");
  app.add_option("--seed", o.seed, "Run seed")->capture_default_str();
  app.add_option("--prompts", o.prompts, "Prompt directory overriding the built-in set");
  app.add_option("--workers", o.workers, "Papers processed concurrently")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  auto* extract = app.add_subcommand("extract", "Run an extractor over the corpus and store the artifact");
  auto* eval = app.add_subcommand("eval", "Score a stored artifact against gold");
  eval->add_option("--artifact", o.artifact, "Artifact written by extract")->required();
  eval->add_option("--overrides", o.overrides, "Manual error-class overrides");
  auto* sweep = app.add_subcommand("sweep", "Evaluate the rag extractor over a hyperparameter grid");
  sweep->add_option("--temperatures", o.temperatures, "Temperature axis")->delimiter(',');
  sweep->add_option("--chunk-sizes", o.chunk_sizes, "Chunk size axis")->delimiter(',');
  sweep->add_option("--top-ks", o.top_ks, "Top-k axis")->delimiter(',');
  auto* context = app.add_subcommand("context-sweep", "Expanding-context experiment for one sentence");
  context->add_option("--paper", o.paper, "Paper id")->required();
  context->add_option("--center", o.center, "1-based target sentence index")->required();
  context->add_option("--initial", o.initial, "Initial window in sentences")->capture_default_str();
  context->add_option("--step", o.step, "Sentences added per side per step")->capture_default_str();
  auto* compare = app.add_subcommand("compare", "Per-metric deltas between two reports");
  compare->add_option("reports", o.reports, "Two report JSON files")->required()->expected(2);
  auto* report = app.add_subcommand("report", "Render reports as a table or plot-ready JSON");
  report->add_option("reports", o.reports, "Report JSON files");
  report->add_option("--format", o.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage-error", e.what());
    return 2;
  }
  spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (extract->parsed()) return cmd_extract(o);
    if (eval->parsed()) return cmd_eval(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (context->parsed()) return cmd_context_sweep(o);
    if (compare->parsed()) return cmd_compare(o);
    if (report->parsed()) return cmd_report(o);
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal-error", e.what());
    return 1;
  }
  return 1;
}
