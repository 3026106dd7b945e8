// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "fake_model.hpp"
#include "gapbench/error.hpp"
#include "gapbench/eval.hpp"
#include "gapbench/harness.hpp"
#include "gapbench/quant.hpp"
#include "gapbench/retrieval.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace gapbench;
using eval::ErrorClass;
using quant::Decimal;
using quant::ValueSpec;

namespace {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  [[nodiscard]] bool ok() const { return failed_ == 0; }
  [[nodiscard]] std::string summary() const {
    std::ostringstream s;
    s << checks_ - failed_ << "/" << checks_ << " checks";
    for (const auto& f : failures_) s << "; " << f;
    return s.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<void(Check&)> body;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Tool, TP+FP, TP, P, R, F (percent).
struct Row {
  const char* tool;
  std::size_t extracted, tp;
  double p, r, f;
};
const Row kReference[] = {
    {"CDE", 47, 20, 43, 9, 15},   {"PSIE", 54, 21, 39, 10, 15}, {"CE1", 424, 29, 7, 13, 9},
    {"CE2", 52, 25, 48, 11, 18},  {"CE3", 99, 43, 43, 20, 27},  {"LC11", 174, 9, 5, 4, 5},
    {"LC12", 51, 27, 53, 12, 20}, {"LC13", 64, 25, 39, 11, 18}, {"LC21", 168, 16, 10, 7, 8},
    {"LC22", 75, 34, 45, 15, 23}, {"LC23", 83, 28, 34, 13, 18}, {"Kimi", 153, 41, 27, 19, 22},
};
constexpr std::size_t kGold = 220;

void reference_scores(Check& c) {
  for (const auto& row : kReference) {
    const auto m = eval::compute_metrics({row.tp, row.extracted - row.tp, kGold - row.tp, 0, 163});
    c.expect(std::abs(*m.precision * 100 - row.p) <= 0.5, std::string(row.tool) + " precision");
    c.expect(std::abs(*m.recall * 100 - row.r) <= 0.5, std::string(row.tool) + " recall");
    c.expect(std::abs(*m.f_score * 100 - row.f) <= 0.5, std::string(row.tool) + " f-score");
  }
}

void null_precision(Check& c) {
  const auto ce3 = eval::compute_metrics({43, 56, 177, 158, 163});
  c.expect(std::abs(*ce3.null_precision * 100 - 96.9) <= 0.1, "TN 158 of 163 gives " + num(*ce3.null_precision));
  c.expect(std::lround(*ce3.null_precision * 100) == 97, "rounds to 97");
  const auto cde = eval::compute_metrics({20, 27, 200, 163, 163});
  c.expect(std::abs(*cde.null_precision * 100 - 100.0) <= 0.1, "TN 163 of 163");
}

void value_grammar(Check& c) {
  const auto d = [](const char* s) { return Decimal::parse(s); };
  const std::pair<const char*, ValueSpec> cases[] = {
      {"0.8 eV", ValueSpec::fixed(d("0.8"))},
      {"~ 1.13 eV", ValueSpec::estimated(d("1.13"))},
      {"1.07 \xC2\xB1 0.02 eV", ValueSpec::range(d("1.07"), d("0.02"))},
      {"< 1.07 eV", ValueSpec::bounded(quant::BoundDir::Upper, d("1.07"))},
      {"increased by 0.3 eV", ValueSpec::change(quant::ChangeDir::Increase, d("0.3"))},
      {"100 meV", ValueSpec::fixed(d("0.1"))},
  };
  for (const auto& [text, want] : cases) {
    try {
      c.expect(quant::parse_quantity(text).value == want, text);
    } catch (const std::exception& e) {
      c.expect(false, std::string(text) + ": " + e.what());
    }
  }
  for (const char* text : {"550 nm", "400-700 nm", "1.2 \xC2\xB5m"}) {
    try {
      quant::parse_quantity(text);
      c.expect(false, std::string(text) + " accepted");
    } catch (const Error& e) {
      c.expect(e.code() == ErrorCode::ExcludedQuantity, text);
    }
  }
}

void matching_properties(Check& c) {
  std::mt19937_64 rng(20240601);
  std::size_t unambiguous = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto inst = testkit::random_match_instance(rng, "p" + std::to_string(i));
    const auto r = eval::match_records(inst.extracted, inst.gold, inst.doc.paper_id, inst.doc);
    c.expect(r.tp_pairs.size() + r.fp.size() == inst.extracted.size(), "TP+FP conservation, instance " + std::to_string(i));
    c.expect(r.tp_pairs.size() + r.fn.size() == inst.gold.size(), "TP+FN conservation, instance " + std::to_string(i));
    if (inst.unambiguous) {
      ++unambiguous;
      c.expect(r.tp_pairs.size() == testkit::max_matching(inst.compatible), "brute force, instance " + std::to_string(i));
    }
  }
  c.expect(unambiguous > 500, "enough unambiguous instances");
}

eval::GoldRecord gold(const std::string& material, ValueSpec v) {
  eval::GoldRecord g;
  g.record.paper_id = "p1";
  g.record.material = material;
  g.record.value = v;
  g.record.value_classes = {v.kind};
  g.record.position_classes = {quant::PositionClass::SingleMention};
  return g;
}

quant::PropertyRecord rec(const std::string& material, ValueSpec v) {
  quant::PropertyRecord r;
  r.paper_id = "p1";
  r.material = material;
  r.value = v;
  return r;
}

void error_classes(Check& c) {
  const auto d = [](const char* s) { return Decimal::parse(s); };
  const auto doc = [](const char* text) { return corpus::make_doc("p1", corpus::SourceVariant::Publisher, text); };
  const auto phases = doc(
      "H-MoSe2 is a semiconductor with a direct bandgap of about 1.13 eV while T-MoSe2, ZT-MoSe2 and SO-MoSe2 are zero "
      "bandgap materials.");
  const auto srfbis2 = doc("SrFBiS2 is a semiconductor with a direct bandgap of 0.8 eV.");
  const auto mixed = doc("The band gap of ZnO is 3.4 eV, and Au contacts were annealed at 2.5 eV beam energy.");
  const auto mev = doc("The band gap of In2O3 is 100 meV.");

  struct Fixture {
    const char* name;
    const corpus::PaperDoc* doc;
    std::vector<eval::GoldRecord> gold;
    std::vector<quant::PropertyRecord> extracted;
    std::vector<ErrorClass> want;  // for every false positive
  };
  const std::vector<Fixture> fixtures{
      {"hallucination", &srfbis2, {gold("SrFBiS2", ValueSpec::fixed(d("0.8")))}, {rec("GaAs", ValueSpec::fixed(d("1.42")))},
       {ErrorClass::Hallucination}},
      {"insufficient material", &phases, {gold("H-MoSe2", ValueSpec::estimated(d("1.13")))},
       {rec("MoSe2", ValueSpec::estimated(d("1.13")))}, {ErrorClass::InsufficientMaterial}},
      {"wrong material", &mixed, {gold("ZnO", ValueSpec::fixed(d("3.4")))}, {rec("Au", ValueSpec::fixed(d("3.4")))},
       {ErrorClass::WrongMaterial}},
      {"inaccurate value", &srfbis2, {gold("SrFBiS2", ValueSpec::fixed(d("0.8")))},
       {rec("SrFBiS2", ValueSpec::estimated(d("0.8")))}, {ErrorClass::InaccurateValue}},
      {"wrong value", &mixed, {gold("ZnO", ValueSpec::fixed(d("3.4")))}, {rec("ZnO", ValueSpec::fixed(d("2.5")))},
       {ErrorClass::WrongValue}},
      {"wrong unit", &mev, {gold("In2O3", ValueSpec::fixed(d("0.1")))}, {rec("In2O3", ValueSpec::fixed(d("100")))},
       {ErrorClass::WrongUnit}},
      {"wrong pairing", &phases,
       {gold("H-MoSe2", ValueSpec::estimated(d("1.13"))), gold("T-MoSe2", ValueSpec::fixed(d("0")))},
       {rec("T-MoSe2", ValueSpec::estimated(d("1.13"))), rec("H-MoSe2", ValueSpec::fixed(d("0")))},
       {ErrorClass::WrongPairing}},
  };
  std::set<ErrorClass> seen;
  for (const auto& f : fixtures) {
    const auto r = eval::match_records(f.extracted, f.gold, "p1", *f.doc);
    c.expect(r.fp.size() == f.extracted.size(), std::string(f.name) + ": every record is a false positive");
    for (const auto& fp : r.fp) {
      c.expect(fp.classes == f.want, std::string(f.name) + ": got " + std::string(eval::to_string(fp.classes.at(0))));
      seen.insert(fp.classes.begin(), fp.classes.end());
    }
  }
  c.expect(seen.size() == eval::kErrorClassCount, "all seven classes reproduced");
}

void retrieval_equivalence(Check& c) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 40);
    const auto dim = static_cast<Eigen::Index>(2 + rng() % 63);
    Eigen::MatrixXd rows(n, dim);
    // Coarse integer entries make score ties common.
    const bool coarse = trial % 2 == 0;
    for (Eigen::Index i = 0; i < rows.size(); ++i) {
      rows.data()[i] = coarse ? static_cast<double>(rng() % 3) - 1.0 : g(rng);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (rows.row(i).norm() == 0) rows(i, 0) = 1.0;
    }
    if (n > 3) rows.row(3) = rows.row(1);
    Eigen::VectorXd q(dim);
    for (auto& x : q) x = coarse ? static_cast<double>(rng() % 3) - 1.0 : g(rng);
    if (q.norm() == 0) q(0) = 1.0;

    std::vector<retrieval::Chunk> chunks;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto id = static_cast<std::size_t>(i + 1);
      chunks.push_back({id, "chunk " + std::to_string(id), 2, id, id});
    }
    const retrieval::VectorIndex index("p1", "mock", chunks, rows);
    std::vector<std::size_t> previous;
    for (std::size_t k = 1; k <= 20; ++k) {
      const auto got = index.search(q, k);
      const auto want = testkit::sort_all_oracle(rows, q, k);
      bool same = got.ranked.size() == want.size();
      std::vector<std::size_t> now;
      for (std::size_t i = 0; same && i < want.size(); ++i) {
        same = got.ranked[i].chunk->chunk_id == want[i].first + 1 && std::abs(got.ranked[i].score - want[i].second) < 1e-12;
        now.push_back(got.ranked[i].chunk->chunk_id);
      }
      c.expect(same, "trial " + std::to_string(trial) + " k " + std::to_string(k) + " differs from sort-all");
      c.expect(std::equal(previous.begin(), previous.end(), now.begin(), now.begin() + static_cast<long>(std::min(previous.size(), now.size()))) &&
                   previous.size() <= now.size(),
               "trial " + std::to_string(trial) + " k " + std::to_string(k) + " not a prefix extension");
      previous = now;
    }
  }
}

void chunking(Check& c) {
  std::mt19937_64 rng(7);
  std::vector<corpus::PaperDoc> docs;
  for (int i = 0; i < 50; ++i) {
    docs.push_back(corpus::make_doc("p" + std::to_string(i), corpus::SourceVariant::Publisher,
                                    testkit::random_text(rng, 20 + rng() % 400)));
  }
  for (std::size_t size : {1000, 500, 120, 40}) {
    retrieval::RagConfig config;
    config.chunk_size = size;
    for (const auto& doc : docs) {
      const auto chunks = retrieval::chunk_text(doc, size, config.chunk_overlap());
      for (const auto& chunk : chunks) {
        c.expect(corpus::count_tokens(chunk.text) <= size,
                 doc.paper_id + " chunk " + std::to_string(chunk.chunk_id) + " exceeds " + std::to_string(size));
      }
      c.expect(testkit::chunks_cover_all_tokens(doc, chunks), doc.paper_id + " coverage at " + std::to_string(size));
    }
  }
  retrieval::RagConfig config;
  c.expect(config.chunk_overlap() == 200, "overlap for 1000");
  config.chunk_size = 500;
  c.expect(config.chunk_overlap() == 100, "overlap for 500");
}

void determinism(Check& c) {
  testkit::SyntheticOptions options;
  options.papers = 5;
  options.null_papers = 1;
  const auto corpus = testkit::make_corpus(options);

  for (auto family : {extract::Family::RuleBased, extract::Family::PromptChain, extract::Family::Rag}) {
    const std::string name(extract::to_string(family));
    harness::RunConfig config;
    if (family == extract::Family::PromptChain) config.spec.binding = extract::PromptChainBinding{};
    if (family == extract::Family::Rag) {
      extract::RagBinding b;
      b.rag.chunk_size = 80;
      b.rag.top_k = 3;
      config.spec.binding = b;
    }
    const bool llm = family != extract::Family::RuleBased;
    testkit::TempDir fixtures("acceptance-fixtures");
    {
      auto recorder = testkit::recording_gateway(fixtures.path());
      harness::run_extraction(corpus.docs, config, llm ? recorder.get() : nullptr);
    }
    std::string dumps[2];
    for (auto& dump : dumps) {
      auto replay = testkit::replay_gateway(fixtures.path());
      const auto artifact = harness::run_extraction(corpus.docs, config, llm ? replay.get() : nullptr);
      dump = harness::to_json(artifact).dump();
      if (llm) c.expect(replay->stats().network_attempts == 0, name + ": replay touched the network");
      for (const auto& p : artifact.papers) c.expect(!p.error, name + ": " + p.paper_id + " failed: " + p.error.value_or(""));
    }
    c.expect(dumps[0] == dumps[1], name + ": replay artifacts differ");

    std::size_t chats = 0;
    for (const auto& entry : std::filesystem::directory_iterator(fixtures.path())) {
      std::ifstream in(entry.path());
      const auto fixture = nlohmann::json::parse(in);
      const auto& request = fixture.at("request");
      if (request.at("kind") != "chat") continue;
      ++chats;
      c.expect(request.at("temperature").get<double>() == 0.0, name + ": nonzero temperature recorded");
    }
    if (llm) c.expect(chats > 0, name + ": no chat requests recorded");
  }
}

void context_sweep(Check& c) {
  const auto one = harness::context_windows(10, {"", 4});
  c.expect(one.size() == 1 && one[0] == harness::Window{1, 10}, "10-sentence document gives one window");

  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng() % 150;
    const std::size_t center = 1 + rng() % n;
    const auto windows = harness::context_windows(n, {"", center});
    const std::string tag = "n " + std::to_string(n) + " center " + std::to_string(center);
    c.expect(windows.size() == testkit::simulated_window_count(n, center), tag + ": count differs from simulation");
    c.expect(windows.back() == harness::Window{1, n}, tag + ": does not end at the full document");
    for (std::size_t w = 0; w < windows.size(); ++w) {
      c.expect(windows[w].first <= center && center <= windows[w].last, tag + ": center outside window");
      if (w == 0) continue;
      const auto& prev = windows[w - 1];
      const auto& cur = windows[w];
      c.expect(cur.first <= prev.first && cur.last >= prev.last, tag + ": not nested");
      c.expect(prev.first - cur.first <= 5 && cur.last - prev.last <= 5, tag + ": grew more than 5 per side");
      c.expect(!(prev == harness::Window{1, n}), tag + ": continued past the full document");
    }
  }
}

void error_bars(Check& c) {
  c.expect(eval::error_bar(std::vector<double>{0.3, 0.3, 0.3, 0.3}) == 0.0, "constant subsets");
  const std::vector<double> base{0.20, 0.30, 0.25, 0.25};
  const double bar = eval::error_bar(base);
  // Hand computation: deviations -0.05, 0.05, 0, 0 -> variance 0.005/3, divided by sqrt(4).
  c.expect(std::abs(bar - 0.0204) < 5e-5, "got " + num(bar));
  c.expect(std::abs(bar - std::sqrt(0.005 / 3.0) / 2.0) < 1e-12, "hand value");
  for (double a : {0.5, 2.0, 3.0}) {
    std::vector<double> scaled;
    for (double v : base) scaled.push_back(a * v);
    c.expect(std::abs(eval::error_bar(scaled) - a * bar) < 1e-12, "linear in scale " + num(a));
  }
}

void end_to_end(Check& c) {
  testkit::SyntheticOptions options;
  options.papers = 10;
  options.seed = 11;
  const auto corpus = testkit::make_corpus(options);
  harness::RunConfig config;
  const auto artifact = harness::run_extraction(corpus.docs, config, nullptr);
  const auto report = harness::run_evaluation(artifact, corpus.docs, corpus.gold, 2);
  const auto& m = report.metrics.metrics;
  c.expect(m.precision && *m.precision == 1.0, "precision " + num(m.precision.value_or(-1)));
  c.expect(m.recall && *m.recall == 1.0, "recall " + num(m.recall.value_or(-1)));
  c.expect(report.metrics.counts.tp == corpus.gold.size(), "every planted record found");

  options.null_papers = 10;
  const auto null_corpus = testkit::make_corpus(options);
  const auto null_artifact = harness::run_extraction(null_corpus.docs, config, nullptr);
  const auto null_report = harness::run_evaluation(null_artifact, null_corpus.docs, null_corpus.gold, 2);
  const auto& nm = null_report.metrics.metrics;
  c.expect(nm.null_precision && *nm.null_precision == 1.0, "null precision " + num(nm.null_precision.value_or(-1)));
  c.expect(null_report.metrics.counts.null_papers == 10, "ten null papers");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {1, "Reference score oracle", 1.0, reference_scores},
      {2, "Null-Precision oracle", 0, null_precision},
      {3, "Value grammar golden suite", 0, value_grammar},
      {4, "Matching property suite", 10.0, matching_properties},
      {5, "Error-class fixtures", 0, error_classes},
      {6, "Retrieval equivalence", 0, retrieval_equivalence},
      {7, "Chunking invariants", 0, chunking},
      {8, "Replay determinism", 0, determinism},
      {9, "Context sweep windows", 0, context_sweep},
      {10, "Error bars", 0, error_bars},
      {11, "End-to-end smoke", 5.0, end_to_end},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (crit.budget_seconds > 0) check.expect(seconds < crit.budget_seconds, "over time budget");
    failed += !check.ok();
    std::printf("%s  %2d  %-28s %8.3f s  %s\n", check.ok() ? "PASS" : "FAIL", crit.id, crit.name, seconds,
                check.summary().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
