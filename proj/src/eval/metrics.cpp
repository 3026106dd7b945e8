#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "gapbench/error.hpp"
#include "gapbench/eval.hpp"

namespace gapbench::eval {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const MatchResult> results, std::span<const std::string> paper_ids) {
  std::map<std::string_view, const MatchResult*> by_id;
  for (const auto& r : results) by_id[r.paper_id] = &r;

  ConfusionCounts c;
  std::string missing;
  for (const auto& id : paper_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      missing += missing.empty() ? id : "," + id;
      continue;
    }
    const auto& r = *it->second;
    c.tp += r.tp_pairs.size();
    c.fp += r.fp.size();
    c.fn += r.fn.size();
    if (r.gold_count() == 0) {
      ++c.null_papers;
      if (r.extracted_count() == 0) ++c.tn;
    }
  }
  if (!missing.empty()) throw Error(ErrorCode::Consistency, "no match result for papers: " + missing);
  return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  Metrics m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  // 2PR/(P+R) rewritten over counts; equal wherever both P and R exist.
  if (m.precision && m.recall) m.f_score = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  m.null_precision = ratio(c.tn, c.null_papers);
  return m;
}

double error_bar(std::span<const double> values) {
  const auto n = values.size();
  if (n < 2) throw Error(ErrorCode::Precondition, "error bar needs at least two subset values, got " + std::to_string(n));
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double error_bar(std::span<const std::optional<double>> values) {
  std::vector<double> defined;
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
  }
  if (defined.size() != values.size()) {
    spdlog::warn("error bar: {} of {} subset values undefined and excluded", values.size() - defined.size(),
                 values.size());
  }
  return error_bar(defined);
}

std::vector<std::vector<std::string>> partition_subsets(std::vector<std::string> paper_ids, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::Config, "subset count must be at least 1");
  if (n > paper_ids.size()) {
    throw Error(ErrorCode::Config, "cannot split " + std::to_string(paper_ids.size()) + " papers into " +
                                       std::to_string(n) + " subsets");
  }
  std::sort(paper_ids.begin(), paper_ids.end());
  std::vector<std::vector<std::string>> out(n);
  const auto base = paper_ids.size() / n;
  const auto extra = paper_ids.size() % n;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = base + (i < extra ? 1 : 0);
    out[i].assign(paper_ids.begin() + static_cast<std::ptrdiff_t>(pos),
                  paper_ids.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

std::map<int, std::optional<double>> recall_by_class(std::span<const MatchResult> results, ClassAxis axis) {
  const int classes = axis == ClassAxis::Position ? 4 : 5;
  std::vector<std::size_t> hit(classes + 1, 0), total(classes + 1, 0);
  auto tally = [&](const quant::PropertyRecord& g, bool matched) {
    std::set<int> labels;
    if (axis == ClassAxis::Position) {
      for (auto p : g.position_classes) labels.insert(static_cast<int>(p));
    } else {
      for (auto k : g.value_classes) labels.insert(static_cast<int>(k) + 1);
    }
    for (int c : labels) {
      if (c < 1 || c > classes) continue;
      ++total[c];
      if (matched) ++hit[c];
    }
  };
  for (const auto& r : results) {
    for (const auto& [e, g] : r.tp_pairs) tally(g, true);
    for (const auto& g : r.fn) tally(g, false);
  }
  std::map<int, std::optional<double>> out;
  for (int c = 1; c <= classes; ++c) out[c] = ratio(hit[c], total[c]);
  return out;
}

std::array<std::size_t, kErrorClassCount> fp_by_error_class(std::span<const MatchResult> results) {
  std::array<std::size_t, kErrorClassCount> counts{};
  for (const auto& r : results) {
    for (const auto& fp : r.fp) {
      for (auto c : fp.classes) ++counts[static_cast<std::size_t>(c)];
    }
  }
  return counts;
}

MetricsReport evaluate(std::span<const EvaluationInput> inputs, const GoldSet& gold, std::size_t subsets,
                       const ErrorOverrides* overrides, std::vector<MatchResult>* matches) {
  std::vector<std::string> ids;
  for (const auto& in : inputs) {
    if (!in.doc) throw Error(ErrorCode::Precondition, "evaluation input without a document");
    ids.push_back(in.doc->paper_id);
  }
  gold.check_corpus(ids);

  std::vector<MatchResult> results;
  results.reserve(inputs.size());
  for (const auto& in : inputs) {
    const auto g = gold.for_paper(in.doc->paper_id);
    results.push_back(match_records(in.records, g, in.doc->paper_id, *in.doc, overrides));
  }

  MetricsReport report;
  report.counts = confusion_counts(results, ids);
  report.metrics = compute_metrics(report.counts);
  report.recall_by_position = recall_by_class(results, ClassAxis::Position);
  report.recall_by_value = recall_by_class(results, ClassAxis::Value);
  report.fp_by_error_class = fp_by_error_class(results);
  report.subsets = subsets;

  if (subsets > 0 && !ids.empty()) {
    for (const auto& group : partition_subsets(ids, subsets)) {
      report.subset_metrics.push_back(compute_metrics(confusion_counts(results, group)));
    }
    auto bar = [&](std::optional<double> Metrics::*field, const char* name) -> std::optional<double> {
      std::vector<std::optional<double>> values;
      for (const auto& m : report.subset_metrics) values.push_back(m.*field);
      const auto defined = std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
      if (defined < 2) {
        spdlog::warn("error bar for {} undefined: {} defined subset values", name, defined);
        return std::nullopt;
      }
      return error_bar(values);
    };
    report.error_bars.precision = bar(&Metrics::precision, "precision");
    report.error_bars.recall = bar(&Metrics::recall, "recall");
    report.error_bars.f_score = bar(&Metrics::f_score, "f_score");
    report.error_bars.null_precision = bar(&Metrics::null_precision, "null_precision");
  }

  if (matches) *matches = std::move(results);
  return report;
}

}  // namespace gapbench::eval
