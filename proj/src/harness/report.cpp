#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "gapbench/error.hpp"
#include "gapbench/harness.hpp"

namespace gapbench::harness {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json metrics_json(const eval::Metrics& m) {
  return {{"precision", opt(m.precision)},
          {"recall", opt(m.recall)},
          {"f_score", opt(m.f_score)},
          {"null_precision", opt(m.null_precision)}};
}

eval::Metrics metrics_from(const Json& j) {
  return {opt_from(j.at("precision")), opt_from(j.at("recall")), opt_from(j.at("f_score")),
          opt_from(j.at("null_precision"))};
}

Json by_class_json(const std::map<int, std::optional<double>>& m) {
  Json j = Json::object();
  for (const auto& [c, v] : m) j[std::to_string(c)] = opt(v);
  return j;
}

std::map<int, std::optional<double>> by_class_from(const Json& j) {
  std::map<int, std::optional<double>> m;
  for (const auto& [k, v] : j.items()) m[std::stoi(k)] = opt_from(v);
  return m;
}

std::string tool_label(const Json& snapshot) {
  auto label = snapshot.value("extractor", std::string("?"));
  if (snapshot.contains("inference_model")) label += ":" + snapshot["inference_model"].get<std::string>();
  if (snapshot.contains("chunk_size")) {
    label += ":c" + std::to_string(snapshot["chunk_size"].get<std::size_t>()) + "k" +
             std::to_string(snapshot["top_k"].get<std::size_t>());
  }
  return label;
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "\xE2\x80\x94";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
  return buf;
}

}  // namespace

SummaryRow summary_row(std::string tool, const eval::ConfusionCounts& counts, double wall_seconds) {
  return {std::move(tool), counts.tp + counts.fp, counts.tp, eval::compute_metrics(counts), wall_seconds};
}

EvaluationReport run_evaluation(const RunArtifact& artifact, const std::vector<corpus::PaperDoc>& docs,
                                const eval::GoldSet& gold, std::size_t subsets,
                                const eval::ErrorOverrides* overrides) {
  std::map<std::string_view, const PaperRun*> runs;
  for (const auto& p : artifact.papers) runs[p.paper_id] = &p;
  std::set<std::string_view> doc_ids;
  std::string mismatch;
  for (const auto& d : docs) {
    doc_ids.insert(d.paper_id);
    if (!runs.count(d.paper_id)) mismatch += " " + d.paper_id + "(not in artifact)";
  }
  for (const auto& p : artifact.papers) {
    if (!doc_ids.count(p.paper_id)) mismatch += " " + p.paper_id + "(not in corpus)";
  }
  if (!mismatch.empty()) throw Error(ErrorCode::Consistency, "artifact and corpus disagree:" + mismatch);

  std::vector<eval::EvaluationInput> inputs;
  for (const auto& d : docs) inputs.push_back({&d, runs[d.paper_id]->records});

  EvaluationReport report;
  report.run_id = artifact.run_id;
  report.tool = tool_label(artifact.snapshot);
  report.metrics = eval::evaluate(inputs, gold, subsets, overrides);
  report.row = summary_row(report.tool, report.metrics.counts, artifact.wall_seconds);
  return report;
}

Json to_json(const EvaluationReport& r) {
  const auto& m = r.metrics;
  Json j;
  j["schema"] = kReportSchema;
  j["run_id"] = r.run_id;
  j["tool"] = r.tool;
  j["counts"] = {{"tp", m.counts.tp},
                 {"fp", m.counts.fp},
                 {"fn", m.counts.fn},
                 {"tn", m.counts.tn},
                 {"null_papers", m.counts.null_papers}};
  j["metrics"] = metrics_json(m.metrics);
  j["error_bars"] = metrics_json(m.error_bars);
  j["subsets"] = m.subsets;
  j["subset_metrics"] = Json::array();
  for (const auto& s : m.subset_metrics) j["subset_metrics"].push_back(metrics_json(s));
  j["recall_by_position"] = by_class_json(m.recall_by_position);
  j["recall_by_value"] = by_class_json(m.recall_by_value);
  Json fp = Json::object();
  for (std::size_t c = 0; c < eval::kErrorClassCount; ++c) {
    fp[std::string(eval::to_string(static_cast<eval::ErrorClass>(c)))] = m.fp_by_error_class[c];
  }
  j["fp_by_error_class"] = std::move(fp);
  j["wall_seconds"] = r.row.wall_seconds;
  return j;
}

EvaluationReport report_from_json(const Json& j) {
  if (j.value("schema", "") != kReportSchema) {
    throw Error(ErrorCode::SchemaMismatch, "expected report schema " + std::string(kReportSchema));
  }
  try {
    EvaluationReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.tool = j.at("tool").get<std::string>();
    auto& m = r.metrics;
    const auto& c = j.at("counts");
    m.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                c.at("tn").get<std::size_t>(), c.at("null_papers").get<std::size_t>()};
    m.metrics = metrics_from(j.at("metrics"));
    m.error_bars = metrics_from(j.at("error_bars"));
    m.subsets = j.at("subsets").get<std::size_t>();
    for (const auto& s : j.at("subset_metrics")) m.subset_metrics.push_back(metrics_from(s));
    m.recall_by_position = by_class_from(j.at("recall_by_position"));
    m.recall_by_value = by_class_from(j.at("recall_by_value"));
    for (std::size_t i = 0; i < eval::kErrorClassCount; ++i) {
      m.fp_by_error_class[i] =
          j.at("fp_by_error_class").at(std::string(eval::to_string(static_cast<eval::ErrorClass>(i)))).get<std::size_t>();
    }
    r.row = summary_row(r.tool, m.counts, j.value("wall_seconds", 0.0));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed report: ") + e.what());
  }
}

std::vector<MetricDelta> compare_runs(const Json& a, const Json& b) {
  if (a.value("schema", "") != kReportSchema || b.value("schema", "") != kReportSchema) {
    throw Error(ErrorCode::SchemaMismatch, "both inputs must use report schema " + std::string(kReportSchema));
  }
  std::vector<MetricDelta> out;
  for (const char* section : {"metrics", "counts", "recall_by_position", "recall_by_value", "fp_by_error_class"}) {
    const auto& sa = a.at(section);
    const auto& sb = b.at(section);
    std::set<std::string> ka, kb;
    for (const auto& [k, v] : sa.items()) ka.insert(k);
    for (const auto& [k, v] : sb.items()) kb.insert(k);
    if (ka != kb) throw Error(ErrorCode::SchemaMismatch, std::string("reports differ in the cells of ") + section);
    for (const auto& [key, va] : sa.items()) {
      MetricDelta d;
      d.metric = std::string(section) + "." + key;
      d.a = opt_from(va);
      d.b = opt_from(sb.at(key));
      if (d.a && d.b) d.delta = *d.a - *d.b;
      if (std::string_view(section) == "metrics") {
        d.bar_a = opt_from(a.at("error_bars").at(key));
        d.bar_b = opt_from(b.at("error_bars").at(key));
        if (d.delta && d.bar_a && d.bar_b) d.exceeds_noise = std::abs(*d.delta) > *d.bar_a + *d.bar_b;
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<MetricDelta> compare_runs(const EvaluationReport& a, const EvaluationReport& b) {
  return compare_runs(to_json(a), to_json(b));
}

Json to_json(const std::vector<MetricDelta>& deltas) {
  Json rows = Json::array();
  for (const auto& d : deltas) {
    Json r;
    r["metric"] = d.metric;
    r["a"] = opt(d.a);
    r["b"] = opt(d.b);
    r["delta"] = opt(d.delta);
    r["error_bar_a"] = opt(d.bar_a);
    r["error_bar_b"] = opt(d.bar_b);
    r["noise"] = d.exceeds_noise ? Json(*d.exceeds_noise ? "exceeds noise" : "within noise") : Json(nullptr);
    rows.push_back(std::move(r));
  }
  return {{"deltas", std::move(rows)}};
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "tsv") return ReportFormat::Tsv;
  if (text == "json") return ReportFormat::Json;
  throw Error(ErrorCode::Config, "unknown report format: " + std::string(text));
}

std::string render_report(const std::vector<EvaluationReport>& reports, ReportFormat format) {
  if (format == ReportFormat::Tsv) {
    std::string out = "Tool\tTP+FP\tTP\tPrecision\tRecall\tF-score\tNull-Precision\tWall time (s)\n";
    for (const auto& r : reports) {
      const auto& row = r.row;
      char wall[32];
      std::snprintf(wall, sizeof wall, "%.3f", row.wall_seconds);
      out += row.tool + '\t' + std::to_string(row.extracted) + '\t' + std::to_string(row.tp) + '\t' +
             percent(row.metrics.precision) + '\t' + percent(row.metrics.recall) + '\t' + percent(row.metrics.f_score) +
             '\t' + percent(row.metrics.null_precision) + '\t' + wall + '\n';
    }
    return out;
  }

  Json j;
  j["schema"] = "gapbench.report-set/1";
  j["reports"] = Json::array();
  for (const auto& r : reports) j["reports"].push_back(to_json(r));

  Json series;
  series["metrics"] = Json::array();
  for (const char* name : {"precision", "recall", "f_score", "null_precision"}) {
    Json s{{"metric", name}, {"points", Json::array()}};
    for (const auto& r : reports) {
      const auto rj = to_json(r);
      s["points"].push_back({{"tool", r.tool}, {"run_id", r.run_id}, {"value", rj["metrics"][name]},
                             {"error_bar", rj["error_bars"][name]}});
    }
    series["metrics"].push_back(std::move(s));
  }
  series["fp_by_error_class"] = Json::array();
  for (std::size_t c = 0; c < eval::kErrorClassCount; ++c) {
    Json s{{"class", eval::to_string(static_cast<eval::ErrorClass>(c))}, {"points", Json::array()}};
    for (const auto& r : reports) s["points"].push_back({{"tool", r.tool}, {"count", r.metrics.fp_by_error_class[c]}});
    series["fp_by_error_class"].push_back(std::move(s));
  }
  auto class_series = [&](const char* key, int classes, auto member) {
    series[key] = Json::array();
    for (int c = 1; c <= classes; ++c) {
      Json s{{"class", c}, {"points", Json::array()}};
      for (const auto& r : reports) {
        const auto& m = r.metrics.*member;
        auto it = m.find(c);
        s["points"].push_back({{"tool", r.tool}, {"recall", it == m.end() ? Json(nullptr) : opt(it->second)}});
      }
      series[key].push_back(std::move(s));
    }
  };
  class_series("recall_by_position", 4, &eval::MetricsReport::recall_by_position);
  class_series("recall_by_value", 5, &eval::MetricsReport::recall_by_value);
  j["series"] = std::move(series);
  return j.dump(2) + "\n";
}

void emit_report(const std::vector<EvaluationReport>& reports, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write report: " + path.string());
  out << render_report(reports, format);
  if (!out) throw Error(ErrorCode::Io, "failed writing report: " + path.string());
}

}  // namespace gapbench::harness
