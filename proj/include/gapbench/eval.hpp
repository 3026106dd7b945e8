#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapbench/corpus.hpp"
#include "gapbench/quant.hpp"

namespace gapbench::eval {

struct GoldRecord {
  quant::PropertyRecord record;
  std::vector<std::string> aliases;  // canonicalized
};

/// Human-annotated records. Papers of the corpus without any gold row are
/// null papers.
class GoldSet {
 public:
  GoldSet() = default;
  explicit GoldSet(std::vector<GoldRecord> records);

  /// Tab-separated table with header
  ///   paper_id material aliases value_kinds center half_width bound_dir
  ///   change_dir position_classes source
  /// Multi-valued cells use "|". The first value kind is the record's kind.
  static GoldSet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  [[nodiscard]] const std::vector<GoldRecord>& records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  /// Records of one paper in canonical order.
  [[nodiscard]] std::vector<GoldRecord> for_paper(std::string_view paper_id) const;
  [[nodiscard]] bool has_paper(std::string_view paper_id) const;

  /// Throws Error{Validation} listing gold paper ids absent from the corpus.
  void check_corpus(std::span<const std::string> corpus_ids) const;
  [[nodiscard]] std::size_t null_paper_count(std::span<const std::string> corpus_ids) const;

 private:
  std::vector<GoldRecord> records_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_paper_;
};

/// Declaration order is the priority order when trimming to two classes.
enum class ErrorClass {
  Hallucination,
  InsufficientMaterial,
  WrongMaterial,
  InaccurateValue,
  WrongValue,
  WrongUnit,
  WrongPairing,
};
inline constexpr std::size_t kErrorClassCount = 7;
std::string_view to_string(ErrorClass c);
ErrorClass parse_error_class(std::string_view text);

/// Manual classifications keyed by (paper_id, record_key). Tab-separated
/// lines: paper_id, record key, "|"-separated classes. '#' comments.
class ErrorOverrides {
 public:
  ErrorOverrides() = default;
  static ErrorOverrides load(const std::filesystem::path& path);
  void add(std::string paper_id, std::string key, std::vector<ErrorClass> classes);
  [[nodiscard]] const std::vector<ErrorClass>* find(std::string_view paper_id, std::string_view key) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<ErrorClass>> entries_;
};

struct FalsePositive {
  quant::PropertyRecord record;
  std::vector<ErrorClass> classes;  // 1-2, declaration order
};

struct MatchResult {
  std::string paper_id;
  std::vector<std::pair<quant::PropertyRecord, quant::PropertyRecord>> tp_pairs;  // (extracted, gold)
  std::vector<FalsePositive> fp;
  std::vector<quant::PropertyRecord> fn;

  [[nodiscard]] std::size_t extracted_count() const { return tp_pairs.size() + fp.size(); }
  [[nodiscard]] std::size_t gold_count() const { return tp_pairs.size() + fn.size(); }
};

/// True when `value` equals `gold` once rounded two digits beyond the gold
/// value's printed precision: 0.80 and 0.800 match 0.8, 0.84 does not.
bool value_equal(const quant::Decimal& value, const quant::Decimal& gold);
bool material_matches(std::string_view material, const GoldRecord& gold);
bool spec_matches(const quant::ValueSpec& extracted, const quant::ValueSpec& gold);
bool record_matches(const quant::PropertyRecord& extracted, const GoldRecord& gold);

/// Greedy one-to-one matching over canonically sorted records. `gold` holds
/// the paper's records; every false positive is classified against `doc`.
/// Throws Error{Precondition} for a unit other than eV.
MatchResult match_records(std::span<const quant::PropertyRecord> extracted, std::span<const GoldRecord> gold,
                          std::string_view paper_id, const corpus::PaperDoc& doc,
                          const ErrorOverrides* overrides = nullptr);

/// Heuristic cascade. `extracted` is the paper's full extraction (used for
/// the pairing check).
std::vector<ErrorClass> classify_error(const quant::PropertyRecord& fp, std::span<const GoldRecord> gold,
                                       const corpus::PaperDoc& doc,
                                       std::span<const quant::PropertyRecord> extracted);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;          // papers
  std::size_t null_papers = 0;  // papers

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Sums over the papers in `paper_ids`. Throws Error{Consistency} listing
/// every id that has no MatchResult.
ConfusionCounts confusion_counts(std::span<const MatchResult> results, std::span<const std::string> paper_ids);

struct Metrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_score;
  std::optional<double> null_precision;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Fractions in [0, 1]; nullopt for 0/0.
Metrics compute_metrics(const ConfusionCounts& c);

/// Sample standard deviation divided by sqrt(N). Throws Error{Precondition}
/// when N < 2.
double error_bar(std::span<const double> values);
/// Drops undefined values with a warning before computing the bar.
double error_bar(std::span<const std::optional<double>> values);

/// Papers sorted by id, split into `n` contiguous groups whose sizes differ
/// by at most one.
std::vector<std::vector<std::string>> partition_subsets(std::vector<std::string> paper_ids, std::size_t n);

enum class ClassAxis { Position, Value };

/// Class label -> recall. Position classes 1-4 (figures excluded), value
/// classes 1-5. Classes without gold records are nullopt.
std::map<int, std::optional<double>> recall_by_class(std::span<const MatchResult> results, ClassAxis axis);

std::array<std::size_t, kErrorClassCount> fp_by_error_class(std::span<const MatchResult> results);

struct MetricsReport {
  ConfusionCounts counts;
  Metrics metrics;
  Metrics error_bars;  // nullopt when fewer than two subsets are defined
  std::size_t subsets = 0;
  std::vector<Metrics> subset_metrics;
  std::map<int, std::optional<double>> recall_by_position;
  std::map<int, std::optional<double>> recall_by_value;
  std::array<std::size_t, kErrorClassCount> fp_by_error_class{};
};

struct EvaluationInput {
  const corpus::PaperDoc* doc = nullptr;
  std::span<const quant::PropertyRecord> records;
};

/// Match, classify, count, score, break down and compute error bars.
/// Throws Error{Validation} when gold names papers outside `inputs`.
MetricsReport evaluate(std::span<const EvaluationInput> inputs, const GoldSet& gold, std::size_t subsets,
                       const ErrorOverrides* overrides = nullptr, std::vector<MatchResult>* matches = nullptr);

}  // namespace gapbench::eval
