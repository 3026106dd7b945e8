#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gapbench/error.hpp"
#include "gapbench/eval.hpp"

namespace gapbench::eval {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r") - b + 1));
}

std::vector<std::string> list_cell(std::string_view cell) {
  std::vector<std::string> out;
  std::string normalized(cell);
  std::replace(normalized.begin(), normalized.end(), ',', '|');
  for (auto& item : split(normalized, '|')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols = {"paper_id",  "material", "aliases",    "value_kinds",      "center",
                                                "half_width", "bound_dir", "change_dir", "position_classes", "source"};
  return cols;
}

std::string column_name(std::string name) {
  if (name == "value_kind") return "value_kinds";
  if (name == "position_class") return "position_classes";
  return name;
}

}  // namespace

GoldSet::GoldSet(std::vector<GoldRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    records_[i].record.validate();
    by_paper_[records_[i].record.paper_id].push_back(i);
  }
}

GoldSet GoldSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Load, "cannot read gold file: " + path.string());

  std::string line;
  std::map<std::string, std::size_t> col;
  std::size_t line_no = 0;
  std::vector<GoldRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cells = split(line, '\t');
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[column_name(trim(cells[i]))] = i;
      for (const auto& required : {"paper_id", "material", "value_kinds", "center"}) {
        if (!col.count(required)) {
          throw Error(ErrorCode::Load, path.string() + ": gold header lacks column '" + required + "'");
        }
      }
      continue;
    }
    auto cell = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= cells.size()) return {};
      return trim(cells[it->second]);
    };
    try {
      GoldRecord g;
      auto& r = g.record;
      r.paper_id = cell("paper_id");
      if (r.paper_id.empty()) throw Error(ErrorCode::Validation, "empty paper_id");
      r.material = quant::canonicalize_material(cell("material"));
      for (const auto& a : list_cell(cell("aliases"))) g.aliases.push_back(quant::canonicalize_material(a));
      const auto kinds = list_cell(cell("value_kinds"));
      if (kinds.empty()) throw Error(ErrorCode::Validation, "empty value_kinds");
      for (const auto& k : kinds) r.value_classes.push_back(quant::parse_value_kind(k));
      r.value.kind = r.value_classes.front();
      r.value.center = quant::Decimal::parse(cell("center"));
      if (auto hw = cell("half_width"); !hw.empty()) r.value.half_width = quant::Decimal::parse(hw);
      if (auto bd = cell("bound_dir"); !bd.empty()) r.value.bound_dir = quant::parse_bound_dir(bd);
      if (auto cd = cell("change_dir"); !cd.empty()) r.value.change_dir = quant::parse_change_dir(cd);
      for (const auto& p : list_cell(cell("position_classes"))) {
        if (p.size() != 1 || p[0] < '1' || p[0] > '5') throw Error(ErrorCode::Validation, "bad position class '" + p + "'");
        r.position_classes.push_back(static_cast<quant::PositionClass>(p[0] - '0'));
      }
      r.source = cell("source");
      r.validate();
      records.push_back(std::move(g));
    } catch (const Error& e) {
      throw Error(ErrorCode::Load, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return GoldSet(std::move(records));
}

void GoldSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write gold file: " + path.string());
  out << join(columns(), '\t') << '\n';
  for (const auto& g : records_) {
    const auto& r = g.record;
    std::vector<std::string> kinds, positions;
    for (auto k : r.value_classes) kinds.emplace_back(quant::to_string(k));
    if (kinds.empty()) kinds.emplace_back(quant::to_string(r.value.kind));
    for (auto p : r.position_classes) positions.push_back(std::to_string(static_cast<int>(p)));
    out << r.paper_id << '\t' << r.material << '\t' << join(g.aliases, '|') << '\t' << join(kinds, '|') << '\t'
        << r.value.center.str() << '\t' << (r.value.half_width ? r.value.half_width->str() : "") << '\t'
        << (r.value.bound_dir ? quant::to_string(*r.value.bound_dir) : "") << '\t'
        << (r.value.change_dir ? quant::to_string(*r.value.change_dir) : "") << '\t' << join(positions, '|') << '\t'
        << r.source << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing gold file: " + path.string());
}

std::vector<GoldRecord> GoldSet::for_paper(std::string_view paper_id) const {
  std::vector<GoldRecord> out;
  if (auto it = by_paper_.find(paper_id); it != by_paper_.end()) {
    for (auto i : it->second) out.push_back(records_[i]);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GoldRecord& a, const GoldRecord& b) { return quant::canonical_less(a.record, b.record); });
  return out;
}

bool GoldSet::has_paper(std::string_view paper_id) const { return by_paper_.find(paper_id) != by_paper_.end(); }

void GoldSet::check_corpus(std::span<const std::string> corpus_ids) const {
  const std::set<std::string_view> known(corpus_ids.begin(), corpus_ids.end());
  std::vector<std::string> unknown;
  for (const auto& [id, rows] : by_paper_) {
    if (!known.count(id)) unknown.push_back(id);
  }
  if (!unknown.empty()) {
    throw Error(ErrorCode::Validation, "gold references papers missing from the corpus: " + join(unknown, ','));
  }
}

std::size_t GoldSet::null_paper_count(std::span<const std::string> corpus_ids) const {
  return static_cast<std::size_t>(
      std::count_if(corpus_ids.begin(), corpus_ids.end(), [&](const std::string& id) { return !has_paper(id); }));
}

}  // namespace gapbench::eval
