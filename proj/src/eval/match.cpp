#include <algorithm>
#include <cctype>
#include <fstream>

#include "gapbench/error.hpp"
#include "gapbench/eval.hpp"

namespace gapbench::eval {

using quant::Decimal;
using quant::PropertyRecord;
using quant::ValueKind;

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::Hallucination: return "hallucination";
    case ErrorClass::InsufficientMaterial: return "insufficient-material";
    case ErrorClass::WrongMaterial: return "wrong-material";
    case ErrorClass::InaccurateValue: return "inaccurate-value";
    case ErrorClass::WrongValue: return "wrong-value";
    case ErrorClass::WrongUnit: return "wrong-unit";
    case ErrorClass::WrongPairing: return "wrong-pairing";
  }
  return "hallucination";
}

ErrorClass parse_error_class(std::string_view text) {
  for (std::size_t i = 0; i < kErrorClassCount; ++i) {
    const auto c = static_cast<ErrorClass>(i);
    if (text == to_string(c)) return c;
  }
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '7') return static_cast<ErrorClass>(text[0] - '1');
  throw Error(ErrorCode::Validation, "unknown error class: '" + std::string(text) + "'");
}

ErrorOverrides ErrorOverrides::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Load, "cannot read override file: " + path.string());
  ErrorOverrides out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::Load, path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    std::vector<ErrorClass> classes;
    std::string_view rest(line);
    rest.remove_prefix(t2 + 1);
    while (!rest.empty()) {
      const auto bar = rest.find('|');
      classes.push_back(parse_error_class(rest.substr(0, bar)));
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (classes.empty() || classes.size() > 2) {
      throw Error(ErrorCode::Load, path.string() + ":" + std::to_string(line_no) + ": need one or two classes");
    }
    out.add(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), std::move(classes));
  }
  return out;
}

void ErrorOverrides::add(std::string paper_id, std::string key, std::vector<ErrorClass> classes) {
  std::sort(classes.begin(), classes.end());
  entries_[{std::move(paper_id), std::move(key)}] = std::move(classes);
}

const std::vector<ErrorClass>* ErrorOverrides::find(std::string_view paper_id, std::string_view key) const {
  auto it = entries_.find({std::string(paper_id), std::string(key)});
  return it == entries_.end() ? nullptr : &it->second;
}

bool value_equal(const Decimal& value, const Decimal& gold) {
  return value.rounded(gold.scale() + 2) == gold;
}

bool material_matches(std::string_view material, const GoldRecord& gold) {
  if (material == gold.record.material) return true;
  return std::find(gold.aliases.begin(), gold.aliases.end(), material) != gold.aliases.end();
}

bool spec_matches(const quant::ValueSpec& e, const quant::ValueSpec& g) {
  if (e.kind != g.kind || !value_equal(e.center, g.center)) return false;
  if (g.half_width && (!e.half_width || !value_equal(*e.half_width, *g.half_width))) return false;
  return e.bound_dir == g.bound_dir && e.change_dir == g.change_dir;
}

bool record_matches(const PropertyRecord& e, const GoldRecord& g) {
  return material_matches(e.material, g) && spec_matches(e.value, g.record.value);
}

namespace {

void require_ev(const PropertyRecord& r, std::string_view role) {
  if (r.unit != "eV") {
    throw Error(ErrorCode::Precondition,
                std::string(role) + " record '" + r.material + "' of " + r.paper_id + " has unit '" + r.unit + "', expected eV");
  }
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Standalone decimal numbers in the text ("MoSe2" contributes nothing).
std::vector<Decimal> numbers_in(std::string_view text) {
  std::vector<Decimal> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i]) || (i > 0 && (is_alnum(text[i - 1]) || text[i - 1] == '.'))) {
      ++i;
      continue;
    }
    auto j = i;
    while (j < text.size() && is_digit(text[j])) ++j;
    if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
      ++j;
      while (j < text.size() && is_digit(text[j])) ++j;
    }
    if (j - i <= 15) out.push_back(Decimal::parse(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

struct DocIndex {
  std::string text;
  std::vector<Decimal> numbers;
  bool mentions_zero = false;

  explicit DocIndex(const corpus::PaperDoc& doc) {
    text = doc.raw_text.find_first_not_of(" \t\r\n") == std::string::npos ? std::string()
                                                                          : quant::canonicalize_material(doc.raw_text);
    numbers = numbers_in(text);
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    mentions_zero = lower.find("zero") != std::string::npos || lower.find("gapless") != std::string::npos;
  }

  [[nodiscard]] bool has_number(const Decimal& v) const {
    return std::any_of(numbers.begin(), numbers.end(), [&](const Decimal& n) { return n == v; });
  }

  /// The value as written in eV, meV or keV.
  [[nodiscard]] bool has_value(const quant::ValueSpec& v) const {
    if (v.center.is_zero() && mentions_zero) return true;
    for (int shift : {0, 3, -3}) {
      if (has_number(v.center.shifted(shift))) return true;
      if (v.half_width) {
        const auto lo = v.center - *v.half_width;
        const auto hi = v.center + *v.half_width;
        if (has_number(lo.shifted(shift)) && has_number(hi.shifted(shift))) return true;
      }
    }
    return false;
  }
};

bool owns_gold(std::string_view material, std::span<const GoldRecord> gold) {
  return std::any_of(gold.begin(), gold.end(), [&](const GoldRecord& g) { return material_matches(material, g); });
}

bool partial_material(std::string_view material, std::span<const GoldRecord> gold) {
  for (const auto& g : gold) {
    std::vector<std::string_view> names{g.record.material};
    names.insert(names.end(), g.aliases.begin(), g.aliases.end());
    for (auto name : names) {
      if (name == material) continue;
      if (name.find(material) != std::string_view::npos || material.find(name) != std::string_view::npos) return true;
    }
  }
  return false;
}

bool factor_1000(const Decimal& value, const Decimal& gold) {
  if (gold.is_zero()) return false;
  return value_equal(value, gold.shifted(3)) || value_equal(value, gold.shifted(-3)) ||
         value_equal(value.shifted(3), gold) || value_equal(value.shifted(-3), gold);
}

std::vector<ErrorClass> cascade(const PropertyRecord& fp, std::span<const GoldRecord> gold, const DocIndex& doc,
                                std::span<const PropertyRecord> extracted) {
  std::vector<ErrorClass> out;
  const bool material_present = !fp.material.empty() && doc.text.find(fp.material) != std::string::npos;
  const bool value_present = doc.has_value(fp.value);

  if (!material_present) {
    out.push_back(ErrorClass::Hallucination);
  } else if (!owns_gold(fp.material, gold) && partial_material(fp.material, gold)) {
    out.push_back(ErrorClass::InsufficientMaterial);
  } else if (!owns_gold(fp.material, gold)) {
    out.push_back(ErrorClass::WrongMaterial);
  }

  auto same_center = [&](const GoldRecord& g) { return value_equal(fp.value.center, g.record.value.center); };
  const bool inaccurate = std::any_of(gold.begin(), gold.end(), [&](const GoldRecord& g) {
    return material_matches(fp.material, g) && same_center(g) && !spec_matches(fp.value, g.record.value);
  });
  const bool pairing = std::any_of(gold.begin(), gold.end(), [&](const GoldRecord& g) {
    if (material_matches(fp.material, g) || !same_center(g)) return false;
    return std::any_of(extracted.begin(), extracted.end(), [&](const PropertyRecord& other) {
      return other.material != fp.material && material_matches(other.material, g);
    });
  });
  bool unit = std::any_of(gold.begin(), gold.end(), [&](const GoldRecord& g) {
    return material_matches(fp.material, g) && factor_1000(fp.value.center, g.record.value.center);
  });
  if (!unit && !owns_gold(fp.material, gold)) {
    unit = std::any_of(gold.begin(), gold.end(),
                       [&](const GoldRecord& g) { return factor_1000(fp.value.center, g.record.value.center); });
  }
  const bool among_gold = std::any_of(gold.begin(), gold.end(), same_center);

  if (inaccurate) {
    out.push_back(ErrorClass::InaccurateValue);
  } else if (pairing) {
    out.push_back(ErrorClass::WrongPairing);
  } else if (unit) {
    out.push_back(ErrorClass::WrongUnit);
  } else if (!value_present) {
    out.push_back(ErrorClass::Hallucination);
  } else if (!among_gold) {
    out.push_back(ErrorClass::WrongValue);
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) out.push_back(ErrorClass::WrongValue);
  if (out.size() > 2) out.resize(2);
  return out;
}

}  // namespace

std::vector<ErrorClass> classify_error(const PropertyRecord& fp, std::span<const GoldRecord> gold,
                                       const corpus::PaperDoc& doc, std::span<const PropertyRecord> extracted) {
  return cascade(fp, gold, DocIndex(doc), extracted);
}

MatchResult match_records(std::span<const PropertyRecord> extracted, std::span<const GoldRecord> gold,
                          std::string_view paper_id, const corpus::PaperDoc& doc, const ErrorOverrides* overrides) {
  for (const auto& r : extracted) require_ev(r, "extracted");
  for (const auto& g : gold) require_ev(g.record, "gold");

  std::vector<PropertyRecord> ext(extracted.begin(), extracted.end());
  std::stable_sort(ext.begin(), ext.end(), quant::canonical_less);
  std::vector<const GoldRecord*> golds;
  for (const auto& g : gold) golds.push_back(&g);
  std::stable_sort(golds.begin(), golds.end(),
                   [](const GoldRecord* a, const GoldRecord* b) { return quant::canonical_less(a->record, b->record); });

  MatchResult result;
  result.paper_id = std::string(paper_id);
  std::vector<bool> used(golds.size(), false);
  std::vector<const PropertyRecord*> unmatched;
  for (const auto& e : ext) {
    bool hit = false;
    for (std::size_t i = 0; i < golds.size() && !hit; ++i) {
      if (!used[i] && record_matches(e, *golds[i])) {
        used[i] = true;
        hit = true;
        result.tp_pairs.emplace_back(e, golds[i]->record);
      }
    }
    if (!hit) unmatched.push_back(&e);
  }
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!used[i]) result.fn.push_back(golds[i]->record);
  }

  if (!unmatched.empty()) {
    const DocIndex index(doc);
    for (const auto* e : unmatched) {
      const auto* pinned = overrides ? overrides->find(paper_id, quant::record_key(*e)) : nullptr;
      result.fp.push_back({*e, pinned ? *pinned : cascade(*e, gold, index, ext)});
    }
  }
  return result;
}

}  // namespace gapbench::eval
