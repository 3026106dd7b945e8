#include <algorithm>
#include <tuple>

#include "gapbench/error.hpp"
#include "gapbench/quant.hpp"

namespace gapbench::quant {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Fixed: return "Fixed";
    case ValueKind::Estimated: return "Estimated";
    case ValueKind::Range: return "Range";
    case ValueKind::Bounded: return "Bounded";
    case ValueKind::Change: return "Change";
  }
  return "Fixed";
}

std::string_view to_string(BoundDir dir) { return dir == BoundDir::Lower ? "lower" : "upper"; }

std::string_view to_string(ChangeDir dir) { return dir == ChangeDir::Increase ? "increase" : "decrease"; }

ValueKind parse_value_kind(std::string_view text) {
  for (auto k : {ValueKind::Fixed, ValueKind::Estimated, ValueKind::Range, ValueKind::Bounded,
                 ValueKind::Change}) {
    if (text == to_string(k)) return k;
  }
  // Numeric class labels 1-5 as used in annotation sheets.
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '5') return static_cast<ValueKind>(text[0] - '1');
  throw Error(ErrorCode::Validation, "unknown value kind: '" + std::string(text) + "'");
}

BoundDir parse_bound_dir(std::string_view text) {
  if (text == "lower") return BoundDir::Lower;
  if (text == "upper") return BoundDir::Upper;
  throw Error(ErrorCode::Validation, "unknown bound direction: '" + std::string(text) + "'");
}

ChangeDir parse_change_dir(std::string_view text) {
  if (text == "increase") return ChangeDir::Increase;
  if (text == "decrease") return ChangeDir::Decrease;
  throw Error(ErrorCode::Validation, "unknown change direction: '" + std::string(text) + "'");
}

void ValueSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Validation, msg); };
  if (kind == ValueKind::Range) {
    if (!half_width || half_width->negative() || half_width->is_zero()) fail("range needs half_width > 0");
  } else if (half_width) {
    fail("half_width is only valid for Range values");
  }
  if ((kind == ValueKind::Bounded) != bound_dir.has_value()) fail("bound_dir is required exactly for Bounded values");
  if ((kind == ValueKind::Change) != change_dir.has_value()) fail("change_dir is required exactly for Change values");
  if (center.negative()) fail("center must be non-negative");
}

std::string render_value(const ValueSpec& v) {
  switch (v.kind) {
    case ValueKind::Fixed: return v.center.str();
    case ValueKind::Estimated: return "~" + v.center.str();
    case ValueKind::Range:
      return v.center.str() + " \xC2\xB1 " + (v.half_width ? v.half_width->str() : std::string("0"));
    case ValueKind::Bounded:
      return std::string(v.bound_dir == BoundDir::Lower ? "> " : "< ") + v.center.str();
    case ValueKind::Change:
      return std::string(v.change_dir == ChangeDir::Decrease ? "decreased by " : "increased by ") +
             v.center.str();
  }
  return v.center.str();
}

std::string render_quantity(const ValueSpec& v) { return render_value(v) + " eV"; }

std::string canonicalize_material(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < name.size()) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      ++i;
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    // U+2080..U+2089 subscript digits, U+2093 subscript x.
    if (c == 0xE2 && i + 2 < name.size() && static_cast<unsigned char>(name[i + 1]) == 0x82) {
      const auto last = static_cast<unsigned char>(name[i + 2]);
      if (last >= 0x80 && last <= 0x89) {
        out += static_cast<char>('0' + (last - 0x80));
        i += 3;
        continue;
      }
      if (last == 0x93) {
        out += 'x';
        i += 3;
        continue;
      }
    }
    if (c == 0xC2 && i + 1 < name.size() && static_cast<unsigned char>(name[i + 1]) == 0xA0) {
      pending_space = !out.empty();
      i += 2;
      continue;
    }
    out += name[i];
    ++i;
  }
  if (out.empty()) throw Error(ErrorCode::Validation, "material name is empty");
  return out;
}

void PropertyRecord::validate() const {
  if (material.empty()) throw Error(ErrorCode::Validation, "record has an empty material");
  if (position_classes.size() > 2) throw Error(ErrorCode::Validation, "at most two position classes per record");
  if (value_classes.size() > 2) throw Error(ErrorCode::Validation, "at most two value classes per record");
  if (unit != "eV") throw Error(ErrorCode::Validation, "record unit must be eV, got " + unit);
  value.validate();
}

std::string record_key(const PropertyRecord& r) {
  auto v = r.value;
  v.center = v.center.trimmed();
  if (v.half_width) v.half_width = v.half_width->trimmed();
  return r.material + "|" + render_quantity(v);
}

bool canonical_less(const PropertyRecord& a, const PropertyRecord& b) {
  auto key = [](const PropertyRecord& r) {
    return std::tuple(std::string_view(r.paper_id), std::string_view(r.material), static_cast<int>(r.value.kind),
                      r.value.center, r.value.half_width.value_or(Decimal{}),
                      r.value.bound_dir ? static_cast<int>(*r.value.bound_dir) : -1,
                      r.value.change_dir ? static_cast<int>(*r.value.change_dir) : -1, std::string_view(r.source));
  };
  return key(a) < key(b);
}

CleanResult clean_records(std::span<const RawExtraction> raw) {
  CleanResult out;
  for (const auto& r : raw) {
    auto drop = [&](std::string reason, std::string detail) {
      out.drops.push_back({r.paper_id, std::move(reason), std::move(detail)});
    };
    std::string material;
    try {
      material = canonicalize_material(r.material_text);
    } catch (const Error&) {
      drop("empty-material", r.value_text + " " + r.unit_text);
      continue;
    }
    std::string expr = r.value_text;
    if (!r.unit_text.empty()) expr += " " + r.unit_text;
    ParsedQuantity q;
    try {
      q = parse_quantity(expr);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::ExcludedQuantity: drop("wavelength-excluded", expr); break;
        case ErrorCode::Normalization: drop("unknown-unit", expr); break;
        default: drop("unparsable", expr); break;
      }
      continue;
    }
    PropertyRecord rec;
    rec.paper_id = r.paper_id;
    rec.material = std::move(material);
    rec.value = q.value;
    rec.source = r.source_sentence;
    const bool duplicate = std::any_of(out.records.begin(), out.records.end(), [&](const PropertyRecord& o) {
      return o.paper_id == rec.paper_id && o.material == rec.material && o.value == rec.value;
    });
    if (duplicate) {
      drop("duplicate", record_key(rec));
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

RawExtraction to_raw(const PropertyRecord& record) {
  return {record.paper_id, record.material, render_value(record.value), record.unit, record.source};
}

nlohmann::ordered_json to_json(const PropertyRecord& r) {
  nlohmann::ordered_json j;
  j["paper_id"] = r.paper_id;
  j["material"] = r.material;
  j["kind"] = to_string(r.value.kind);
  j["center"] = r.value.center.str();
  j["half_width"] = r.value.half_width ? nlohmann::ordered_json(r.value.half_width->str()) : nullptr;
  j["bound_dir"] = r.value.bound_dir ? nlohmann::ordered_json(to_string(*r.value.bound_dir)) : nullptr;
  j["change_dir"] = r.value.change_dir ? nlohmann::ordered_json(to_string(*r.value.change_dir)) : nullptr;
  j["unit"] = r.unit;
  j["source"] = r.source;
  return j;
}

PropertyRecord record_from_json(const nlohmann::ordered_json& j) {
  PropertyRecord r;
  r.paper_id = j.at("paper_id").get<std::string>();
  r.material = j.at("material").get<std::string>();
  r.value.kind = parse_value_kind(j.at("kind").get<std::string>());
  r.value.center = Decimal::parse(j.at("center").get<std::string>());
  if (!j.at("half_width").is_null()) r.value.half_width = Decimal::parse(j.at("half_width").get<std::string>());
  if (!j.at("bound_dir").is_null()) r.value.bound_dir = parse_bound_dir(j.at("bound_dir").get<std::string>());
  if (!j.at("change_dir").is_null()) r.value.change_dir = parse_change_dir(j.at("change_dir").get<std::string>());
  r.unit = j.at("unit").get<std::string>();
  r.source = j.at("source").get<std::string>();
  r.validate();
  return r;
}

}  // namespace gapbench::quant
