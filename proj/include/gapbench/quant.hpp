#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace gapbench::quant {

/// Exact decimal: value = mantissa * 10^-scale. The scale is the printed
/// number of fractional digits, kept so that matching can compare at the
/// precision a value was written with.
class Decimal {
 public:
  constexpr Decimal() = default;
  constexpr Decimal(std::int64_t mantissa, int scale) : mantissa_(mantissa), scale_(scale) {}

  /// Accepts "[-+]digits[.digits]". Throws Error{Parse} otherwise.
  static Decimal parse(std::string_view text);

  [[nodiscard]] std::int64_t mantissa() const { return mantissa_; }
  [[nodiscard]] int scale() const { return scale_; }

  [[nodiscard]] double to_double() const;
  [[nodiscard]] std::string str() const;

  /// Multiplies by 10^exponent without rounding (shifts the scale).
  [[nodiscard]] Decimal shifted(int exponent) const;
  /// Half-away-from-zero rounding to `digits` fractional digits.
  [[nodiscard]] Decimal rounded(int digits) const;
  /// Same value, trailing fractional zeros removed.
  [[nodiscard]] Decimal trimmed() const;

  [[nodiscard]] Decimal abs() const { return {mantissa_ < 0 ? -mantissa_ : mantissa_, scale_}; }
  [[nodiscard]] bool negative() const { return mantissa_ < 0; }
  [[nodiscard]] bool is_zero() const { return mantissa_ == 0; }

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  /// Exact halving; gains one digit of scale when the mantissa is odd.
  [[nodiscard]] Decimal halved() const;

  /// Value comparison: 0.8 == 0.80.
  friend bool operator==(const Decimal& a, const Decimal& b);
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

 private:
  std::int64_t mantissa_ = 0;
  int scale_ = 0;
};

enum class ValueKind { Fixed, Estimated, Range, Bounded, Change };
enum class BoundDir { Lower, Upper };
enum class ChangeDir { Increase, Decrease };

std::string_view to_string(ValueKind kind);
std::string_view to_string(BoundDir dir);
std::string_view to_string(ChangeDir dir);
ValueKind parse_value_kind(std::string_view text);
BoundDir parse_bound_dir(std::string_view text);
ChangeDir parse_change_dir(std::string_view text);

/// Tagged bandgap value in eV. Change stores the magnitude of the delta.
struct ValueSpec {
  ValueKind kind = ValueKind::Fixed;
  Decimal center;
  std::optional<Decimal> half_width;
  std::optional<BoundDir> bound_dir;
  std::optional<ChangeDir> change_dir;

  static ValueSpec fixed(Decimal v) { return {ValueKind::Fixed, v, {}, {}, {}}; }
  static ValueSpec estimated(Decimal v) { return {ValueKind::Estimated, v, {}, {}, {}}; }
  static ValueSpec range(Decimal center, Decimal half) {
    return {ValueKind::Range, center, half, {}, {}};
  }
  static ValueSpec bounded(BoundDir dir, Decimal v) { return {ValueKind::Bounded, v, {}, dir, {}}; }
  static ValueSpec change(ChangeDir dir, Decimal v) { return {ValueKind::Change, v, {}, {}, dir}; }

  /// Throws Error{Validation} when a kind-specific field is missing, present
  /// on the wrong kind, or out of range.
  void validate() const;

  friend bool operator==(const ValueSpec&, const ValueSpec&) = default;
};

struct ParsedQuantity {
  ValueSpec value;       // in eV
  ValueSpec as_written;  // in the original unit
  std::string unit;      // as written, e.g. "meV"; "eV" when omitted
};

/// Classifies a quantity expression by its surface cues and normalizes it
/// to eV. Throws Error{Parse} without a usable number, Error{ExcludedQuantity}
/// for wavelength units and Error{Normalization} for other units.
ParsedQuantity parse_quantity(std::string_view expr);

/// meV/eV/keV (any case) to eV, exact in decimal.
Decimal normalize_unit(Decimal value, std::string_view unit);
double normalize_unit(double value, std::string_view unit);

bool is_energy_unit(std::string_view unit);
bool is_wavelength_unit(std::string_view unit);

/// Value part only: "0.8", "~1.13", "1.07 ± 0.02", "< 1.07", "increased by 0.3".
std::string render_value(const ValueSpec& value);
/// render_value plus " eV".
std::string render_quantity(const ValueSpec& value);

/// Trims, collapses whitespace and maps Unicode subscript digits to ASCII.
/// Qualifiers such as "H-" or "(AFM phase)" are kept verbatim.
std::string canonicalize_material(std::string_view name);

enum class PositionClass { SingleMention = 1, MultipleMention = 2, Context = 3, Table = 4, Figure = 5 };

struct RawExtraction {
  std::string paper_id;
  std::string material_text;
  std::string value_text;
  std::string unit_text;
  std::string source_sentence;

  friend bool operator==(const RawExtraction&, const RawExtraction&) = default;
};

struct PropertyRecord {
  std::string paper_id;
  std::string material;
  ValueSpec value;
  std::string unit = "eV";
  std::string source;
  std::vector<PositionClass> position_classes;  // gold only, at most two
  std::vector<ValueKind> value_classes;         // gold only, at most two

  void validate() const;
  friend bool operator==(const PropertyRecord&, const PropertyRecord&) = default;
};

/// Key used for deduplication and manual overrides: "material|render_quantity".
std::string record_key(const PropertyRecord& record);

/// Total order used before greedy matching.
bool canonical_less(const PropertyRecord& a, const PropertyRecord& b);

struct DropLog {
  std::string paper_id;
  std::string reason;  // wavelength-excluded, unparsable, unknown-unit, empty-material, duplicate
  std::string detail;

  friend bool operator==(const DropLog&, const DropLog&) = default;
};

struct CleanResult {
  std::vector<PropertyRecord> records;
  std::vector<DropLog> drops;
};

CleanResult clean_records(std::span<const RawExtraction> raw);

/// Inverse of the cleaning step for a single record (used to re-clean).
RawExtraction to_raw(const PropertyRecord& record);

/// Fixed field order: paper_id, material, kind, center, half_width,
/// bound_dir, change_dir, unit, source. Absent fields are null.
nlohmann::ordered_json to_json(const PropertyRecord& record);
PropertyRecord record_from_json(const nlohmann::ordered_json& j);

}  // namespace gapbench::quant
