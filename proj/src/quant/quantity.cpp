#include <algorithm>
#include <array>
#include <cctype>

#include "gapbench/error.hpp"
#include "gapbench/quant.hpp"

namespace gapbench::quant {

namespace {

struct Replacement {
  std::string_view from;
  std::string_view to;
};

// Unicode surface forms mapped onto the ASCII grammar below.
constexpr std::array kReplacements{
    Replacement{"\xC2\xB1", " +/- "},        // ±
    Replacement{"\xE2\x88\x92", "-"},        // minus sign
    Replacement{"\xE2\x80\x93", " -- "},     // en dash
    Replacement{"\xE2\x80\x94", " -- "},     // em dash
    Replacement{"\xE2\x88\xBC", "~"},        // tilde operator
    Replacement{"\xE2\x89\x88", "~"},        // almost equal
    Replacement{"\xEF\xBD\x9E", "~"},        // fullwidth tilde
    Replacement{"\xE2\x89\xA4", "<"},        // ≤
    Replacement{"\xE2\xA9\xBD", "<"},        // ⩽
    Replacement{"\xE2\x89\xA5", ">"},        // ≥
    Replacement{"\xE2\xA9\xBE", ">"},        // ⩾
    Replacement{"\xC2\xB5", "u"},            // micro sign
    Replacement{"\xCE\xBC", "u"},            // greek mu
    Replacement{"\xC3\x85", "angstrom"},     // Å
    Replacement{"\xC2\xA0", " "},            // nbsp
};

std::string normalize_expr(std::string_view expr) {
  std::string out;
  out.reserve(expr.size() + 8);
  std::size_t i = 0;
  while (i < expr.size()) {
    bool replaced = false;
    for (const auto& r : kReplacements) {
      if (expr.substr(i, r.from.size()) == r.from) {
        out += r.to;
        i += r.from.size();
        replaced = true;
        break;
      }
    }
    if (replaced) continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(expr[i])));
    ++i;
  }
  return out;
}

enum class TokKind { Number, Word, Symbol };

struct Token {
  TokKind kind;
  std::string text;
  Decimal number;  // Number only, sign already applied
  bool spaced_before = false;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool spaced = true;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      spaced = true;
      ++i;
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      std::size_t j = i;
      while (j < s.size() && is_digit(s[j])) ++j;
      if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
        ++j;
        while (j < s.size() && is_digit(s[j])) ++j;
      }
      std::string text(s.substr(i, j - i));
      if (text.front() == '.') text.insert(0, "0");
      Token t{TokKind::Number, text, Decimal::parse(text), spaced};
      // A '-' glued to the number is a sign unless it follows a number (a dash).
      if (!out.empty() && out.back().kind == TokKind::Symbol && out.back().text == "-" &&
          !t.spaced_before) {
        const bool after_number = out.size() >= 2 && out[out.size() - 2].kind == TokKind::Number;
        if (!after_number) {
          t.number = Decimal(-t.number.mantissa(), t.number.scale());
          t.text = "-" + t.text;
          t.spaced_before = out.back().spaced_before;
          out.pop_back();
        }
      }
      out.push_back(std::move(t));
      i = j;
      spaced = false;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({TokKind::Word, std::string(s.substr(i, j - i)), {}, spaced});
      i = j;
      spaced = false;
      continue;
    }
    std::string sym(1, c);
    std::size_t len = 1;
    for (const std::string_view multi : {"+/-", "--", "<=", ">="}) {
      if (s.substr(i, multi.size()) == multi) {
        sym = std::string(multi);
        len = multi.size();
        break;
      }
    }
    if (sym == "<=") sym = "<";
    if (sym == ">=") sym = ">";
    out.push_back({TokKind::Symbol, sym, {}, spaced});
    i += len;
    spaced = false;
  }
  return out;
}

bool is_word(const Token& t, std::string_view w) { return t.kind == TokKind::Word && t.text == w; }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool energy_word(std::string_view w) { return w == "ev" || w == "mev" || w == "kev"; }

bool wavelength_word(std::string_view w) {
  return w == "nm" || w == "um" || w == "nanometer" || w == "nanometers" || w == "nanometre" ||
         w == "nanometres" || w == "micrometer" || w == "micrometers" || w == "micron" ||
         w == "microns" || w == "angstrom" || w == "angstroms";
}

bool connective(std::string_view w) {
  static constexpr std::array<std::string_view, 24> kWords{
      "and", "or", "to", "by", "at", "in", "for", "of", "while", "with", "from", "was",
      "is", "are", "were", "respectively", "direct", "indirect", "gap", "bandgap", "band", "as",
      "which", "than"};
  return std::find(kWords.begin(), kWords.end(), w) != kWords.end();
}

// Canonical spelling of an energy unit for display.
std::string unit_display(std::string_view lower) {
  if (lower == "mev") return "meV";
  if (lower == "kev") return "keV";
  return "eV";
}

int unit_exponent(std::string_view lower) {
  if (lower == "mev") return -3;
  if (lower == "kev") return 3;
  return 0;
}

// Index of the first energy/wavelength unit word at or after `from`.
std::optional<std::size_t> find_unit(const std::vector<Token>& toks, std::size_t from) {
  for (std::size_t i = from; i < toks.size(); ++i) {
    if (toks[i].kind == TokKind::Word && (energy_word(toks[i].text) || wavelength_word(toks[i].text))) {
      return i;
    }
  }
  return std::nullopt;
}

std::string resolve_unit(const std::vector<Token>& toks, std::size_t after_number,
                         std::string_view original) {
  const auto u = find_unit(toks, after_number);
  if (u) {
    if (wavelength_word(toks[*u].text)) {
      throw Error(ErrorCode::ExcludedQuantity,
                  "wavelength quantity excluded: '" + std::string(original) + "'");
    }
    return toks[*u].text;
  }
  if (after_number < toks.size() && toks[after_number].kind == TokKind::Word &&
      !connective(toks[after_number].text) && toks[after_number].text != "zero") {
    throw Error(ErrorCode::Normalization,
                "unknown energy unit '" + toks[after_number].text + "' in '" + std::string(original) + "'");
  }
  return "ev";
}

ValueSpec scale_spec(ValueSpec v, int exponent) {
  v.center = v.center.shifted(exponent);
  if (v.half_width) v.half_width = v.half_width->shifted(exponent);
  return v;
}

ParsedQuantity finish(ValueSpec written, std::string_view unit_lower) {
  if (written.kind != ValueKind::Change && written.center.negative()) {
    throw Error(ErrorCode::Parse, "negative bandgap value: " + written.center.str());
  }
  written.validate();
  ParsedQuantity out;
  out.as_written = written;
  out.value = scale_spec(written, unit_exponent(unit_lower));
  out.unit = unit_display(unit_lower);
  return out;
}

std::optional<ChangeDir> change_stem(const std::vector<Token>& toks, std::size_t i) {
  const auto& w = toks[i].text;
  for (const std::string_view s : {"increas", "enhanc", "widen", "rais", "blueshift"}) {
    if (starts_with(w, s)) return ChangeDir::Increase;
  }
  for (const std::string_view s : {"decreas", "reduc", "narrow", "lowered", "lowering", "redshift"}) {
    if (starts_with(w, s)) return ChangeDir::Decrease;
  }
  return std::nullopt;
}

bool shift_word(const std::vector<Token>& toks, std::size_t i) {
  return starts_with(toks[i].text, "shift");
}

std::optional<ParsedQuantity> try_change(const std::vector<Token>& toks, std::string_view original) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokKind::Word) continue;
    auto dir = change_stem(toks, i);
    const bool shift = shift_word(toks, i);
    if (!dir && !shift) continue;
    if (shift && i >= 1) {
      // "red shift", "blue-shift"
      std::size_t j = i - 1;
      if (toks[j].kind == TokKind::Symbol && toks[j].text == "-" && j >= 1) --j;
      if (is_word(toks[j], "red")) dir = ChangeDir::Decrease;
      if (is_word(toks[j], "blue")) dir = ChangeDir::Increase;
    }
    for (std::size_t j = i + 1; j + 1 < toks.size(); ++j) {
      const bool link = is_word(toks[j], "by") || ((shift || starts_with(toks[i].text, "redshift") ||
                                                    starts_with(toks[i].text, "blueshift")) &&
                                                   is_word(toks[j], "of"));
      if (!link || toks[j + 1].kind != TokKind::Number) continue;
      const auto& num = toks[j + 1];
      const auto unit = resolve_unit(toks, j + 2, original);
      ChangeDir d = dir.value_or(num.number.negative() ? ChangeDir::Decrease : ChangeDir::Increase);
      if (!dir && shift && num.number.negative()) d = ChangeDir::Decrease;
      return finish(ValueSpec::change(d, num.number.abs()), unit);
    }
  }
  return std::nullopt;
}

ValueSpec dash_range(Decimal a, Decimal b) {
  const auto lo = std::min(a, b);
  const auto hi = std::max(a, b);
  if (lo == hi) return ValueSpec::fixed(lo);
  return ValueSpec::range((lo + hi).halved(), (hi - lo).halved());
}

std::optional<ParsedQuantity> try_range(const std::vector<Token>& toks, std::string_view original) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokKind::Number) continue;
    // NUM +/- NUM
    if (i + 2 < toks.size() && toks[i + 1].kind == TokKind::Symbol && toks[i + 1].text == "+/-" &&
        toks[i + 2].kind == TokKind::Number) {
      const auto unit = resolve_unit(toks, i + 3, original);
      const auto half = toks[i + 2].number.abs();
      if (half.is_zero()) return finish(ValueSpec::fixed(toks[i].number), unit);
      return finish(ValueSpec::range(toks[i].number, half), unit);
    }
    // NUM [UNIT] (-|--|to|and) NUM
    std::size_t j = i + 1;
    std::optional<std::string> first_unit;
    if (j < toks.size() && toks[j].kind == TokKind::Word &&
        (energy_word(toks[j].text) || wavelength_word(toks[j].text))) {
      first_unit = toks[j].text;
      ++j;
    }
    if (j + 1 >= toks.size() || toks[j + 1].kind != TokKind::Number) continue;
    const auto& sep = toks[j];
    const bool between = i >= 1 && is_word(toks[i - 1], "between");
    const bool dash = sep.kind == TokKind::Symbol && (sep.text == "-" || sep.text == "--");
    if (!(dash || is_word(sep, "to") || (between && is_word(sep, "and")))) continue;
    if (toks[j + 1].number.negative()) continue;
    auto unit = resolve_unit(toks, j + 2, original);
    if (first_unit && wavelength_word(*first_unit)) {
      throw Error(ErrorCode::ExcludedQuantity, "wavelength quantity excluded: '" + std::string(original) + "'");
    }
    if (first_unit && unit != *first_unit) {
      // "2.0 eV to 2300 meV": bring both ends to eV first.
      const auto a = toks[i].number.shifted(unit_exponent(*first_unit));
      const auto b = toks[j + 1].number.shifted(unit_exponent(unit));
      return finish(dash_range(a, b), "ev");
    }
    return finish(dash_range(toks[i].number, toks[j + 1].number), unit);
  }
  return std::nullopt;
}

bool contains_phrase(const std::vector<Token>& toks, std::size_t end,
                     std::initializer_list<std::string_view> words) {
  const std::size_t n = words.size();
  if (n == 0 || end < n) return false;
  for (std::size_t i = 0; i + n <= end; ++i) {
    std::size_t k = 0;
    for (const auto w : words) {
      if (!is_word(toks[i + k], w)) break;
      ++k;
    }
    if (k == n) return true;
  }
  return false;
}

bool has_symbol(const std::vector<Token>& toks, std::size_t end, std::string_view sym) {
  for (std::size_t i = 0; i < end; ++i) {
    if (toks[i].kind == TokKind::Symbol && toks[i].text == sym) return true;
  }
  return false;
}

std::optional<BoundDir> bound_cue(const std::vector<Token>& toks, std::size_t end) {
  if (contains_phrase(toks, end, {"no", "more", "than"}) || contains_phrase(toks, end, {"not", "exceeding"}) ||
      contains_phrase(toks, end, {"no", "greater", "than"})) {
    return BoundDir::Upper;
  }
  for (const auto& p : std::initializer_list<std::initializer_list<std::string_view>>{
           {"less", "than"}, {"lower", "than"}, {"smaller", "than"}, {"below"}, {"under"},
           {"up", "to"}, {"at", "most"}}) {
    if (contains_phrase(toks, end, p)) return BoundDir::Upper;
  }
  for (const auto& p : std::initializer_list<std::initializer_list<std::string_view>>{
           {"more", "than"}, {"greater", "than"}, {"larger", "than"}, {"higher", "than"},
           {"above"}, {"over"}, {"at", "least"}, {"exceeding"}, {"exceeds"}, {"exceed"},
           {"in", "excess", "of"}}) {
    if (contains_phrase(toks, end, p)) return BoundDir::Lower;
  }
  if (has_symbol(toks, end, "<")) return BoundDir::Upper;
  if (has_symbol(toks, end, ">")) return BoundDir::Lower;
  return std::nullopt;
}

bool estimate_cue(const std::vector<Token>& toks, std::size_t end) {
  if (has_symbol(toks, end, "~")) return true;
  for (const auto& p : std::initializer_list<std::initializer_list<std::string_view>>{
           {"about"}, {"approximately"}, {"approx"}, {"around"}, {"nearly"}, {"roughly"},
           {"circa"}, {"ca"}, {"almost"}, {"close", "to"}}) {
    if (contains_phrase(toks, end, p)) return true;
  }
  return false;
}

}  // namespace

bool is_energy_unit(std::string_view unit) { return energy_word(normalize_expr(unit)); }

bool is_wavelength_unit(std::string_view unit) { return wavelength_word(normalize_expr(unit)); }

ParsedQuantity parse_quantity(std::string_view expr) {
  const auto norm = normalize_expr(expr);
  const auto toks = lex(norm);

  const auto first_number = std::find_if(toks.begin(), toks.end(),
                                         [](const Token& t) { return t.kind == TokKind::Number; });
  if (first_number == toks.end()) {
    if (std::any_of(toks.begin(), toks.end(), [](const Token& t) { return is_word(t, "zero"); })) {
      const auto u = find_unit(toks, 0);
      return finish(ValueSpec::fixed(Decimal(0, 0)), u ? toks[*u].text : "ev");
    }
    throw Error(ErrorCode::Parse, "no parsable number in '" + std::string(expr) + "'");
  }

  if (auto change = try_change(toks, expr)) return *change;
  if (auto range = try_range(toks, expr)) return *range;

  // Single value: the last number before the first unit word.
  const auto unit_pos = find_unit(toks, 0);
  std::size_t value_pos = toks.size();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (unit_pos && i > *unit_pos) break;
    if (toks[i].kind == TokKind::Number) value_pos = i;
  }
  const auto unit = resolve_unit(toks, value_pos + 1, expr);
  const auto& value = toks[value_pos].number;

  if (const auto bound = bound_cue(toks, value_pos)) return finish(ValueSpec::bounded(*bound, value), unit);
  if (estimate_cue(toks, value_pos)) return finish(ValueSpec::estimated(value), unit);
  return finish(ValueSpec::fixed(value), unit);
}

Decimal normalize_unit(Decimal value, std::string_view unit) {
  const auto lower = normalize_expr(unit);
  if (energy_word(lower)) return value.shifted(unit_exponent(lower));
  if (wavelength_word(lower)) {
    throw Error(ErrorCode::ExcludedQuantity, "wavelength unit cannot be normalized to eV: " + std::string(unit));
  }
  throw Error(ErrorCode::Normalization, "unknown energy unit: '" + std::string(unit) + "'");
}

double normalize_unit(double value, std::string_view unit) {
  const auto lower = normalize_expr(unit);
  if (energy_word(lower)) {
    switch (unit_exponent(lower)) {
      case -3: return value / 1000.0;
      case 3: return value * 1000.0;
      default: return value;
    }
  }
  // Reuse the error reporting of the decimal overload.
  (void)normalize_unit(Decimal(0, 0), unit);
  return value;
}

}  // namespace gapbench::quant
