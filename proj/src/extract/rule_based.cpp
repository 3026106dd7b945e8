#include <algorithm>
#include <array>
#include <regex>
#include <unordered_set>

#include "gapbench/error.hpp"
#include "gapbench/extract.hpp"

namespace gapbench::extract {

namespace {

const std::unordered_set<std::string>& elements() {
  static const std::unordered_set<std::string> set = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",
      "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
      "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
      "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
      "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg",
      "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
      "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
      "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  return set;
}

// Elemental semiconductors accepted without a second element or a digit.
const std::unordered_set<std::string>& elemental() {
  static const std::unordered_set<std::string> set = {"Si", "Ge", "Se", "Te", "Sn", "Bi", "Sb"};
  return set;
}

// Acronyms and numerals that happen to spell element sequences.
const std::unordered_set<std::string>& stoplist() {
  static const std::unordered_set<std::string> set = {
      "UV", "NIR", "SOC", "CB", "VB", "ON", "NO", "IN", "AS", "AT", "BE", "HE", "OF", "SO", "OH", "II",
      "III", "IV", "VI", "VII", "VIII", "IX", "XI", "CNT", "BZ"};
  return set;
}

bool is_greek_lead(unsigned char c) { return c == 0xCE || c == 0xCF; }

// Element symbols with optional (decimal) stoichiometry, e.g. "SrFBiS2", "Bi2Se3", "Cu1.8S".
bool valid_formula(std::string_view s) {
  if (s.empty() || stoplist().contains(std::string(s))) return false;
  std::size_t i = 0;
  int symbols = 0;
  bool digit = false;
  while (i < s.size()) {
    if (!std::isupper(static_cast<unsigned char>(s[i]))) return false;
    std::string sym(1, s[i]);
    if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1]))) {
      std::string two = sym + s[i + 1];
      if (elements().contains(two)) {
        sym = two;
      }
    }
    if (!elements().contains(sym)) return false;
    i += sym.size();
    ++symbols;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      if (s[i] == '.' && (i + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 1])))) return false;
      digit = true;
      ++i;
    }
  }
  return symbols >= 2 || digit || elemental().contains(std::string(s));
}

// "H", "ZT", "SO", "2H", "1T'", "α", "β2".
bool phase_prefix(std::string_view p) {
  if (p.empty() || p.size() > 6) return false;
  if (is_greek_lead(static_cast<unsigned char>(p[0]))) return true;
  static const std::regex re(R"(^(?:[0-9]?[A-Z]{1,3}|[0-9][A-Za-z]{1,2})'?$)");
  return std::regex_match(p.begin(), p.end(), re);
}

std::optional<std::string> material_from_word(std::string word) {
  while (!word.empty() && (word.back() == '-' || word.back() == '\'' || word.back() == '.')) word.pop_back();
  if (word.empty()) return std::nullopt;
  // Drop a lower-case suffix such as "-based" or "-type".
  if (const auto dash = word.rfind('-'); dash != std::string::npos && dash + 1 < word.size()) {
    const auto tail = std::string_view(word).substr(dash + 1);
    if (std::all_of(tail.begin(), tail.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); })) {
      word.resize(dash);
    }
  }
  if (valid_formula(word)) return word;
  if (const auto dash = word.find('-'); dash != std::string::npos) {
    const auto prefix = std::string_view(word).substr(0, dash);
    const auto rest = std::string_view(word).substr(dash + 1);
    if (phase_prefix(prefix) && valid_formula(rest)) return word;
  }
  return std::nullopt;
}

bool word_byte(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (std::isalnum(c) || c == '-' || c == '\'' || c == '.') return true;
  if (is_greek_lead(c)) return true;
  return c >= 0x80 && c < 0xC0 && i > 0 && is_greek_lead(static_cast<unsigned char>(s[i - 1]));
}

constexpr std::string_view kNum = R"((?:\d+(?:\.\d+)?))";
constexpr std::string_view kUnit = R"((?:meV|keV|eV)\b)";

struct Quantity {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string expr;
};

const std::vector<std::regex>& quantity_patterns() {
  static const std::vector<std::regex> patterns = [] {
    const std::string num(kNum);
    const std::string unit(kUnit);
    const auto flags = std::regex::ECMAScript | std::regex::icase;
    std::vector<std::regex> p;
    p.emplace_back("(?:(?:red|blue)[ -]?)?(?:increas|decreas|reduc|enhanc|narrow|widen|rais|lower|shift)\\w*"
                   "(?:\\s+from\\s+" + num + "\\s*" + unit + ")?\\s+(?:by|of)\\s+-?" + num + "\\s*" + unit,
                   flags);
    p.emplace_back(num + "\\s*(?:\xC2\xB1|\\+/-)\\s*" + num + "\\s*" + unit, flags);
    p.emplace_back("between\\s+" + num + "\\s*(?:" + unit + "\\s*)?and\\s+" + num + "\\s*" + unit, flags);
    p.emplace_back(num + "\\s*(?:" + unit + "\\s*)?(?:\xE2\x80\x93|\xE2\x80\x94|-|to)\\s*" + num + "\\s*" + unit,
                   flags);
    p.emplace_back("(?:(?:~|\xE2\x88\xBC|\xE2\x89\x88|<|>|\xE2\x89\xA4|\xE2\x89\xA5|about|approximately|approx\\.?|"
                   "around|nearly|roughly|less than|more than|greater than|larger than|higher than|lower than|"
                   "smaller than|below|above|at least|at most|up to|exceeding)\\s*)?" +
                       num + "\\s*" + unit,
                   flags);
    p.emplace_back("zero[ -]?(?:band[ -]?)?gaps?", flags);
    return p;
  }();
  return patterns;
}

std::vector<Quantity> find_quantities(const std::string& s) {
  std::vector<Quantity> out;
  auto overlaps = [&](std::size_t b, std::size_t e) {
    return std::any_of(out.begin(), out.end(), [&](const Quantity& q) { return b < q.end && q.begin < e; });
  };
  auto glued = [&](std::size_t b) {
    if (b == 0 || !std::isdigit(static_cast<unsigned char>(s[b]))) return false;
    const auto prev = static_cast<unsigned char>(s[b - 1]);
    return std::isalnum(prev) || prev == '.';
  };
  for (const auto& re : quantity_patterns()) {
    std::size_t start = 0;
    std::smatch m;
    while (start < s.size() &&
           std::regex_search(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(), m, re,
                             start > 0 ? std::regex_constants::match_prev_avail : std::regex_constants::match_default)) {
      const auto b = start + static_cast<std::size_t>(m.position(0));
      const auto e = b + static_cast<std::size_t>(m.length(0));
      // Digits glued to a formula ("Bi2Se3 to ...") are stoichiometry, not values.
      if (glued(b)) {
        start = b + 1;
        continue;
      }
      if (!overlaps(b, e)) out.push_back({b, e, m.str(0)});
      start = e > b ? e : b + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const Quantity& a, const Quantity& b) { return a.begin < b.begin; });
  return out;
}

const std::regex& cue_icase() {
  static const std::regex re(R"(band[ -]?gaps?|energy gaps?)", std::regex::ECMAScript | std::regex::icase);
  return re;
}

const std::regex& cue_symbol() {
  static const std::regex re(R"(\bE_?g\b)");
  return re;
}

bool has_bandgap_cue(const std::string& s) {
  return std::regex_search(s, cue_icase()) || std::regex_search(s, cue_symbol());
}

bool coordinating_gap(std::string_view gap) {
  static const std::regex re(R"(^\s*(?:,|,?\s*and|,?\s*or|&)\s*$)");
  return std::regex_match(gap.begin(), gap.end(), re);
}

// Indices of the mentions sharing a coordinated list ("A, B and C") with `pick`.
std::vector<std::size_t> coordinated(const std::string& s, const std::vector<MaterialMention>& m, std::size_t pick) {
  std::size_t lo = pick;
  std::size_t hi = pick;
  while (lo > 0 && coordinating_gap(std::string_view(s).substr(m[lo - 1].end, m[lo].begin - m[lo - 1].end))) --lo;
  while (hi + 1 < m.size() && coordinating_gap(std::string_view(s).substr(m[hi].end, m[hi + 1].begin - m[hi].end)))
    ++hi;
  std::vector<std::size_t> out;
  for (auto i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

}  // namespace

std::vector<MaterialMention> find_materials(std::string_view sentence) {
  std::vector<MaterialMention> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (!word_byte(sentence, i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < sentence.size() && word_byte(sentence, j)) ++j;
    std::size_t b = i;
    while (b < j && (sentence[b] == '-' || sentence[b] == '.' || sentence[b] == '\'')) ++b;
    if (auto m = material_from_word(std::string(sentence.substr(b, j - b)))) {
      out.push_back({b, b + m->size(), std::move(*m)});
    }
    i = j;
  }
  return out;
}

ExtractionOutput extract_rule_based(const corpus::PaperDoc& doc) {
  ExtractionOutput out;
  for (const auto& sentence : doc.sentences) {
    const auto s = quant::canonicalize_material(sentence.text);
    if (!has_bandgap_cue(s)) continue;
    const auto quantities = find_quantities(s);
    if (quantities.empty()) continue;
    const auto mentions = find_materials(s);
    if (mentions.empty()) continue;

    for (const auto& q : quantities) {
      quant::ParsedQuantity parsed;
      try {
        parsed = quant::parse_quantity(q.expr);
      } catch (const Error& e) {
        out.logs.push_back({doc.paper_id, "rule-unparsable", q.expr + ": " + e.what()});
        continue;
      }
      // Nearest preceding mention, else nearest following one.
      std::optional<std::size_t> pick;
      for (std::size_t k = 0; k < mentions.size(); ++k) {
        if (mentions[k].end <= q.begin) pick = k;
      }
      if (!pick) {
        for (std::size_t k = 0; k < mentions.size(); ++k) {
          if (mentions[k].begin >= q.end) {
            pick = k;
            break;
          }
        }
      }
      if (!pick) continue;
      for (const auto k : coordinated(s, mentions, *pick)) {
        out.records.push_back({doc.paper_id, mentions[k].text, quant::render_value(parsed.as_written),
                               parsed.unit, sentence.text});
      }
    }
  }
  return out;
}

}  // namespace gapbench::extract
