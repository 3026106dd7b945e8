#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "gapbench/extract.hpp"

namespace gapbench::extract {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'' || s.front() == '`') && s.back() == s.front()) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool plausible_value(std::string_view v) {
  return std::any_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }) ||
         lower(v).find("zero") != std::string::npos;
}

// "- ", "* ", "1. ", "2) " list markers.
std::string strip_bullet(std::string s) {
  static const std::regex re(R"(^(?:[-*]|\xE2\x80\xA2|\d+[.)])\s+)");
  return std::regex_replace(s, re, "", std::regex_constants::format_first_only);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<Triplet> triplet_from(const std::vector<std::string>& fields) {
  if (fields.size() < 3) return std::nullopt;
  Triplet t{strip_quotes(fields[0]), strip_quotes(fields[1]), strip_quotes(fields[2])};
  if (t.material.empty() || !plausible_value(t.value)) return std::nullopt;
  return t;
}

bool says_none(std::string_view text) {
  const auto l = lower(text);
  for (const std::string_view p : {"no band gap", "no bandgap", "no band-gap", "none", "no data", "not found",
                                   "no values", "no value", "n/a"}) {
    if (l.find(p) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

ParsedReply parse_structured_reply(std::string_view text) {
  ParsedReply out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = strip_bullet(trim(line));
    if (t.find('|') == std::string::npos) continue;
    if (t.front() == '|') t.erase(0, 1);
    if (!t.empty() && t.back() == '|') t.pop_back();
    const auto fields = split(t, '|');
    const bool separator = std::all_of(t.begin(), t.end(), [](char c) { return c == '-' || c == ':' || c == '|' || c == ' '; });
    if (separator || (!fields.empty() && lower(fields[0]) == "material")) continue;
    if (auto trip = triplet_from(fields)) {
      out.triplets.push_back(std::move(*trip));
    } else {
      out.skipped.push_back(trim(line));
    }
  }

  if (out.triplets.empty()) {
    // Bracketed fallback: [ZnO, 3.4, eV], ("ZnO", "3.4", "eV"), [["ZnO","3.4","eV"]].
    static const std::regex group(R"(\[([^\[\]]+)\]|\(([^()]+)\))");
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), group); it != std::sregex_iterator(); ++it) {
      const auto inner = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
      const auto fields = split(inner, ',');
      if (fields.size() != 3) continue;
      if (auto trip = triplet_from(fields)) out.triplets.push_back(std::move(*trip));
    }
  }
  out.explicit_none = out.triplets.empty() && says_none(text);
  return out;
}

std::string format_triplets(const std::vector<Triplet>& triplets) {
  std::string out;
  for (const auto& t : triplets) {
    if (!out.empty()) out += '\n';
    out += t.material + " | " + t.value + " | " + t.unit;
  }
  return out;
}

}  // namespace gapbench::extract
