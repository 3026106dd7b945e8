#include "gapbench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include "resources.hpp"

namespace gapbench::corpus {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Upper-case ASCII, a digit, an opening bracket/quote or any non-ASCII lead
// byte (Greek symbols, accented names) may start a sentence.
bool starts_sentence(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isupper(u) || std::isdigit(u) || c == '(' || c == '[' || c == '"' || u >= 0x80;
}

const std::unordered_set<std::string>& guard_set() {
  static const std::unordered_set<std::string> set(abbreviation_guards().begin(),
                                                   abbreviation_guards().end());
  return set;
}

bool is_initial(std::string_view unit) {
  return unit.size() == 2 && std::isupper(static_cast<unsigned char>(unit[0])) && unit[1] == '.';
}

// The whitespace unit ending at `term_end` (exclusive), opening brackets stripped.
std::string_view unit_before(std::string_view text, std::size_t term_end) {
  std::size_t start = term_end;
  while (start > 0 && !is_space(text[start - 1])) --start;
  auto unit = text.substr(start, term_end - start);
  while (!unit.empty() && (unit.front() == '(' || unit.front() == '[')) unit.remove_prefix(1);
  return unit;
}

void push_sentence(std::string_view text, std::size_t begin, std::size_t end,
                   std::size_t paragraph, std::vector<Sentence>& out) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  if (begin == end) return;
  Sentence s;
  s.index = out.size() + 1;
  s.text = std::string(text.substr(begin, end - begin));
  s.begin = begin;
  s.end = end;
  s.paragraph = paragraph;
  out.push_back(std::move(s));
}

// A blank line is a newline followed by optional horizontal space and another newline.
std::size_t blank_line_end(std::string_view text, std::size_t pos) {
  if (text[pos] != '\n') return 0;
  std::size_t j = pos + 1;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
  if (j < text.size() && text[j] == '\n') return j + 1;
  return 0;
}

}  // namespace

const std::vector<std::string>& abbreviation_guards() {
  static const std::vector<std::string> guards = [] {
    std::vector<std::string> out;
    std::istringstream in{std::string(resources::kAbbreviations)};
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && is_space(line.back())) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      out.push_back(line);
    }
    return out;
  }();
  return guards;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  std::size_t paragraph = 0;
  bool paragraph_has_text = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (const auto after = blank_line_end(text, i); after != 0) {
      const auto before = out.size();
      push_sentence(text, start, i, paragraph, out);
      paragraph_has_text = paragraph_has_text || out.size() != before;
      // Swallow the whole run of blank lines.
      std::size_t j = after;
      while (j < text.size() && is_space(text[j])) ++j;
      if (paragraph_has_text) {
        ++paragraph;
        paragraph_has_text = false;
      }
      start = j;
      i = j;
      continue;
    }
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t term_end = i + 1;
    while (term_end < text.size() && is_terminator(text[term_end])) ++term_end;
    std::size_t close_end = term_end;
    while (close_end < text.size() && is_closer(text[close_end])) ++close_end;
    std::size_t next = close_end;
    while (next < text.size() && is_space(text[next]) && blank_line_end(text, next) == 0) ++next;
    const bool has_gap = next > close_end;
    const bool at_blank = next < text.size() && blank_line_end(text, next) != 0;
    if (!has_gap || at_blank || next >= text.size() || !starts_sentence(text[next])) {
      i = term_end;
      continue;
    }
    if (text[term_end - 1] == '.') {
      const auto unit = unit_before(text, term_end);
      if (guard_set().contains(std::string(unit)) || is_initial(unit)) {
        i = term_end;
        continue;
      }
    }
    const auto before = out.size();
    push_sentence(text, start, close_end, paragraph, out);
    paragraph_has_text = paragraph_has_text || out.size() != before;
    start = next;
    i = next;
  }
  push_sentence(text, start, text.size(), paragraph, out);
  return out;
}

std::vector<TokenSpan> tokenize(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t end = i;
    while (end < text.size() && !is_space(text[end])) ++end;

    std::size_t lead = i;
    while (lead < end && is_ascii_punct(text[lead])) ++lead;
    if (lead == end) {
      out.push_back({i, end});
    } else {
      std::size_t trail = end;
      while (trail > lead && is_ascii_punct(text[trail - 1])) --trail;
      if (lead > i) out.push_back({i, lead});
      out.push_back({lead, trail});
      if (trail < end) out.push_back({trail, end});
    }
    i = end;
  }
  return out;
}

std::size_t count_tokens(std::string_view text) { return tokenize(text).size(); }

}  // namespace gapbench::corpus
