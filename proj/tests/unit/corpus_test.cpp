#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "gapbench/corpus.hpp"
#include "gapbench/error.hpp"

namespace fs = std::filesystem;
using namespace gapbench;
using namespace gapbench::corpus;

namespace {

std::vector<std::string> texts(const std::vector<Sentence>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(x.text);
  return out;
}

std::string collapse(std::string_view s) {
  std::string out;
  bool space = false;
  for (const char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string strip_ws(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

// Random prose built from fragments that exercise terminators, guards and
// blank lines.
std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pool = {
      "The", "band", "gap", "of", "ZnO", "is", "3.4", "eV.", "It", "Fig.", "2", "shows", "et",
      "al.", "reported", "e.g.", "A.", "Smith", "vs.", "(see", "Ref.", "12).", "Why?", "Yes!",
      "\n\n", "\n", "H-MoSe\xE2\x82\x82", "~1.13", "eV", "0.8", "(3.4", "eV)", "...", "  ", "\t"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> len(0, 60);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    out += pool[pick(rng)];
    out += ' ';
  }
  return out;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gapbench_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST(SegmentSentences, EmptyInput) { EXPECT_TRUE(segment_sentences("").empty()); }

TEST(SegmentSentences, TwoPlainTerminators) {
  const auto s = segment_sentences("A gap of 0.8 eV was found. It is direct.");
  EXPECT_EQ(texts(s), (std::vector<std::string>{"A gap of 0.8 eV was found.", "It is direct."}));
  EXPECT_EQ(s[0].index, 1u);
  EXPECT_EQ(s[1].index, 2u);
}

TEST(SegmentSentences, FigureAbbreviationIsNotATerminator) {
  EXPECT_EQ(segment_sentences("See Fig. 3 for the gap.").size(), 1u);
}

TEST(SegmentSentences, GuardListEntries) {
  EXPECT_EQ(segment_sentences("As shown by Li et al. The gap is wide.").size(), 1u);
  EXPECT_EQ(segment_sentences("Oxides, e.g. ZnO, are wide-gap materials.").size(), 1u);
  EXPECT_EQ(segment_sentences("Data from Ref. 43 agree.").size(), 1u);
  EXPECT_EQ(segment_sentences("Measured by J. Smith and K. Lee.").size(), 1u);
}

TEST(SegmentSentences, ElectronVoltAtSentenceEndStillTerminates) {
  EXPECT_EQ(segment_sentences("The gap is 0.8 eV. The film is thin.").size(), 2u);
}

TEST(SegmentSentences, DecimalPointsAndLowercaseContinuations) {
  EXPECT_EQ(segment_sentences("Values of 1.13 and 0.7 were found. then it continued.").size(), 1u);
}

TEST(SegmentSentences, BlankLinesTerminateAndCountParagraphs) {
  const auto s = segment_sentences("Band structure of SrFBiS2\n\nThe gap is 0.8 eV. It is direct.\n \nEnd");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].text, "Band structure of SrFBiS2");
  EXPECT_EQ(s[0].paragraph, 0u);
  EXPECT_EQ(s[1].paragraph, 1u);
  EXPECT_EQ(s[2].paragraph, 1u);
  EXPECT_EQ(s[3].paragraph, 2u);
}

TEST(SegmentSentences, OffsetsPointIntoRawText) {
  const std::string raw = "  First one. Second one!  Third?";
  for (const auto& s : segment_sentences(raw)) {
    EXPECT_EQ(raw.substr(s.begin, s.end - s.begin), s.text);
  }
}

TEST(SegmentSentences, PropertiesOnRandomText) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    const auto raw = random_text(rng);
    const auto s = segment_sentences(raw);
    std::string joined;
    std::string concat;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(s[i].index, i + 1);
      EXPECT_FALSE(collapse(s[i].text).empty());
      if (i) joined += ' ';
      joined += s[i].text;
      concat += s[i].text;
    }
    EXPECT_EQ(collapse(joined), collapse(raw)) << raw;
    EXPECT_EQ(strip_ws(concat), strip_ws(raw));
    EXPECT_EQ(texts(segment_sentences(raw)), texts(s));
  }
}

TEST(CountTokens, Examples) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("bandgap of 0.8 eV"), 4u);
  EXPECT_EQ(count_tokens("ZnO band gap (3.4 eV)"), 7u);
  EXPECT_EQ(count_tokens("found."), 2u);
  EXPECT_EQ(count_tokens("..."), 1u);
  EXPECT_EQ(count_tokens("H-MoSe2"), 1u);
}

TEST(CountTokens, AdditiveAcrossSpaceJoin) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 500; ++iter) {
    const auto a = random_text(rng);
    const auto b = random_text(rng);
    EXPECT_EQ(count_tokens(a + " " + b), count_tokens(a) + count_tokens(b));
  }
}

TEST(LoadCorpus, EmptyManifest) {
  const auto dir = temp_dir("empty");
  write(dir / "m.txt", "# nothing\n");
  EXPECT_TRUE(load_corpus(read_manifest(dir / "m.txt")).empty());
}

TEST(LoadCorpus, TwoEntriesInManifestOrder) {
  const auto dir = temp_dir("two");
  write(dir / "b.txt", "Second paper. Two sentences.");
  write(dir / "a.txt", "First paper.");
  write(dir / "m.txt",
        "gold: gold.tsv\n\npaper_id: p2\nvariant: publisher\npath: b.txt\n\n"
        "paper_id: p1\nvariant: arxiv\npath: a.txt\n");
  const auto manifest = read_manifest(dir / "m.txt");
  ASSERT_TRUE(manifest.gold_path);
  EXPECT_EQ(*manifest.gold_path, dir / "gold.tsv");
  const auto docs = load_corpus(manifest);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].paper_id, "p2");
  EXPECT_EQ(docs[0].variant, SourceVariant::Publisher);
  EXPECT_EQ(docs[0].sentences.size(), 2u);
  EXPECT_EQ(docs[1].paper_id, "p1");
  EXPECT_EQ(docs[1].variant, SourceVariant::Arxiv);
}

TEST(LoadCorpus, DuplicateIdIsAValidationError) {
  const auto dir = temp_dir("dup");
  write(dir / "a.txt", "x");
  write(dir / "m.txt", "paper_id: p1\npath: a.txt\n\npaper_id: p1\npath: a.txt\n");
  try {
    load_corpus(read_manifest(dir / "m.txt"));
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Validation);
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
  }
}

TEST(LoadCorpus, MissingFileNamesThePath) {
  const auto dir = temp_dir("missing");
  write(dir / "m.txt", "paper_id: p1\npath: nope.txt\n");
  try {
    load_corpus(read_manifest(dir / "m.txt"));
    FAIL() << "expected a load error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Load);
    EXPECT_NE(std::string(e.what()).find("nope.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, ManifestRoundTrip) {
  const auto dir = temp_dir("roundtrip");
  CorpusManifest m;
  m.gold_path = dir / "g.tsv";
  m.entries.push_back({"a", SourceVariant::Arxiv, dir / "a.txt"});
  m.entries.push_back({"b", SourceVariant::Other, dir / "b.txt"});
  write_manifest(m, dir / "m.txt");
  const auto back = read_manifest(dir / "m.txt");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[0].paper_id, "a");
  EXPECT_EQ(back.entries[1].variant, SourceVariant::Other);
  EXPECT_EQ(back.entries[1].path, dir / "b.txt");
}
