#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gapbench::corpus {

enum class SourceVariant { Arxiv, Publisher, Other };

std::string_view to_string(SourceVariant variant);
SourceVariant parse_variant(std::string_view text);

/// One segmented sentence. `begin`/`end` are byte offsets into the owning
/// document's raw text; `paragraph` counts blank-line separated blocks.
struct Sentence {
  std::size_t index = 0;  // 1-based
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t paragraph = 0;
};

struct PaperDoc {
  std::string paper_id;
  SourceVariant variant = SourceVariant::Other;
  std::string raw_text;
  std::vector<Sentence> sentences;
};

struct ManifestEntry {
  std::string paper_id;
  SourceVariant variant = SourceVariant::Other;
  std::filesystem::path path;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::optional<std::filesystem::path> gold_path;
};

/// Reads the key-value manifest format:
///
///   gold: gold.tsv
///
///   paper_id: p001
///   variant: publisher
///   path: texts/p001.txt
///
/// Blocks are separated by blank lines, `#` starts a comment line and
/// relative paths resolve against the manifest's directory.
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

/// Loads every entry in manifest order. Throws Error{Load} naming a missing
/// path and Error{Validation} naming a duplicated paper id.
std::vector<PaperDoc> load_corpus(const CorpusManifest& manifest);

PaperDoc make_doc(std::string paper_id, SourceVariant variant, std::string raw_text);

std::vector<Sentence> segment_sentences(std::string_view raw_text);

/// Tokens ending in "." that never close a sentence, one per line of the
/// shipped abbreviations resource.
const std::vector<std::string>& abbreviation_guards();

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Whitespace-delimited units, with leading and trailing ASCII punctuation
/// runs split off as their own tokens. "ZnO band gap (3.4 eV)" has 7.
std::vector<TokenSpan> tokenize(std::string_view text);
std::size_t count_tokens(std::string_view text);

}  // namespace gapbench::corpus
