#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "gapbench/corpus.hpp"
#include "gapbench/error.hpp"

namespace gapbench::corpus {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Load, "cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(SourceVariant variant) {
  switch (variant) {
    case SourceVariant::Arxiv: return "arxiv";
    case SourceVariant::Publisher: return "publisher";
    case SourceVariant::Other: return "other";
  }
  return "other";
}

SourceVariant parse_variant(std::string_view text) {
  if (text == "arxiv") return SourceVariant::Arxiv;
  if (text == "publisher") return SourceVariant::Publisher;
  if (text == "other" || text.empty()) return SourceVariant::Other;
  throw Error(ErrorCode::Validation, "unknown source variant: " + std::string(text));
}

CorpusManifest read_manifest(const fs::path& path) {
  const auto text = read_file(path);
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path value(p);
    return value.is_absolute() ? value : base / value;
  };

  CorpusManifest manifest;
  std::optional<ManifestEntry> current;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current) return;
    if (current->paper_id.empty() || current->path.empty()) {
      throw Error(ErrorCode::Validation, path.string() + ": record before line " +
                                             std::to_string(line_no) + " needs paper_id and path");
    }
    manifest.entries.push_back(std::move(*current));
    current.reset();
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::Validation,
                  path.string() + ":" + std::to_string(line_no) + ": expected 'key: value'");
    }
    const auto key = trim(std::string_view(t).substr(0, colon));
    const auto value = trim(std::string_view(t).substr(colon + 1));
    if (key == "gold") {
      manifest.gold_path = resolve(value);
      continue;
    }
    if (!current) current.emplace();
    if (key == "paper_id") {
      current->paper_id = value;
    } else if (key == "variant") {
      current->variant = parse_variant(value);
    } else if (key == "path") {
      current->path = resolve(value);
    } else {
      throw Error(ErrorCode::Validation,
                  path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  flush();
  return manifest;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest: " + path.string());
  if (manifest.gold_path) out << "gold: " << manifest.gold_path->generic_string() << "\n";
  for (const auto& e : manifest.entries) {
    out << "\npaper_id: " << e.paper_id << "\nvariant: " << to_string(e.variant)
        << "\npath: " << e.path.generic_string() << "\n";
  }
}

PaperDoc make_doc(std::string paper_id, SourceVariant variant, std::string raw_text) {
  PaperDoc doc;
  doc.paper_id = std::move(paper_id);
  doc.variant = variant;
  doc.raw_text = std::move(raw_text);
  doc.sentences = segment_sentences(doc.raw_text);
  return doc;
}

std::vector<PaperDoc> load_corpus(const CorpusManifest& manifest) {
  std::unordered_set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.paper_id).second) {
      throw Error(ErrorCode::Validation, "duplicate paper_id in manifest: " + e.paper_id);
    }
  }
  for (const auto& e : manifest.entries) {
    if (!fs::exists(e.path)) {
      throw Error(ErrorCode::Load, "missing paper text for " + e.paper_id + ": " + e.path.string());
    }
  }
  std::vector<PaperDoc> docs;
  docs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    docs.push_back(make_doc(e.paper_id, e.variant, read_file(e.path)));
  }
  return docs;
}

}  // namespace gapbench::corpus
