#include "synthetic.hpp"

#include <array>
#include <atomic>
#include <fstream>

#include <unistd.h>

namespace gapbench::testkit {

namespace fs = std::filesystem;
using quant::Decimal;
using quant::ValueSpec;

namespace {

constexpr std::array kMaterials = {"SrFBiS2", "MoSe2",  "WS2",   "GaN",     "ZnO",    "CdTe",  "In2O3",
                                   "CsPbBr3", "Bi2Se3", "TiO2",  "SnO2",    "Cu2O",   "GaAs",  "InP",
                                   "AlN",     "MgO",    "CuInSe2", "BaTiO3", "SrTiO3", "Ga2O3", "ZnS"};

constexpr std::array kSubjects = {"the sample", "this approach", "the measurement", "the film", "our model",
                                  "the spectrum", "the device", "the simulation", "the method", "the analysis"};
constexpr std::array kVerbs = {"shows", "suggests", "confirms", "requires", "improves", "reveals", "supports",
                               "describes"};
constexpr std::array kObjects = {"a stable response", "good agreement with experiment", "careful calibration",
                                 "strong absorption", "a smooth surface", "low defect density",
                                 "reliable convergence", "a clear trend"};

template <class A>
const auto& pick(std::mt19937_64& rng, const A& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

Decimal random_value(std::mt19937_64& rng, int scale) {
  const std::int64_t lo = scale == 1 ? 1 : 10;
  const std::int64_t hi = scale == 1 ? 59 : 599;
  return {std::uniform_int_distribution<std::int64_t>(lo, hi)(rng), scale};
}

struct Planted {
  std::string sentence;
  ValueSpec value;
};

Planted plant(std::mt19937_64& rng, const std::string& m, int form) {
  const auto v = random_value(rng, 1 + static_cast<int>(rng() % 2));
  switch (form) {
    case 0: return {"The band gap of " + m + " is " + v.str() + " eV.", ValueSpec::fixed(v)};
    case 1: return {"Monolayer " + m + " has an optical band gap of ~" + v.str() + " eV.", ValueSpec::estimated(v)};
    case 2: {
      const Decimal h{static_cast<std::int64_t>(1 + rng() % 9), 2};
      return {"The band gap of " + m + " was determined as " + v.str() + " \xC2\xB1 " + h.str() + " eV.",
              ValueSpec::range(v, h)};
    }
    case 3:
      return {"For " + m + " the band gap is < " + v.str() + " eV.", ValueSpec::bounded(quant::BoundDir::Upper, v)};
    case 4:
      return {"Under strain the band gap of " + m + " increased by " + v.str() + " eV.",
              ValueSpec::change(quant::ChangeDir::Increase, v)};
    default: {
      const Decimal mev{std::uniform_int_distribution<std::int64_t>(10, 990)(rng), 0};
      return {"The band gap of " + m + " is " + mev.str() + " meV.", ValueSpec::fixed(mev.shifted(-3))};
    }
  }
}

}  // namespace

std::vector<std::string> SyntheticCorpus::paper_ids() const {
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.paper_id);
  return ids;
}

std::string filler_sentence(std::mt19937_64& rng) {
  return capitalized(pick(rng, kSubjects)) + " " + pick(rng, kVerbs) + " " + pick(rng, kObjects) + ".";
}

std::string random_text(std::mt19937_64& rng, std::size_t sentences) {
  std::string text;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (i > 0) text += (rng() % 5 == 0) ? "\n\n" : " ";
    text += filler_sentence(rng);
  }
  return text;
}

SyntheticCorpus make_corpus(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  SyntheticCorpus out;
  std::vector<eval::GoldRecord> gold;
  for (std::size_t p = 0; p < options.papers; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "p%03zu", p + 1);
    const bool null_paper = p >= options.papers - std::min(options.null_papers, options.papers);
    std::string text = random_text(rng, options.filler);
    if (!null_paper) {
      const auto n = 1 + rng() % std::max<std::size_t>(1, options.max_records);
      std::vector<std::string> used;
      for (std::size_t r = 0; r < n; ++r) {
        std::string m;
        do {
          m = pick(rng, kMaterials);
        } while (std::find(used.begin(), used.end(), m) != used.end());
        used.push_back(m);
        const auto planted = plant(rng, m, static_cast<int>(rng() % 6));
        text += (rng() % 2 ? "\n\n" : " ") + planted.sentence + " " + random_text(rng, options.filler / 2 + 1);

        eval::GoldRecord g;
        g.record.paper_id = id;
        g.record.material = m;
        g.record.value = planted.value;
        g.record.source = planted.sentence;
        g.record.position_classes = {quant::PositionClass::SingleMention};
        g.record.value_classes = {planted.value.kind};
        gold.push_back(std::move(g));
      }
    }
    out.docs.push_back(corpus::make_doc(id, corpus::SourceVariant::Publisher, text));
  }
  out.gold = eval::GoldSet(std::move(gold));
  return out;
}

fs::path write_corpus(const SyntheticCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "texts");
  corpus::CorpusManifest manifest;
  for (const auto& d : corpus.docs) {
    const auto rel = fs::path("texts") / (d.paper_id + ".txt");
    std::ofstream(dir / rel, std::ios::binary) << d.raw_text;
    manifest.entries.push_back({d.paper_id, d.variant, rel});
  }
  corpus.gold.save(dir / "gold.tsv");
  manifest.gold_path = "gold.tsv";
  const auto path = dir / "manifest.txt";
  corpus::write_manifest(manifest, path);
  return path;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("gapbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace gapbench::testkit
