#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "tlaproof/corpus.hpp"
#include "tlaproof/text.hpp"

namespace fs = std::filesystem;
using namespace tlaproof;

namespace {

const std::string kFixtures = FIXTURES_DIR;

std::vector<CorpusRecord> synthetic_records(std::size_t n, bool with_embeddings) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  const std::string words[] = {"Init", "Next", "cnt", "seq", "Cardinality", "OBVIOUS",
                               "BY", "SMT", "\\in", "Nat", "=>", "=", "+", "%"};
  std::vector<CorpusRecord> records;
  std::set<std::string> seen;
  while (records.size() < n) {
    std::string text;
    std::size_t len = 3 + rng() % 8;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += " ";
      text += words[rng() % std::size(words)];
      text += std::to_string(rng() % 100);
    }
    std::string norm = normalize_ws(text);
    if (!seen.insert(norm).second) continue;
    CorpusRecord rec;
    rec.statement = make_statement(text, StepLabel{1, "1", false}, "synthetic.tla", "Synth");
    rec.id = corpus_record_id(rec.statement.normalized_text);
    if (with_embeddings) {
      EmbeddingVector v;
      for (int d = 0; d < 8; ++d) v.values.push_back(real(rng));
      rec.embedding = v;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

TEST_CASE("build_corpus extracts the statements of the arithmetic example") {
  auto records = build_corpus({kFixtures + "/even_double.tla"}, {});
  REQUIRE(!records.empty());
  bool found = false;
  for (const auto& rec : records) {
    if (rec.statement.normalized_text.find("x + x = 2 * x OBVIOUS") != std::string::npos)
      found = true;
  }
  CHECK(found);
}

TEST_CASE("build_corpus with a total exclusion yields an empty corpus") {
  ExclusionSet exclusions = ExclusionSet::parse("even_double.tla\n");
  auto records = build_corpus({kFixtures + "/even_double.tla"}, exclusions);
  CHECK(records.empty());
}

TEST_CASE("build_corpus dedups identical statements across files") {
  CorpusBuildReport report;
  auto records =
      build_corpus({kFixtures + "/dup_a.tla", kFixtures + "/dup_b.tla"}, {}, &report);
  // both modules contribute "1 + 1 = 2 OBVIOUS" and "QED BY <1>1"
  CHECK(records.size() == 2);
  CHECK(report.duplicates_dropped == 2);

  std::set<std::string> norms;
  for (const auto& rec : records) CHECK(norms.insert(rec.statement.normalized_text).second);
}

TEST_CASE("build_corpus skips unparseable files with a warning") {
  CorpusBuildReport report;
  auto records = build_corpus({kFixtures}, {}, &report);
  CHECK(!records.empty());
  CHECK(report.files_skipped >= 1);
  bool warned = false;
  for (const auto& w : report.warnings) {
    if (w.find("unparseable.tla") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("build_corpus errors when the roots hold no .tla files") {
  fs::path empty_dir = fs::temp_directory_path() / "tlaproof_empty_corpus";
  fs::create_directories(empty_dir);
  CHECK_THROWS_AS(build_corpus({empty_dir.string()}, {}), NoInputFiles);
  fs::remove_all(empty_dir);
}

TEST_CASE("leakage invariant: excluded evaluation sources never reach the corpus") {
  ExclusionSet exclusions = ExclusionSet::load(kFixtures + "/exclusions_eval.txt");
  auto records = build_corpus({kFixtures}, exclusions);
  for (const auto& rec : records) {
    CHECK_FALSE(exclusions.matches_path(rec.statement.source_path));
    CHECK_FALSE(exclusions.matches_theorem(rec.statement.theorem));
    CHECK(rec.statement.source_path.find("even_double") == std::string::npos);
    CHECK(rec.statement.source_path.find("majority_init_bound") == std::string::npos);
  }
}

TEST_CASE("build_corpus is deterministic across runs") {
  auto a = build_corpus({kFixtures}, {});
  auto b = build_corpus({kFixtures}, {});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].statement.source_path == b[i].statement.source_path);
    CHECK(a[i].statement.normalized_text == b[i].statement.normalized_text);
  }
}

TEST_CASE("corpus ids are a deterministic function of the normalized text") {
  CHECK(corpus_record_id("QED BY <1>1") == corpus_record_id("QED BY <1>1"));
  CHECK(corpus_record_id("a") != corpus_record_id("b"));
}

TEST_CASE("empty corpus round-trips") {
  std::string text = serialize_corpus({});
  auto back = deserialize_corpus(text);
  CHECK(back.empty());
}

TEST_CASE("1000 synthetic records round-trip byte-identically, embeddings included") {
  auto records = synthetic_records(1000, true);
  std::string once = serialize_corpus(records);
  auto loaded = deserialize_corpus(once);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].id == records[i].id);
    CHECK(loaded[i].statement.text == records[i].statement.text);
    CHECK(loaded[i].statement.normalized_text == records[i].statement.normalized_text);
    CHECK(loaded[i].statement.source_path == records[i].statement.source_path);
    CHECK(loaded[i].statement.theorem == records[i].statement.theorem);
    REQUIRE(loaded[i].embedding.has_value());
    CHECK(*loaded[i].embedding == *records[i].embedding);
  }
  std::string twice = serialize_corpus(loaded);
  CHECK(once == twice);
}

TEST_CASE("load rejects corrupted and incomplete corpus files") {
  CHECK_THROWS_AS(deserialize_corpus(""), CorpusFormatError);
  CHECK_THROWS_AS(deserialize_corpus("{\"version\":\"corpus/999\"}\n"), CorpusFormatError);
  // missing required field (no "text")
  CHECK_THROWS_AS(
      deserialize_corpus("{\"version\":\"corpus/1\"}\n"
                         "{\"id\":\"abc\",\"normalized_text\":\"x\",\"source_path\":\"f\","
                         "\"theorem\":\"T\"}\n"),
      CorpusFormatError);
  // corrupted line
  CHECK_THROWS_AS(deserialize_corpus("{\"version\":\"corpus/1\"}\n{not json\n"),
                  CorpusFormatError);
}

TEST_CASE("save/load over the filesystem") {
  auto records = build_corpus({kFixtures + "/even_double.tla"}, {});
  fs::path path = fs::temp_directory_path() / "tlaproof_corpus_roundtrip.jsonl";
  save_corpus(records, path.string());
  auto loaded = load_corpus(path.string());
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].id == records[i].id);
    CHECK(loaded[i].statement.text == records[i].statement.text);
  }
  fs::remove(path);
}

TEST_CASE("exclusion patterns match paths, basenames and theorem globs") {
  ExclusionSet set = ExclusionSet::parse(
      "# comment\n"
      "specs/*_test.tla\n"
      "even_double.tla\n"
      "theorem:Init => cnt*\n");
  CHECK(set.matches_path("specs/file_test.tla"));
  CHECK(set.matches_path("/abs/path/even_double.tla"));
  CHECK_FALSE(set.matches_path("other.tla"));
  CHECK(set.matches_theorem("Init => cnt <= OccurrencesBefore(cand, i)"));
  CHECK_FALSE(set.matches_theorem("NextPreservesInv"));
}
