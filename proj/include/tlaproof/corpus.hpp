#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tlaproof/proof_ast.hpp"

namespace tlaproof {

struct NoInputFiles : Error {
  using Error::Error;
};
struct CorpusFormatError : Error {
  using Error::Error;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  bool is_zero() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct CorpusRecord {
  std::string id;  // content hash of normalized_text
  ProofStatement statement;
  std::optional<EmbeddingVector> embedding;
};

std::string corpus_record_id(const std::string& normalized_text);

// File-path globs plus theorem-name matchers. A statement is excluded when
// its source path or its theorem name matches any pattern. Path globs also
// match against the path's basename so exclusion files need not hardcode
// directory layouts.
struct ExclusionSet {
  std::vector<std::string> path_globs;
  std::vector<std::string> theorem_patterns;

  bool matches_path(const std::string& path) const;
  bool matches_theorem(const std::string& theorem) const;
  bool empty() const { return path_globs.empty() && theorem_patterns.empty(); }

  // One pattern per line; lines starting with "theorem:" match theorem
  // names, everything else is a path glob. '#' starts a comment line.
  static ExclusionSet parse(const std::string& text);
  static ExclusionSet load(const std::string& path);
};

struct CorpusBuildReport {
  std::size_t files_seen = 0;
  std::size_t files_skipped = 0;
  std::size_t statements_excluded = 0;
  std::size_t duplicates_dropped = 0;
  std::vector<std::string> warnings;
};

// Walks every .tla file under the roots (lexicographic path order), extracts
// proof statements, applies exclusions and dedups by content id. Unparseable
// files are skipped with a warning, never a failure. Throws NoInputFiles
// when the roots contain no .tla file at all.
std::vector<CorpusRecord> build_corpus(const std::vector<std::string>& root_paths,
                                       const ExclusionSet& exclusions,
                                       CorpusBuildReport* report = nullptr);

// Line-delimited records with a "corpus/1" header line. load(save(x)) == x.
void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path);
std::vector<CorpusRecord> load_corpus(const std::string& path);

std::string serialize_corpus(const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> deserialize_corpus(const std::string& text);

}  // namespace tlaproof
