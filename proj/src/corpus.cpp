#include "tlaproof/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "tlaproof/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tlaproof {

bool EmbeddingVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

std::string corpus_record_id(const std::string& normalized_text) {
  return fnv1a64_hex(normalized_text);
}

// ---------------------------------------------------------------------------
// ExclusionSet

bool ExclusionSet::matches_path(const std::string& path) const {
  std::string base = fs::path(path).filename().string();
  for (const auto& g : path_globs) {
    if (glob_match(g, path) || glob_match(g, base)) return true;
  }
  return false;
}

bool ExclusionSet::matches_theorem(const std::string& theorem) const {
  for (const auto& p : theorem_patterns) {
    if (glob_match(p, theorem)) return true;
  }
  return false;
}

ExclusionSet ExclusionSet::parse(const std::string& text) {
  ExclusionSet set;
  for (const auto& raw : split_lines(text)) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (starts_with(line, "theorem:")) {
      set.theorem_patterns.push_back(trim(std::string_view(line).substr(8)));
    } else {
      set.path_globs.push_back(line);
    }
  }
  return set;
}

ExclusionSet ExclusionSet::load(const std::string& path) {
  return parse(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Building

std::vector<CorpusRecord> build_corpus(const std::vector<std::string>& root_paths,
                                       const ExclusionSet& exclusions,
                                       CorpusBuildReport* report) {
  std::vector<std::string> files;
  for (const auto& root : root_paths) {
    fs::path p(root);
    if (!fs::exists(p)) throw Error("corpus root does not exist: " + root);
    if (fs::is_regular_file(p)) {
      if (p.extension() == ".tla") files.push_back(p.string());
      continue;
    }
    for (const auto& entry : fs::recursive_directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".tla")
        files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw NoInputFiles("no .tla files under the given roots");

  CorpusBuildReport local;
  CorpusBuildReport& rep = report ? *report : local;
  rep.files_seen = files.size();

  std::vector<CorpusRecord> records;
  std::set<std::string> seen_ids;
  for (const auto& file : files) {
    if (exclusions.matches_path(file)) {
      ++rep.files_skipped;
      continue;
    }
    ParsedModule mod;
    try {
      mod = parse_module(read_text_file(file));
    } catch (const Error& e) {
      ++rep.files_skipped;
      rep.warnings.push_back("skipping " + file + ": " + e.what());
      continue;
    }
    mod.source_path = file;
    for (auto& st : extract_statements(mod)) {
      if (exclusions.matches_theorem(st.theorem)) {
        ++rep.statements_excluded;
        continue;
      }
      if (st.normalized_text.empty()) continue;
      std::string id = corpus_record_id(st.normalized_text);
      if (!seen_ids.insert(id).second) {
        ++rep.duplicates_dropped;
        continue;
      }
      records.push_back(CorpusRecord{id, std::move(st), std::nullopt});
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kCorpusVersion = "corpus/1";

json record_to_json(const CorpusRecord& rec) {
  json j;
  j["id"] = rec.id;
  j["text"] = rec.statement.text;
  j["normalized_text"] = rec.statement.normalized_text;
  j["source_path"] = rec.statement.source_path;
  j["theorem"] = rec.statement.theorem;
  if (rec.statement.label) j["label"] = rec.statement.label->to_string();
  if (rec.embedding) j["embedding"] = rec.embedding->values;
  return j;
}

CorpusRecord record_from_json(const json& j) {
  for (const char* key : {"id", "text", "normalized_text", "source_path", "theorem"}) {
    if (!j.contains(key))
      throw CorpusFormatError(std::string("corpus record missing field: ") + key);
  }
  CorpusRecord rec;
  rec.id = j.at("id").get<std::string>();
  std::optional<StepLabel> label;
  if (j.contains("label")) label = parse_step_label(j.at("label").get<std::string>());
  rec.statement = make_statement(j.at("text").get<std::string>(), label,
                                 j.at("source_path").get<std::string>(),
                                 j.at("theorem").get<std::string>());
  // Stored normalized form must agree with the recomputed one.
  if (rec.statement.normalized_text != j.at("normalized_text").get<std::string>())
    throw CorpusFormatError("normalized_text does not match text for record " + rec.id);
  if (j.contains("embedding")) {
    EmbeddingVector v;
    v.values = j.at("embedding").get<std::vector<double>>();
    rec.embedding = std::move(v);
  }
  return rec;
}

}  // namespace

std::string serialize_corpus(const std::vector<CorpusRecord>& records) {
  std::string out = json{{"version", kCorpusVersion}}.dump() + "\n";
  for (const auto& rec : records) out += record_to_json(rec).dump() + "\n";
  return out;
}

std::vector<CorpusRecord> deserialize_corpus(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw CorpusFormatError("empty corpus file");
  json header;
  try {
    header = json::parse(lines[0]);
  } catch (const json::exception& e) {
    throw CorpusFormatError(std::string("bad corpus header: ") + e.what());
  }
  if (!header.contains("version") || header.at("version") != kCorpusVersion)
    throw CorpusFormatError("unsupported corpus version");

  std::vector<CorpusRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw CorpusFormatError("corrupted corpus line " + std::to_string(i + 1) + ": " + e.what());
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw CorpusFormatError("bad corpus record on line " + std::to_string(i + 1) + ": " +
                              e.what());
    }
  }
  return records;
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path) {
  write_text_file(path, serialize_corpus(records));
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
  return deserialize_corpus(read_text_file(path));
}

}  // namespace tlaproof
