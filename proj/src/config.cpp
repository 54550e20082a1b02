#include "tlaproof/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "tlaproof/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tlaproof {

void ToolConfig::validate_paths(bool need_templates) const {
  auto require = [](const std::string& path, const char* what) {
    if (!path.empty() && !fs::exists(path))
      throw ConfigurationError(std::string(what) + " does not exist: " + path);
  };
  require(corpus_path, "corpus file");
  if (need_templates) require(template_dir, "template directory");
  require(transcript_path, "transcript file");
  require(verdicts_path, "verdict table");
}

ToolConfig load_tool_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigurationError("bad config file " + path + ": " + e.what());
  }

  static const std::set<std::string> known = {
      "corpus_path",      "template_dir",     "embedder_kind",
      "embedder_endpoint", "embedder_dimension", "llm_kind",
      "llm_endpoint",     "llm_model",        "transcript_path",
      "verifier_kind",    "tlapm_path",       "tlapm_args",
      "verdicts_path",    "prover_timeout_seconds", "prover_concurrency",
      "keep_artifacts",   "max_decomposition_attempts",
      "max_total_decomposition_attempts",     "max_depth",
      "n_candidates",     "retrieval_k",      "refinement_enabled",
      "concurrent_siblings", "verbosity",     "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigurationError("unknown config key: " + key);
  }

  ToolConfig cfg;
  auto get_str = [&j](const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  auto get_int = [&j](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  auto get_bool = [&j](const char* key, bool& out) {
    if (j.contains(key)) out = j.at(key).get<bool>();
  };

  get_str("corpus_path", cfg.corpus_path);
  get_str("template_dir", cfg.template_dir);
  get_str("embedder_kind", cfg.embedder_kind);
  get_str("embedder_endpoint", cfg.embedder_endpoint);
  get_int("embedder_dimension", cfg.embedder_dimension);
  get_str("llm_kind", cfg.llm_kind);
  get_str("llm_endpoint", cfg.llm_endpoint);
  get_str("llm_model", cfg.llm_model);
  get_str("transcript_path", cfg.transcript_path);
  get_str("verifier_kind", cfg.verifier_kind);
  get_str("tlapm_path", cfg.tlapm_path);
  get_str("tlapm_args", cfg.tlapm_args);
  get_str("verdicts_path", cfg.verdicts_path);
  get_int("prover_timeout_seconds", cfg.prover_timeout_seconds);
  get_int("prover_concurrency", cfg.prover_concurrency);
  get_bool("keep_artifacts", cfg.keep_artifacts);
  get_int("max_decomposition_attempts", cfg.run.max_decomposition_attempts);
  get_int("max_total_decomposition_attempts", cfg.run.max_total_decomposition_attempts);
  get_int("max_depth", cfg.run.max_depth);
  get_int("n_candidates", cfg.run.n_candidates);
  get_int("retrieval_k", cfg.run.retrieval_k);
  get_bool("refinement_enabled", cfg.run.refinement_enabled);
  get_bool("concurrent_siblings", cfg.run.concurrent_siblings);
  get_int("verbosity", cfg.verbosity);
  get_str("out_dir", cfg.out_dir);
  return cfg;
}

void apply_env_overrides(ToolConfig& cfg) {
  if (const char* key = std::getenv("TLAPROOF_API_KEY")) cfg.api_key = key;
  if (const char* path = std::getenv("TLAPROOF_TLAPM")) cfg.tlapm_path = path;
}

// ---------------------------------------------------------------------------
// Obligation files

Obligation load_obligation_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigurationError("bad obligation file " + path + ": " + e.what());
  }
  Obligation obl;
  try {
    obl.name = j.value("name", "Goal");
    obl.assertion = j.at("assertion").get<std::string>();
    if (j.contains("definitions")) {
      for (const auto& d : j.at("definitions")) {
        obl.definitions.push_back({d.at("name").get<std::string>(),
                                   d.at("text").get<std::string>()});
      }
    }
    if (j.contains("extends"))
      obl.module_context = j.at("extends").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigurationError("bad obligation file " + path + ": " + e.what());
  }
  obl.validate();
  return obl;
}

void save_obligation_file(const Obligation& obl, const std::string& path) {
  json j;
  j["name"] = obl.name;
  j["assertion"] = obl.assertion;
  json defs = json::array();
  for (const auto& d : obl.definitions) defs.push_back({{"name", d.name}, {"text", d.text}});
  j["definitions"] = defs;
  j["extends"] = obl.module_context;
  write_text_file(path, j.dump(2) + "\n");
}

Obligation obligation_from_module(const std::string& module_path,
                                  const std::string& theorem_name) {
  ParsedModule mod = parse_module(read_text_file(module_path));
  const Theorem* found = nullptr;
  for (const auto& thm : mod.theorems) {
    if (theorem_name.empty() || thm.name == theorem_name) {
      found = &thm;
      break;
    }
  }
  if (!found)
    throw Error("no theorem " + (theorem_name.empty() ? "at all" : "named " + theorem_name) +
                " in " + module_path);

  Obligation obl;
  obl.name = found->name.empty() ? mod.module_name + "_goal" : found->name;
  obl.assertion = found->assertion;
  obl.definitions = mod.definitions;
  obl.module_context = mod.extends;
  obl.validate();
  return obl;
}

}  // namespace tlaproof
