#pragma once

#include <string>

#include "tlaproof/orchestrator.hpp"

namespace tlaproof {

// Everything the CLI needs to wire a run together. Precedence:
// flags > environment > config file > defaults.
struct ToolConfig {
  std::string corpus_path;
  std::string template_dir = "templates";

  std::string embedder_kind = "fallback";  // fallback | remote
  std::string embedder_endpoint;
  int embedder_dimension = 256;

  std::string llm_kind = "http";  // http | replay
  std::string llm_endpoint;
  std::string llm_model = "gpt-4o";
  std::string transcript_path;
  std::string api_key;  // TLAPROOF_API_KEY

  std::string verifier_kind = "tlaps";  // tlaps | mock
  std::string tlapm_path = "tlapm";     // TLAPROOF_TLAPM
  std::string tlapm_args = "--toolbox 0 0 {file}";
  std::string verdicts_path;
  int prover_timeout_seconds = 600;
  int prover_concurrency = 2;
  bool keep_artifacts = false;

  RunConfig run;
  int verbosity = 1;
  std::string out_dir = ".";

  // Referenced paths must exist. The template directory is only required by
  // commands that render prompts.
  void validate_paths(bool need_templates = false) const;
};

// JSON config file; unknown keys are rejected.
ToolConfig load_tool_config(const std::string& path);

void apply_env_overrides(ToolConfig& cfg);

// Obligation input file: {"name": ..., "assertion": ..., "definitions":
// [{"name":..., "text":...}], "extends": [...]}.
Obligation load_obligation_file(const std::string& path);
void save_obligation_file(const Obligation& obl, const std::string& path);

// Convenience extractor: pulls a THEOREM out of a .tla module, carrying the
// module's definitions and EXTENDS list. An empty theorem name selects the
// first theorem.
Obligation obligation_from_module(const std::string& module_path,
                                  const std::string& theorem_name = "");

}  // namespace tlaproof
