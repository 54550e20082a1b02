// tlaproof: generates TLAPS-checkable proofs for TLA+ proof obligations by
// decomposing them into sub-obligations, retrieving similar verified proof
// statements, and verifying every step with the TLAPS toolchain.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "tlaproof/config.hpp"
#include "tlaproof/corpus.hpp"
#include "tlaproof/llm_client.hpp"
#include "tlaproof/orchestrator.hpp"
#include "tlaproof/retrieval.hpp"
#include "tlaproof/text.hpp"
#include "tlaproof/verifier.hpp"

namespace fs = std::filesystem;
using namespace tlaproof;

namespace {

// Stable exit codes: 0 success, 1 domain failure, 2 usage error,
// 3 budget exhausted, 4 environment error.
constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;
constexpr int kExhausted = 3;
constexpr int kEnvironmentError = 4;

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  std::size_t colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::unique_ptr<Embedder> make_embedder(const ToolConfig& cfg) {
  if (cfg.embedder_kind == "fallback")
    return std::make_unique<FallbackEmbedder>(static_cast<std::size_t>(cfg.embedder_dimension));
  if (cfg.embedder_kind == "remote") {
    if (cfg.embedder_endpoint.empty())
      throw ConfigurationError("remote embedder needs an endpoint URL");
    return std::make_unique<RemoteEmbedder>(cfg.embedder_endpoint,
                                            static_cast<std::size_t>(cfg.embedder_dimension),
                                            cfg.api_key);
  }
  throw ConfigurationError("unknown embedder kind: " + cfg.embedder_kind);
}

std::unique_ptr<LlmBackend> make_llm(const ToolConfig& cfg) {
  if (cfg.llm_kind == "replay") {
    if (cfg.transcript_path.empty())
      throw ConfigurationError("replay backend needs a transcript path");
    return ReplayBackend::from_file(cfg.transcript_path);
  }
  if (cfg.llm_kind == "http") {
    HttpBackendConfig http;
    http.endpoint_url = cfg.llm_endpoint;
    http.model = cfg.llm_model;
    http.api_key = cfg.api_key;
    return std::make_unique<HttpBackend>(http);
  }
  throw ConfigurationError("unknown llm backend kind: " + cfg.llm_kind);
}

std::unique_ptr<Verifier> make_verifier(const ToolConfig& cfg) {
  if (cfg.verifier_kind == "mock") {
    if (cfg.verdicts_path.empty())
      throw ConfigurationError("mock verifier needs a verdict table path");
    return MockVerifier::from_file(cfg.verdicts_path);
  }
  if (cfg.verifier_kind == "tlaps") {
    TlapsConfig tc;
    tc.executable = cfg.tlapm_path;
    tc.args_template = cfg.tlapm_args;
    tc.timeout_seconds = cfg.prover_timeout_seconds;
    tc.max_concurrency = cfg.prover_concurrency;
    tc.keep_artifacts = cfg.keep_artifacts;
    return std::make_unique<TlapsVerifier>(tc);
  }
  throw ConfigurationError("unknown verifier kind: " + cfg.verifier_kind);
}

void apply_backend_specs(ToolConfig& cfg, const std::string& llm_spec,
                         const std::string& verifier_spec) {
  if (!llm_spec.empty()) {
    auto [kind, rest] = split_spec(llm_spec);
    cfg.llm_kind = kind;
    if (kind == "replay") cfg.transcript_path = rest;
    else if (kind == "http") cfg.llm_endpoint = rest;
  }
  if (!verifier_spec.empty()) {
    auto [kind, rest] = split_spec(verifier_spec);
    cfg.verifier_kind = kind;
    if (kind == "mock") cfg.verdicts_path = rest;
    else if (kind == "tlaps" && !rest.empty()) cfg.tlapm_path = rest;
  }
}

int classify_error(const std::exception& e) {
  if (dynamic_cast<const ConfigurationError*>(&e) || dynamic_cast<const ProverNotFound*>(&e) ||
      dynamic_cast<const BackendUnreachable*>(&e) || dynamic_cast<const BackendRejected*>(&e) ||
      dynamic_cast<const TranscriptMismatch*>(&e) ||
      dynamic_cast<const TranscriptFormatError*>(&e) ||
      dynamic_cast<const EmbedderUnavailable*>(&e) || dynamic_cast<const WorkingDirError*>(&e))
    return kEnvironmentError;
  return kDomainFailure;
}

// -------------------------------------------------------------------------
// Subcommands

int cmd_build_corpus(const ToolConfig& cfg, const std::vector<std::string>& roots,
                     const std::string& exclusions_file, const std::string& out_path,
                     bool embed) {
  ExclusionSet exclusions;
  if (!exclusions_file.empty()) exclusions = ExclusionSet::load(exclusions_file);

  CorpusBuildReport report;
  std::vector<CorpusRecord> records;
  try {
    records = build_corpus(roots, exclusions, &report);
  } catch (const NoInputFiles& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (records.empty()) std::cerr << "warning: corpus is empty\n";

  if (embed) {
    auto embedder = make_embedder(cfg);
    embed_corpus(records, *embedder);
  }
  try {
    save_corpus(records, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  std::cout << records.size() << " records written to " << out_path << " ("
            << report.files_seen << " files seen, " << report.files_skipped << " skipped, "
            << report.duplicates_dropped << " duplicates, " << report.statements_excluded
            << " excluded)\n";
  return kOk;
}

int cmd_retrieve(const ToolConfig& cfg, const std::string& query, std::size_t k) {
  if (cfg.corpus_path.empty())
    throw ConfigurationError("retrieve needs a corpus (--corpus)");
  std::vector<CorpusRecord> records = load_corpus(cfg.corpus_path);
  auto embedder = make_embedder(cfg);
  embed_corpus(records, *embedder);

  ReferenceSet refs;
  try {
    refs = top_k(query, records, k, *embedder);
  } catch (const EmptyCorpus& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  for (const auto& entry : refs.entries) {
    std::cout << std::fixed << std::setprecision(6) << entry.score << "\t"
              << entry.record.statement.source_path << "\t"
              << entry.record.statement.normalized_text << "\n";
  }
  return kOk;
}

int cmd_prove(ToolConfig cfg, const std::string& obligation_file, bool from_module,
              const std::string& theorem) {
  if (!fs::exists(obligation_file)) {
    std::cerr << "error: obligation file not found: " << obligation_file << "\n";
    return kEnvironmentError;
  }
  Obligation goal = from_module ? obligation_from_module(obligation_file, theorem)
                                : load_obligation_file(obligation_file);

  std::vector<CorpusRecord> corpus;
  std::shared_ptr<const Embedder> embedder;
  if (!cfg.corpus_path.empty()) {
    corpus = load_corpus(cfg.corpus_path);
    embedder = std::shared_ptr<const Embedder>(make_embedder(cfg).release());
  }

  PromptLibrary prompts = PromptLibrary::load(cfg.template_dir);
  auto llm = make_llm(cfg);
  auto verifier = make_verifier(cfg);

  Engine engine(cfg.run, std::move(prompts), *llm, *verifier, std::move(corpus), embedder);
  ProofResult result = engine.prove(goal);

  fs::create_directories(cfg.out_dir);
  std::string stem = sanitize_module_name(goal.name, "Goal");
  std::string log_path = (fs::path(cfg.out_dir) / (stem + "_runlog.jsonl")).string();
  write_text_file(log_path, result.log.to_jsonl());

  if (result.outcome == RunOutcome::Complete) {
    std::string module_path = (fs::path(cfg.out_dir) / (stem + "_proof.tla")).string();
    write_text_file(module_path, Engine::render_goal_module(goal, result.tree));
    std::cout << "proved " << goal.name << " (" << count_nodes(result.tree) - 1 << " steps, depth "
              << tree_depth(result.tree) << ")\n";
    std::cout << "proof:   " << module_path << "\n";
    std::cout << "run log: " << log_path << "\n";
    return kOk;
  }
  std::cout << "exhausted budgets proving " << goal.name << " ("
            << result.log.count(EventKind::DecompositionChecked) << " decomposition checks)\n";
  std::cout << "run log: " << log_path << "\n";
  return kExhausted;
}

int cmd_check(ToolConfig cfg, const std::string& obligation_file, const std::string& proof_file,
              bool from_module, const std::string& theorem) {
  for (const std::string& f : {obligation_file, proof_file}) {
    if (!fs::exists(f)) {
      std::cerr << "error: file not found: " << f << "\n";
      return kEnvironmentError;
    }
  }
  Obligation obl = from_module ? obligation_from_module(obligation_file, theorem)
                               : load_obligation_file(obligation_file);
  std::string proof_body = trim(read_text_file(proof_file));

  auto verifier = make_verifier(cfg);
  VerificationResult vr = verifier->check_proof(obl, proof_body);

  std::cout << "overall: " << to_string(vr.overall) << " (" << vr.duration_ms << " ms)\n";
  for (const auto& rep : vr.per_obligation) {
    std::string message = rep.message;
    if (std::size_t nl = message.find('\n'); nl != std::string::npos) message.resize(nl);
    std::cout << "  " << rep.location << "\t" << to_string(rep.status) << "\t" << message
              << "\n";
  }
  if (!vr.message.empty()) std::cout << "  " << vr.message << "\n";
  return vr.proved() ? kOk : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieval-augmented TLAPS proof generation"};
  app.require_subcommand(1);

  std::string config_file, corpus_path, llm_spec, verifier_spec, templates_dir, out_path;
  bool keep_artifacts = false;
  app.add_option("--config", config_file, "JSON config file");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", corpus_path, "corpus file");
    cmd->add_option("--llm", llm_spec, "LLM backend, kind:spec (replay:FILE | http:URL)");
    cmd->add_option("--verifier", verifier_spec,
                    "verifier, kind:spec (mock:FILE | tlaps[:EXE])");
    cmd->add_option("--templates", templates_dir, "prompt template directory");
    cmd->add_flag("--keep-artifacts", keep_artifacts, "keep prover working directories");
  };

  // build-corpus
  std::vector<std::string> roots;
  std::string exclusions_file, build_out;
  bool no_embed = false;
  CLI::App* build = app.add_subcommand("build-corpus", "build the proof-statement database");
  build->add_option("roots", roots, "directories or .tla files to ingest")->required();
  build->add_option("--exclusions", exclusions_file, "exclusion pattern file");
  build->add_option("--out", build_out, "output corpus file")->required();
  build->add_flag("--no-embed", no_embed, "skip the embedding pass");
  add_common(build);

  // retrieve
  std::string query;
  std::size_t k = 5;
  CLI::App* retrieve = app.add_subcommand("retrieve", "find the most similar proof statements");
  retrieve->add_option("query", query, "query text")->required();
  retrieve->add_option("--k", k, "number of results")
      ->check(CLI::PositiveNumber);
  add_common(retrieve);

  // prove
  std::string obligation_file, theorem;
  bool from_module = false;
  int candidates = -1, max_attempts = -1, max_depth = -1, flag_k = -1;
  CLI::App* prove = app.add_subcommand("prove", "search for a TLAPS proof of an obligation");
  prove->add_option("obligation", obligation_file, "obligation file (JSON, or .tla with --from-module)")
      ->required();
  prove->add_flag("--from-module", from_module, "treat the input as a TLA+ module");
  prove->add_option("--theorem", theorem, "theorem name when using --from-module");
  prove->add_option("--k", flag_k, "retrieval set size")->check(CLI::PositiveNumber);
  prove->add_option("--candidates", candidates, "proof candidates per LLM attempt")
      ->check(CLI::PositiveNumber);
  prove->add_option("--max-attempts", max_attempts, "decomposition attempts per obligation")
      ->check(CLI::PositiveNumber);
  prove->add_option("--max-depth", max_depth, "maximum proof depth")->check(CLI::PositiveNumber);
  prove->add_option("--out", out_path, "output directory");
  add_common(prove);

  // check
  std::string check_obligation, proof_file;
  bool check_from_module = false;
  std::string check_theorem;
  CLI::App* check = app.add_subcommand("check", "verify a proof against an obligation");
  check->add_option("obligation", check_obligation, "obligation file")->required();
  check->add_option("proof", proof_file, "proof body file")->required();
  check->add_flag("--from-module", check_from_module, "treat the obligation input as a module");
  check->add_option("--theorem", check_theorem, "theorem name when using --from-module");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    ToolConfig cfg;
    if (!config_file.empty()) cfg = load_tool_config(config_file);
    apply_env_overrides(cfg);
    apply_backend_specs(cfg, llm_spec, verifier_spec);
    if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
    if (!templates_dir.empty()) cfg.template_dir = templates_dir;
    if (keep_artifacts) cfg.keep_artifacts = true;
    if (!out_path.empty()) cfg.out_dir = out_path;

    if (build->parsed()) {
      cfg.validate_paths();
      return cmd_build_corpus(cfg, roots, exclusions_file, build_out, !no_embed);
    }
    if (retrieve->parsed()) {
      cfg.validate_paths();
      return cmd_retrieve(cfg, query, k);
    }
    if (prove->parsed()) {
      if (flag_k > 0) cfg.run.retrieval_k = flag_k;
      if (candidates > 0) cfg.run.n_candidates = candidates;
      if (max_attempts > 0) cfg.run.max_decomposition_attempts = max_attempts;
      if (max_depth > 0) cfg.run.max_depth = max_depth;
      cfg.validate_paths(/*need_templates=*/true);
      return cmd_prove(cfg, obligation_file, from_module, theorem);
    }
    if (check->parsed()) {
      cfg.validate_paths();
      return cmd_check(cfg, check_obligation, proof_file, check_from_module, check_theorem);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify_error(e);
  }
  return kUsageError;
}
