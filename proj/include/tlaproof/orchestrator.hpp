#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tlaproof/llm_client.hpp"
#include "tlaproof/retrieval.hpp"
#include "tlaproof/verifier.hpp"

namespace tlaproof {

struct DepthExceeded : Error {
  using Error::Error;
};
struct DecompositionBudgetExhausted : Error {
  using Error::Error;
};
struct ParseFailureBudget : Error {
  using Error::Error;
};
struct IncompleteTree : Error {
  using Error::Error;
};

struct RunConfig {
  int max_decomposition_attempts = 10;  // per obligation
  int max_total_decomposition_attempts = 0;  // 0 = no global cap
  int max_depth = 5;                    // deepest allowed step level
  int n_candidates = 4;                 // proof candidates per LLM attempt
  int retrieval_k = 5;
  bool refinement_enabled = true;
  bool concurrent_siblings = false;

  void validate() const;
};

enum class EventKind {
  DecomposeRequested,
  DecompositionProposed,
  DecompositionChecked,
  TierAttempted,
  CandidateGenerated,
  ProofChecked,
  NodeVerified,
  BudgetExhausted,
};

std::string to_string(EventKind k);

struct RunEvent {
  std::size_t seq = 0;
  long ts_ms = 0;
  EventKind kind = EventKind::DecomposeRequested;
  std::string obligation;  // stable key: name '#' assertion hash
  std::map<std::string, std::string> fields;
};

struct RunLog {
  std::vector<RunEvent> events;

  std::string to_jsonl() const;  // "runlog/1" header + one event per line
  std::size_t count(EventKind kind, const std::string& obligation_key = "") const;
};

std::string obligation_key(const Obligation& obl);

enum class RunOutcome { Complete, Exhausted };

struct ProofResult {
  RunOutcome outcome = RunOutcome::Exhausted;
  ProofNode tree;  // Unproven root when Exhausted
  RunLog log;
};

// Returned by prove_leaf when all tiers (including every LLM candidate)
// failed and the obligation has to be decomposed instead.
struct NeedsDecomposition {
  VerificationResult last_failure;
};

// The iterative decompose / check / prove loop. One Engine instance runs one
// goal at a time; prove() resets the run log.
class Engine {
 public:
  Engine(RunConfig cfg, PromptLibrary prompts, LlmBackend& llm, Verifier& verifier,
         std::vector<CorpusRecord> corpus = {}, std::shared_ptr<const Embedder> embedder = {});

  ProofResult prove(const Obligation& goal);

  // Tries OBVIOUS, then BY AllProvers, then n_candidates retrieval-augmented
  // LLM proofs; first verified proof wins. The node carries `label`
  // (the step level doubles as the depth). Throws DepthExceeded when
  // label.level > max_depth.
  std::variant<ProofNode, NeedsDecomposition> prove_leaf(const Obligation& obl,
                                                         const StepLabel& label);

  // First proposal that passes the decomposition check; refinement prompts
  // carry the previous failure. Throws DecompositionBudgetExhausted after
  // max_decomposition_attempts failures, ParseFailureBudget when every
  // response was unparseable.
  DecompositionProposal decompose_with_retry(const Obligation& obl, int depth);

  // Renders a fully verified tree; throws IncompleteTree when any node is
  // not Verified.
  static std::string assemble(const ProofNode& tree);

  // Complete .tla module around the goal and its (verified) proof tree.
  static std::string render_goal_module(const Obligation& goal, const ProofNode& tree);

  const RunLog& log() const { return log_; }

 private:
  struct Session;

  std::optional<ProofNode> prove_obligation(const Obligation& obl, const StepLabel& label,
                                            VerificationResult* failure_out);
  std::optional<ProofNode> try_automated_tiers(const Obligation& obl, const StepLabel& label,
                                               VerificationResult* last_failure);
  std::variant<ProofNode, NeedsDecomposition> llm_leaf_attempt(const Obligation& obl,
                                                               const StepLabel& label,
                                                               VerificationResult tier_failure);
  DecompositionProposal next_accepted_proposal(Session& session);
  ReferenceSet retrieve_references(const Obligation& obl);
  void log_event(EventKind kind, const std::string& obligation,
                 std::map<std::string, std::string> fields);

  RunConfig cfg_;
  PromptLibrary prompts_;
  LlmBackend& llm_;
  Verifier& verifier_;
  std::vector<CorpusRecord> corpus_;
  std::shared_ptr<const Embedder> embedder_;

  std::mutex log_mutex_;
  RunLog log_;
  std::atomic<int> total_attempts_ = 0;
};

}  // namespace tlaproof
