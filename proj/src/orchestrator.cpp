#include "tlaproof/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <set>

#include <json.hpp>

#include "tlaproof/text.hpp"

using nlohmann::json;

namespace tlaproof {

void RunConfig::validate() const {
  if (max_decomposition_attempts < 1 || max_depth < 1 || n_candidates < 1 || retrieval_k < 1)
    throw ConfigurationError("all run budgets must be at least 1");
  if (max_total_decomposition_attempts < 0)
    throw ConfigurationError("global attempt cap must be 0 (off) or positive");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::DecomposeRequested: return "decompose_requested";
    case EventKind::DecompositionProposed: return "decomposition_proposed";
    case EventKind::DecompositionChecked: return "decomposition_checked";
    case EventKind::TierAttempted: return "tier_attempted";
    case EventKind::CandidateGenerated: return "candidate_generated";
    case EventKind::ProofChecked: return "proof_checked";
    case EventKind::NodeVerified: return "node_verified";
    case EventKind::BudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

std::string RunLog::to_jsonl() const {
  std::string out = json{{"version", "runlog/1"}}.dump() + "\n";
  for (const auto& e : events) {
    json j;
    j["seq"] = e.seq;
    j["ts_ms"] = e.ts_ms;
    j["kind"] = to_string(e.kind);
    j["obligation"] = e.obligation;
    j["fields"] = e.fields;
    out += j.dump() + "\n";
  }
  return out;
}

std::size_t RunLog::count(EventKind kind, const std::string& obligation_key) const {
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.kind != kind) continue;
    if (!obligation_key.empty() && e.obligation != obligation_key) continue;
    ++n;
  }
  return n;
}

std::string obligation_key(const Obligation& obl) {
  std::string name = obl.name.empty() ? "goal" : obl.name;
  return name + "#" + fnv1a64_hex(normalize_ws(obl.assertion)).substr(0, 8);
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(RunConfig cfg, PromptLibrary prompts, LlmBackend& llm, Verifier& verifier,
               std::vector<CorpusRecord> corpus, std::shared_ptr<const Embedder> embedder)
    : cfg_(cfg), prompts_(std::move(prompts)), llm_(llm), verifier_(verifier),
      corpus_(std::move(corpus)), embedder_(std::move(embedder)) {
  cfg_.validate();
  if (!corpus_.empty() && !embedder_)
    throw ConfigurationError("a corpus was supplied without an embedder");
  if (embedder_) embed_corpus(corpus_, *embedder_);
}

void Engine::log_event(EventKind kind, const std::string& obligation,
                       std::map<std::string, std::string> fields) {
  std::lock_guard lock(log_mutex_);
  RunEvent e;
  e.seq = log_.events.size();
  e.ts_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
  e.kind = kind;
  e.obligation = obligation;
  e.fields = std::move(fields);
  log_.events.push_back(std::move(e));
}

ReferenceSet Engine::retrieve_references(const Obligation& obl) {
  ReferenceSet refs;
  refs.k = static_cast<std::size_t>(cfg_.retrieval_k);
  if (corpus_.empty() || !embedder_) return refs;  // degrade to an unaugmented prompt
  return top_k(obl, corpus_, refs.k, *embedder_);
}

// ---------------------------------------------------------------------------
// Leaf proving

std::optional<ProofNode> Engine::try_automated_tiers(const Obligation& obl,
                                                     const StepLabel& label,
                                                     VerificationResult* last_failure) {
  std::string key = obligation_key(obl);
  for (ProverTier tier : {ProverTier::Obvious, ProverTier::AllProvers}) {
    VerificationResult vr = verifier_.try_tier(obl, tier);
    log_event(EventKind::TierAttempted, key,
              {{"tier", to_string(tier)}, {"verdict", to_string(vr.overall)}});
    if (vr.proved()) {
      ProofNode node;
      node.label = label;
      node.assertion = label.is_root() ? "" : normalize_ws(obl.assertion);
      node.proof_body = tier_proof_body(tier);
      node.status = NodeStatus::Verified;
      log_event(EventKind::NodeVerified, key, {{"label", label.to_string()}, {"tier", to_string(tier)}});
      return node;
    }
    if (last_failure) *last_failure = vr;
  }
  return std::nullopt;
}

std::variant<ProofNode, NeedsDecomposition> Engine::llm_leaf_attempt(
    const Obligation& obl, const StepLabel& label, VerificationResult tier_failure) {
  std::string key = obligation_key(obl);

  ReferenceSet refs = retrieve_references(obl);
  PromptText prompt = prompts_.render_proof_prompt(obl, refs);
  GenerationRequest req;
  req.prompt = prompt;
  req.n_candidates = cfg_.n_candidates;
  GenerationResult gen = llm_.generate(req);

  for (std::size_t i = 0; i < gen.candidates.size(); ++i) {
    log_event(EventKind::CandidateGenerated, key,
              {{"index", std::to_string(i)},
               {"candidate_hash", fnv1a64_hex(gen.candidates[i])}});
  }

  VerificationResult last_failure = std::move(tier_failure);
  for (std::size_t i = 0; i < gen.candidates.size(); ++i) {
    std::string body;
    try {
      body = parse_proof_response(gen.candidates[i]);
    } catch (const ResponseParseError&) {
      log_event(EventKind::ProofChecked, key,
                {{"index", std::to_string(i)}, {"verdict", "unparseable"}});
      continue;
    }
    VerificationResult vr = verifier_.check_proof(obl, body);
    log_event(EventKind::ProofChecked, key,
              {{"index", std::to_string(i)},
               {"verdict", to_string(vr.overall)},
               {"body_hash", fnv1a64_hex(body)}});
    if (vr.proved()) {
      ProofNode node;
      node.label = label;
      node.assertion = label.is_root() ? "" : normalize_ws(obl.assertion);
      node.proof_body = normalize_ws(body);
      node.status = NodeStatus::Verified;
      log_event(EventKind::NodeVerified, key, {{"label", label.to_string()}, {"tier", "llm"}});
      return node;
    }
    last_failure = vr;
  }
  return NeedsDecomposition{std::move(last_failure)};
}

std::variant<ProofNode, NeedsDecomposition> Engine::prove_leaf(const Obligation& obl,
                                                               const StepLabel& label) {
  if (label.level > cfg_.max_depth)
    throw DepthExceeded("leaf at level " + std::to_string(label.level) + " exceeds max depth " +
                        std::to_string(cfg_.max_depth));
  obl.validate();
  VerificationResult tier_failure;
  tier_failure.overall = OverallVerdict::Failed;
  if (auto node = try_automated_tiers(obl, label, &tier_failure)) return std::move(*node);
  return llm_leaf_attempt(obl, label, std::move(tier_failure));
}

// ---------------------------------------------------------------------------
// Decomposition

struct Engine::Session {
  Session(const Obligation& o, int d) : obl(o), depth(d) {}

  const Obligation& obl;
  int depth;  // level of the obligation's own node
  int attempts_used = 0;
  int parse_failures = 0;
  std::optional<DecompositionProposal> last_proposal;
  std::optional<VerificationResult> last_failure;
};

namespace {

// Rewrites proposal labels to the expected child level (and deduplicates
// names), keeping qed_clause references in sync. LLMs occasionally label
// sub-obligations at an arbitrary level; the tree invariant needs
// parent level + 1.
void normalize_proposal_labels(DecompositionProposal& proposal, int child_level) {
  std::set<std::string> seen;
  bool needs_rename = false;
  for (const auto& [label, text] : proposal.sub_obligations) {
    if (label.level != child_level || label.name.empty() || !seen.insert(label.name).second)
      needs_rename = true;
  }
  if (!needs_rename) return;

  std::vector<std::pair<std::string, std::string>> renames;
  seen.clear();
  int counter = 0;
  for (auto& [label, text] : proposal.sub_obligations) {
    StepLabel fresh;
    fresh.level = child_level;
    fresh.name = !label.name.empty() && seen.count(label.name) == 0 ? label.name
                                                                    : std::to_string(++counter);
    while (seen.count(fresh.name)) fresh.name = std::to_string(++counter);
    seen.insert(fresh.name);
    if (label.level >= 1) renames.emplace_back(label.ref(), fresh.ref());
    label = fresh;
  }
  // longest old references first, so "<1>1" cannot eat the prefix of "<1>12"
  std::stable_sort(renames.begin(), renames.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
  std::string qed = proposal.qed_clause;
  for (const auto& [from, to] : renames) qed = replace_all(qed, from, to);
  proposal.qed_clause = qed;
}

std::string indexed_name(const Obligation& parent, const StepLabel& label) {
  std::string base = parent.name.empty() ? "Goal" : parent.name;
  return base + "_" + (label.name.empty() ? std::to_string(label.level) : label.name);
}

VerificationResult branch_failure(const StepLabel& label, const Obligation& obl) {
  ObligationReport rep;
  rep.location = label.ref();
  rep.status = ObligationStatus::Failed;
  rep.message = "sub-obligation " + label.ref() + " (" + normalize_ws(obl.assertion) +
                ") could not be proved within the configured budgets";
  VerificationResult vr = make_verification_result({rep}, 0);
  return vr;
}

}  // namespace

DecompositionProposal Engine::next_accepted_proposal(Session& session) {
  std::string key = obligation_key(session.obl);
  while (session.attempts_used < cfg_.max_decomposition_attempts) {
    if (cfg_.max_total_decomposition_attempts > 0 &&
        total_attempts_ >= cfg_.max_total_decomposition_attempts)
      throw DecompositionBudgetExhausted("global decomposition attempt cap reached");

    bool refine = cfg_.refinement_enabled && session.last_failure && session.last_proposal;
    PromptText prompt = refine ? prompts_.render_refinement_prompt(
                                     session.obl, *session.last_proposal, *session.last_failure)
                               : prompts_.render_decomposition_prompt(session.obl);

    ++session.attempts_used;
    ++total_attempts_;
    log_event(EventKind::DecomposeRequested, key,
              {{"attempt", std::to_string(session.attempts_used)},
               {"refined", refine ? "true" : "false"},
               {"prompt_hash", prompt_hash(prompt.text)}});

    GenerationRequest req;
    req.prompt = prompt;
    req.n_candidates = 1;
    req.temperature = 0.0;  // single-shot; candidate sampling stays at 0.7
    GenerationResult gen = llm_.generate(req);

    DecompositionProposal proposal;
    try {
      proposal = parse_decomposition_response(gen.candidates.front(), &session.obl,
                                              session.depth + 1);
    } catch (const ResponseParseError& e) {
      ++session.parse_failures;
      log_event(EventKind::DecompositionProposed, key,
                {{"attempt", std::to_string(session.attempts_used)},
                 {"parse_error", e.what()}});
      continue;
    }
    normalize_proposal_labels(proposal, session.depth + 1);
    log_event(EventKind::DecompositionProposed, key,
              {{"attempt", std::to_string(session.attempts_used)},
               {"subs", std::to_string(proposal.sub_obligations.size())},
               {"proposal_hash", fnv1a64_hex(format_decomposition_response(proposal))}});

    VerificationResult vr = verifier_.check_decomposition(session.obl, proposal);
    log_event(EventKind::DecompositionChecked, key,
              {{"attempt", std::to_string(session.attempts_used)},
               {"verdict", to_string(vr.overall)}});
    if (vr.proved()) return proposal;

    session.last_proposal = std::move(proposal);
    session.last_failure = std::move(vr);
  }

  if (session.parse_failures == session.attempts_used && session.attempts_used > 0)
    throw ParseFailureBudget("every decomposition response was unparseable (" +
                             std::to_string(session.parse_failures) + " attempts)");
  throw DecompositionBudgetExhausted(
      "no accepted decomposition after " + std::to_string(session.attempts_used) + " attempts");
}

DecompositionProposal Engine::decompose_with_retry(const Obligation& obl, int depth) {
  if (depth >= cfg_.max_depth)
    throw DepthExceeded("cannot decompose at level " + std::to_string(depth) +
                        " with max depth " + std::to_string(cfg_.max_depth));
  obl.validate();
  Session session{obl, depth};
  return next_accepted_proposal(session);
}

// ---------------------------------------------------------------------------
// Recursive proving

std::optional<ProofNode> Engine::prove_obligation(const Obligation& obl, const StepLabel& label,
                                                  VerificationResult* failure_out) {
  std::string key = obligation_key(obl);
  bool is_goal = label.is_root();

  VerificationResult leaf_failure;
  leaf_failure.overall = OverallVerdict::Failed;
  if (is_goal) {
    // The goal takes the free automated tiers, then goes straight to
    // decomposition; LLM proof generation is reserved for sub-obligations.
    if (auto node = try_automated_tiers(obl, label, &leaf_failure)) return node;
  } else {
    auto outcome = prove_leaf(obl, label);
    if (std::holds_alternative<ProofNode>(outcome)) return std::get<ProofNode>(outcome);
    leaf_failure = std::get<NeedsDecomposition>(outcome).last_failure;
  }

  if (label.level >= cfg_.max_depth) {
    // Depth wall: the only legal move is re-decomposing the parent.
    if (failure_out) *failure_out = branch_failure(label, obl);
    return std::nullopt;
  }

  Session session{obl, label.level};
  while (true) {
    DecompositionProposal proposal;
    try {
      proposal = next_accepted_proposal(session);
    } catch (const DecompositionBudgetExhausted& e) {
      log_event(EventKind::BudgetExhausted, key,
                {{"reason", "decomposition_attempts"}, {"detail", e.what()}});
      if (failure_out) *failure_out = branch_failure(label, obl);
      return std::nullopt;
    } catch (const ParseFailureBudget& e) {
      log_event(EventKind::BudgetExhausted, key,
                {{"reason", "unparseable_responses"}, {"detail", e.what()}});
      if (failure_out) *failure_out = branch_failure(label, obl);
      return std::nullopt;
    }

    // Build child obligations: assertions from the proposal, context
    // inherited unchanged from the parent.
    std::vector<Obligation> child_obls;
    child_obls.reserve(proposal.sub_obligations.size());
    for (const auto& [child_label, assertion] : proposal.sub_obligations) {
      Obligation child;
      child.name = indexed_name(obl, child_label);
      child.assertion = assertion;
      child.definitions = obl.definitions;
      child.module_context = obl.module_context;
      child_obls.push_back(std::move(child));
    }

    std::vector<std::optional<ProofNode>> results(child_obls.size());
    std::vector<VerificationResult> child_failures(child_obls.size());
    if (cfg_.concurrent_siblings && child_obls.size() > 1) {
      std::vector<std::future<void>> tasks;
      tasks.reserve(child_obls.size());
      for (std::size_t i = 0; i < child_obls.size(); ++i) {
        tasks.push_back(std::async(std::launch::async, [this, &proposal, &child_obls, &results,
                                                        &child_failures, i] {
          results[i] = prove_obligation(child_obls[i], proposal.sub_obligations[i].first,
                                        &child_failures[i]);
        }));
      }
      for (auto& t : tasks) t.get();
    } else {
      for (std::size_t i = 0; i < child_obls.size(); ++i) {
        results[i] = prove_obligation(child_obls[i], proposal.sub_obligations[i].first,
                                      &child_failures[i]);
        if (!results[i]) break;  // re-decompose immediately
      }
    }

    std::optional<std::size_t> failed_index;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i]) {
        failed_index = i;
        break;
      }
    }
    if (!failed_index) {
      ProofNode node;
      node.label = label;
      node.assertion = is_goal ? "" : normalize_ws(obl.assertion);
      for (auto& r : results) node.children.push_back(std::move(*r));
      node.qed_clause = proposal.qed_clause;
      node.status = NodeStatus::Verified;
      log_event(EventKind::NodeVerified, key,
                {{"label", label.to_string()},
                 {"children", std::to_string(node.children.size())}});
      return node;
    }

    // A branch failed: re-decompose this obligation, charging its budget.
    session.last_proposal = std::move(proposal);
    session.last_failure = child_failures[*failed_index].per_obligation.empty()
                               ? branch_failure(session.last_proposal->sub_obligations[*failed_index].first,
                                                child_obls[*failed_index])
                               : child_failures[*failed_index];
  }
}

ProofResult Engine::prove(const Obligation& goal) {
  goal.validate();
  {
    std::lock_guard lock(log_mutex_);
    log_.events.clear();
  }
  total_attempts_ = 0;

  StepLabel root_label{0, "", false};
  ProofResult result;
  auto node = prove_obligation(goal, root_label, nullptr);
  if (node) {
    node->validate();
    result.outcome = RunOutcome::Complete;
    result.tree = std::move(*node);
  } else {
    result.outcome = RunOutcome::Exhausted;
    ProofNode root;
    root.label = root_label;
    root.status = NodeStatus::Unproven;
    result.tree = std::move(root);
  }
  result.log = log_;
  return result;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

void require_verified(const ProofNode& node) {
  if (node.status != NodeStatus::Verified)
    throw IncompleteTree("node " + node.label.to_string() + " is " + to_string(node.status));
  for (const auto& c : node.children) require_verified(c);
}

}  // namespace

std::string Engine::assemble(const ProofNode& tree) {
  require_verified(tree);
  return render_proof(tree);
}

std::string Engine::render_goal_module(const Obligation& goal, const ProofNode& tree) {
  std::string name = sanitize_module_name(goal.name, "Goal");
  std::string out = "---------------- MODULE " + name + "_proof ----------------\n";
  out += "EXTENDS ";
  bool first = true;
  bool has_tlaps = false;
  for (const auto& m : goal.module_context) {
    if (!first) out += ", ";
    out += m;
    first = false;
    if (m == "TLAPS") has_tlaps = true;
  }
  if (!has_tlaps) {
    if (!first) out += ", ";
    out += "TLAPS";
  }
  out += "\n\n";
  for (const auto& def : goal.definitions) out += def.text + "\n\n";
  out += "THEOREM " + name + " == " + normalize_ws(goal.assertion) + "\n";
  out += assemble(tree);
  out += "================================================================\n";
  return out;
}

}  // namespace tlaproof
