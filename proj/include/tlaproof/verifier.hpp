#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "tlaproof/prompts.hpp"
#include "tlaproof/verdict.hpp"

namespace tlaproof {

struct ProverNotFound : Error {
  using Error::Error;
};
struct WorkingDirError : Error {
  using Error::Error;
};
struct ModuleRenderError : Error {
  using Error::Error;
};

// One parsed obligation block from prover output.
struct ProverObligation {
  std::string location;
  ObligationStatus status = ObligationStatus::ToolError;
  std::string message;
};

// Total parse of the prover's toolbox-protocol output: every obligation
// block becomes one entry; unrecognized blocks are preserved as ToolError
// entries rather than dropped.
std::vector<ProverObligation> parse_prover_output(const std::string& raw);

// Wraps an obligation and a proof body into a self-contained module that
// EXTENDS the obligation's context plus TLAPS, with definitions inlined.
std::string render_check_module(const Obligation& obl, const std::string& proof_body,
                                const std::string& module_name);

class Verifier {
 public:
  virtual ~Verifier() = default;

  // Proof Step Check: does `proof_body` prove the obligation?
  virtual VerificationResult check_proof(const Obligation& obl,
                                         const std::string& proof_body) = 0;

  // Obligation Decomposition Check: renders the OMITTED skeleton and reports
  // Proved exactly when the QED obligation is discharged. Omitted
  // sub-obligations never count toward the verdict.
  virtual VerificationResult check_decomposition(const Obligation& obl,
                                                 const DecompositionProposal& proposal) = 0;

  // Automated tiers: check_proof with "OBVIOUS" or "BY AllProvers".
  // tier = Llm is a precondition violation.
  VerificationResult try_tier(const Obligation& obl, ProverTier tier);

  virtual std::string id() const = 0;
};

struct TlapsConfig {
  std::string executable = "tlapm";
  // Whitespace-separated argument template; {file} and {timeout} expand.
  std::string args_template = "--toolbox 0 0 --stretch 1 {file}";
  int timeout_seconds = 600;
  int max_concurrency = 2;
  bool keep_artifacts = false;
  std::string artifacts_dir;  // defaults to the system temp directory
};

// Adapter around the TLAPS proof manager. Every invocation runs in a fresh
// temporary working directory.
class TlapsVerifier : public Verifier {
 public:
  explicit TlapsVerifier(TlapsConfig config);

  VerificationResult check_proof(const Obligation& obl, const std::string& proof_body) override;
  VerificationResult check_decomposition(const Obligation& obl,
                                         const DecompositionProposal& proposal) override;
  std::string id() const override { return "tlaps:" + config_.executable; }

 private:
  VerificationResult run_on_module(const std::string& module_name, const std::string& module_text,
                                   bool decomposition_check, int qed_line);
  TlapsConfig config_;
  std::unique_ptr<std::counting_semaphore<16>> slots_;
};

// Scripted verifier for offline runs: verdicts are looked up by normalized
// obligation text (plus proof body or sub-obligation list); unknown keys get
// the default verdict (Failed unless overridden).
class MockVerifier : public Verifier {
 public:
  struct ProofRule {
    std::string assertion;  // normalized
    std::string body;       // normalized; empty matches any body
    ObligationStatus verdict = ObligationStatus::Failed;
    std::string message;
  };
  struct DecompositionRule {
    std::string assertion;              // normalized
    std::vector<std::string> subs;      // normalized; empty matches any subs
    ObligationStatus verdict = ObligationStatus::Failed;
    std::string message;
  };

  MockVerifier() = default;
  // Line-delimited rules with a "verdicts/1" header; see add_* for fields.
  static std::unique_ptr<MockVerifier> from_file(const std::string& path);
  static std::unique_ptr<MockVerifier> parse(const std::string& text);

  void add_proof_rule(ProofRule rule);
  void add_decomposition_rule(DecompositionRule rule);
  void set_default(ObligationStatus verdict, std::string message);

  VerificationResult check_proof(const Obligation& obl, const std::string& proof_body) override;
  VerificationResult check_decomposition(const Obligation& obl,
                                         const DecompositionProposal& proposal) override;
  std::string id() const override { return "mock"; }

 private:
  std::vector<ProofRule> proof_rules_;
  std::vector<DecompositionRule> decomposition_rules_;
  ObligationStatus default_verdict_ = ObligationStatus::Failed;
  std::string default_message_ = "no scripted verdict for this obligation";
};

}  // namespace tlaproof
