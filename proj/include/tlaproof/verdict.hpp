#pragma once

#include <string>
#include <vector>

#include "tlaproof/errors.hpp"

namespace tlaproof {

enum class OverallVerdict { Proved, Failed, Timeout, ToolError };
enum class ObligationStatus { Proved, Failed, Omitted, ToolError };

std::string to_string(OverallVerdict v);
std::string to_string(ObligationStatus s);

struct ObligationReport {
  std::string location;  // step label and/or line range in the checked module
  ObligationStatus status = ObligationStatus::ToolError;
  std::string message;
};

// Per-run verdict parsed from a prover invocation. `overall` is Proved
// exactly when every reported obligation is Proved.
struct VerificationResult {
  OverallVerdict overall = OverallVerdict::ToolError;
  std::vector<ObligationReport> per_obligation;
  long duration_ms = 0;
  std::string message;  // required for Timeout and ToolError

  bool proved() const { return overall == OverallVerdict::Proved; }
  std::string failure_summary() const;
  void validate() const;
};

// Builds a result from obligation reports, deriving `overall`.
VerificationResult make_verification_result(std::vector<ObligationReport> reports,
                                            long duration_ms);

enum class ProverTier { Obvious, AllProvers, Llm };

std::string to_string(ProverTier t);
std::string tier_proof_body(ProverTier t);  // "OBVIOUS" or "BY AllProvers"

}  // namespace tlaproof
