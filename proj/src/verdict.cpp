#include "tlaproof/verdict.hpp"

namespace tlaproof {

std::string to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Proved: return "proved";
    case OverallVerdict::Failed: return "failed";
    case OverallVerdict::Timeout: return "timeout";
    case OverallVerdict::ToolError: return "tool_error";
  }
  return "unknown";
}

std::string to_string(ObligationStatus s) {
  switch (s) {
    case ObligationStatus::Proved: return "proved";
    case ObligationStatus::Failed: return "failed";
    case ObligationStatus::Omitted: return "omitted";
    case ObligationStatus::ToolError: return "tool_error";
  }
  return "unknown";
}

std::string VerificationResult::failure_summary() const {
  std::string out;
  for (const auto& rep : per_obligation) {
    if (rep.status == ObligationStatus::Proved) continue;
    if (!out.empty()) out += "\n";
    out += rep.location + ": " + to_string(rep.status);
    if (!rep.message.empty()) out += " - " + rep.message;
  }
  if (out.empty() && !message.empty()) out = message;
  return out;
}

void VerificationResult::validate() const {
  bool all_proved = true;
  for (const auto& rep : per_obligation) {
    if (rep.status != ObligationStatus::Proved) all_proved = false;
  }
  // Proved iff every obligation is Proved; Timeout/ToolError runs may have
  // no per-obligation reports at all.
  if (overall == OverallVerdict::Proved && !all_proved)
    throw Error("verdict is Proved although an obligation is not");
  if (overall == OverallVerdict::Failed && all_proved && message.empty() &&
      !per_obligation.empty())
    throw Error("verdict is Failed although every obligation is Proved");
  if ((overall == OverallVerdict::Timeout || overall == OverallVerdict::ToolError) &&
      message.empty())
    throw Error("Timeout and ToolError verdicts must carry a message");
}

VerificationResult make_verification_result(std::vector<ObligationReport> reports,
                                            long duration_ms) {
  VerificationResult result;
  result.per_obligation = std::move(reports);
  result.duration_ms = duration_ms;
  bool all_proved = true;
  for (const auto& rep : result.per_obligation) {
    if (rep.status != ObligationStatus::Proved) all_proved = false;
  }
  result.overall = all_proved ? OverallVerdict::Proved : OverallVerdict::Failed;
  return result;
}

std::string to_string(ProverTier t) {
  switch (t) {
    case ProverTier::Obvious: return "obvious";
    case ProverTier::AllProvers: return "all_provers";
    case ProverTier::Llm: return "llm";
  }
  return "unknown";
}

std::string tier_proof_body(ProverTier t) {
  switch (t) {
    case ProverTier::Obvious: return "OBVIOUS";
    case ProverTier::AllProvers: return "BY AllProvers";
    case ProverTier::Llm: break;
  }
  throw Error("no fixed proof body for the LLM tier");
}

}  // namespace tlaproof
