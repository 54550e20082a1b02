#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlaproof/proof_ast.hpp"
#include "tlaproof/retrieval.hpp"
#include "tlaproof/verdict.hpp"

namespace tlaproof {

// Base for everything parse_decomposition_response / parse_proof_response
// can raise: arbitrary input never fails with anything outside this family.
struct ResponseParseError : Error {
  using Error::Error;
};
struct MissingSection : ResponseParseError {
  explicit MissingSection(const std::string& section)
      : ResponseParseError("response is missing the " + section + " section"), section(section) {}
  std::string section;
};
struct NoSubObligations : ResponseParseError {
  using ResponseParseError::ResponseParseError;
};
struct ObligationMismatch : ResponseParseError {
  using ResponseParseError::ResponseParseError;
};
struct EmptyProof : ResponseParseError {
  using ResponseParseError::ResponseParseError;
};
struct RefineOnSuccess : Error {
  using Error::Error;
};

enum class PromptKind {
  Decompose,
  Refine,
  ProveWithReferences,
  BaselineMinimal,
  BaselineCoT,
  BaselineToT,
  BaselineGoT,
};

enum class BaselineStyle { Minimal, CoT, ToT, GoT };

struct PromptText {
  std::string text;
  PromptKind kind = PromptKind::Decompose;
};

// A parsed decomposition answer: the echoed obligation, the model's
// reasoning, the proposed sub-obligations and the QED clause that is supposed
// to tie them back to the goal.
struct DecompositionProposal {
  std::string echoed_obligation;
  std::string reasoning;
  std::string proof_strategy;
  std::vector<std::pair<StepLabel, std::string>> sub_obligations;
  std::string qed_clause;
};

// Loads the prompt templates from a directory:
//   decompose.txt refine.txt prove.txt baseline_minimal.txt baseline_cot.txt
//   baseline_tot.txt baseline_got.txt
// Placeholders: {{obligation}} {{definitions}} {{references}} {{feedback}}
// {{failed_subs}} {{theorem}}.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::string& template_dir);

  PromptText render_decomposition_prompt(const Obligation& obl) const;
  PromptText render_refinement_prompt(const Obligation& obl, const DecompositionProposal& failed,
                                      const VerificationResult& feedback) const;
  PromptText render_proof_prompt(const Obligation& obl, const ReferenceSet& refs) const;
  PromptText render_baseline_prompt(BaselineStyle style, const std::string& theorem) const;

 private:
  std::map<std::string, std::string> templates_;
  const std::string& get(const std::string& name) const;
};

// Parses the structured decomposition response. Section headers are matched
// case-insensitively with tolerance for surrounding markdown. When `request`
// is given, the echoed obligation is checked against it (ObligationMismatch)
// and a missing QED clause is synthesized from the sub labels and the
// request's definition names. Labels missing from the response are
// synthesized at `default_level` with names 1..m.
DecompositionProposal parse_decomposition_response(const std::string& text,
                                                   const Obligation* request = nullptr,
                                                   int default_level = 1);

// Canonical response form for a proposal; parsing it back yields an equal
// proposal. Used by tests and transcript fixtures.
std::string format_decomposition_response(const DecompositionProposal& proposal);

// Strips markdown fences and commentary, returning the bare proof body.
std::string parse_proof_response(const std::string& text);

}  // namespace tlaproof
