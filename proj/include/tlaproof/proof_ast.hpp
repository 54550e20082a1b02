#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlaproof/errors.hpp"

namespace tlaproof {

struct MalformedLabel : Error {
  using Error::Error;
};
struct MissingModuleHeader : Error {
  using Error::Error;
};
struct UnbalancedProofLevels : Error {
  using Error::Error;
};
struct UnrenderableNode : Error {
  using Error::Error;
};
struct DuplicateLabel : Error {
  using Error::Error;
};
struct EmptySubs : Error {
  using Error::Error;
};

// The `<level>name` identifier prefixing a proof step. Level 0 is reserved
// for the synthetic root that wraps a theorem's top-level steps; it is never
// produced by parsing.
struct StepLabel {
  int level = 0;
  std::string name;  // digit string or identifier; usually empty on QED labels
  bool qed = false;

  bool is_root() const { return level == 0; }
  bool is_qed() const { return qed; }

  // Reference form, e.g. "<1>1", as used inside BY clauses.
  std::string ref() const;
  // Display form: "<1>1" for named labels, "<2>. QED" for QED labels.
  std::string to_string() const;

  friend bool operator==(const StepLabel&, const StepLabel&) = default;
};

// Parses a step label at the start of `text`. Accepted shapes:
//   <1>1   <3>10   <1>abc   <1>1.   <2>.   <2>. QED   <2>2. QED
// A trailing '.' is consumed; a QED keyword directly after the label is
// consumed and sets the qed flag. Throws MalformedLabel otherwise.
StepLabel parse_step_label(std::string_view text);
StepLabel parse_step_label(std::string_view text, std::size_t& consumed);

struct Definition {
  std::string name;
  std::string text;  // full definition text, "Name == ..." or "Name(args) == ..."
};

// The unit of proving: a named assertion plus the definition context it
// depends on.
struct Obligation {
  std::string name;
  std::string assertion;
  std::vector<Definition> definitions;
  std::vector<std::string> module_context;  // EXTENDS list

  void validate() const;  // nonempty assertion, unique definition names
  std::vector<std::string> definition_names() const;
};

// "The text between two step numbers": one logical step of a proof script.
struct ProofStatement {
  std::string text;
  std::optional<StepLabel> label;
  std::string source_path;
  std::string theorem;
  std::string normalized_text;
};

ProofStatement make_statement(std::string text, std::optional<StepLabel> label,
                              std::string source_path, std::string theorem);

enum class NodeStatus { Unproven, DecompositionAccepted, Verified, Failed };

std::string to_string(NodeStatus s);

// One node of a hierarchical proof. Exactly one of the following holds:
// the node carries a leaf proof body, it carries children, or it is still
// Unproven (a bare assertion). QED steps are not children; an internal
// node's closing QED is stored in qed_clause (the text after the QED
// keyword, e.g. "BY <2>1, <2>2 DEF Even").
struct ProofNode {
  StepLabel label;
  std::string assertion;  // empty on the root goal wrapper
  std::string proof_body;
  std::vector<ProofNode> children;
  std::string qed_clause;
  NodeStatus status = NodeStatus::Unproven;

  bool is_leaf() const { return children.empty(); }
  void validate() const;  // throws UnrenderableNode on invariant violations
};

// Structural equality on whitespace-normalized texts; status is ignored so
// that parse -> render -> parse comparisons are well defined.
bool structurally_equal(const ProofNode& a, const ProofNode& b);

std::size_t count_nodes(const ProofNode& root);
int tree_depth(const ProofNode& root);  // max label level over the tree

struct Theorem {
  std::string name;  // empty for unnamed THEOREM/LEMMA blocks
  std::string assertion;
  ProofNode root;
};

struct ParsedModule {
  std::string module_name;
  std::vector<std::string> extends;
  std::vector<Definition> definitions;
  std::vector<Theorem> theorems;
  std::string source_path;  // filled in by callers that read files
};

// Tolerant structural parse of a TLA+ module. Comments are stripped first;
// proof bodies that have no recognizable structure are kept as opaque text
// instead of being rejected. Throws MissingModuleHeader when no
// "---- MODULE Name ----" line exists and UnbalancedProofLevels when a step
// level skips more than one past its parent.
ParsedModule parse_module(std::string_view text);

// Parses a standalone proof script fragment (the text after a theorem
// statement) into a root wrapper node.
ProofNode parse_proof_script(std::string_view text);

// One ProofStatement per labeled step, in document order.
std::vector<ProofStatement> extract_statements(const ParsedModule& module);

// Renders a proof tree in TLAPS syntax: children indented by level, each
// internal node closed by "<l>. QED <clause>".
std::string render_proof(const ProofNode& node);

std::string render_module(const ParsedModule& module);

// Builds a complete module in which every sub-assertion is OMITTED and the
// QED step carries `qed_clause`, so a prover run checks exactly whether the
// conjunction of the sub-obligations implies the goal.
std::string make_decomposition_skeleton(
    const Obligation& obl, const std::vector<std::pair<StepLabel, std::string>>& subs,
    const std::string& qed_clause);

// Identifier-safe module name derived from an obligation name.
std::string sanitize_module_name(std::string_view name, std::string_view fallback = "Obligation");

}  // namespace tlaproof
