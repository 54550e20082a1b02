#include "tlaproof/proof_ast.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "tlaproof/text.hpp"

namespace tlaproof {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return c == '_' || std::isalpha(static_cast<unsigned char>(c));
}
bool is_ident_cont(char c) { return is_ident_start(c) || is_digit(c); }

const char* kProofStarters[] = {"OBVIOUS", "OMITTED", "BY", "PROOF"};

// Position of the first proof-starting keyword outside any parentheses,
// or npos. Good enough for the structural layer; no expression semantics.
std::size_t find_proof_start_token(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    else if (c == '"') {
      ++i;
      while (i < s.size() && s[i] != '"') ++i;
    } else if (depth <= 0) {
      for (const char* kw : kProofStarters) {
        if (word_at(s, i, kw)) return i;
      }
    }
  }
  return std::string_view::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// StepLabel

std::string StepLabel::ref() const {
  return "<" + std::to_string(level) + ">" + name;
}

std::string StepLabel::to_string() const {
  if (qed) {
    std::string s = "<" + std::to_string(level) + ">" + name + ".";
    return s + " QED";
  }
  return ref();
}

StepLabel parse_step_label(std::string_view text, std::size_t& consumed) {
  std::size_t i = 0;
  if (i >= text.size() || text[i] != '<')
    throw MalformedLabel("step label must begin with '<': " + std::string(text.substr(0, 16)));
  ++i;
  std::size_t digits_begin = i;
  while (i < text.size() && is_digit(text[i])) ++i;
  if (i == digits_begin || i >= text.size() || text[i] != '>')
    throw MalformedLabel("expected <digits> in step label: " + std::string(text.substr(0, 16)));
  int level = std::stoi(std::string(text.substr(digits_begin, i - digits_begin)));
  if (level < 1) throw MalformedLabel("step level must be positive");
  ++i;  // past '>'

  StepLabel label;
  label.level = level;

  if (i < text.size() && (is_digit(text[i]) || is_ident_start(text[i]))) {
    std::size_t name_begin = i;
    if (is_digit(text[i])) {
      while (i < text.size() && is_digit(text[i])) ++i;
    } else {
      while (i < text.size() && is_ident_cont(text[i])) ++i;
    }
    label.name = std::string(text.substr(name_begin, i - name_begin));
    if (i < text.size() && text[i] == '.') ++i;
  } else if (i < text.size() && text[i] == '.') {
    // Anonymous "<l>." form; only QED steps use it in the supported grammar.
    ++i;
    label.qed = true;
  } else {
    throw MalformedLabel("step label needs a name, '.', or QED: " + std::string(text.substr(0, 16)));
  }

  // Consume a QED keyword directly after the label.
  std::size_t j = i;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
  if (word_at(text, j, "QED")) {
    label.qed = true;
    i = j + 3;
  }

  consumed = i;
  return label;
}

StepLabel parse_step_label(std::string_view text) {
  std::size_t consumed = 0;
  StepLabel label = parse_step_label(text, consumed);
  std::string_view rest = text.substr(consumed);
  if (!trim(rest).empty())
    throw MalformedLabel("trailing text after step label: " + std::string(text));
  return label;
}

// ---------------------------------------------------------------------------
// Obligation

void Obligation::validate() const {
  if (trim(assertion).empty()) throw Error("obligation assertion is empty");
  std::set<std::string> seen;
  for (const auto& def : definitions) {
    if (!seen.insert(def.name).second)
      throw Error("duplicate definition name: " + def.name);
  }
}

std::vector<std::string> Obligation::definition_names() const {
  std::vector<std::string> names;
  names.reserve(definitions.size());
  for (const auto& def : definitions) names.push_back(def.name);
  return names;
}

ProofStatement make_statement(std::string text, std::optional<StepLabel> label,
                              std::string source_path, std::string theorem) {
  ProofStatement st;
  st.text = std::move(text);
  st.label = std::move(label);
  st.source_path = std::move(source_path);
  st.theorem = std::move(theorem);
  st.normalized_text = normalize_ws(st.text);
  return st;
}

// ---------------------------------------------------------------------------
// ProofNode

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Unproven: return "unproven";
    case NodeStatus::DecompositionAccepted: return "decomposition_accepted";
    case NodeStatus::Verified: return "verified";
    case NodeStatus::Failed: return "failed";
  }
  return "unknown";
}

void ProofNode::validate() const {
  int arms = 0;
  if (!trim(proof_body).empty()) ++arms;
  if (!children.empty()) ++arms;
  if (status == NodeStatus::Unproven) ++arms;
  if (arms != 1)
    throw UnrenderableNode("node " + label.to_string() +
                           " must have exactly one of: proof body, children, Unproven status");
  for (const auto& child : children) {
    if (child.label.level != label.level + 1)
      throw UnrenderableNode("child " + child.label.to_string() + " of " + label.to_string() +
                             " is not one level deeper");
    child.validate();
  }
}

bool structurally_equal(const ProofNode& a, const ProofNode& b) {
  if (a.label != b.label) return false;
  if (normalize_ws(a.assertion) != normalize_ws(b.assertion)) return false;
  if (normalize_ws(a.proof_body) != normalize_ws(b.proof_body)) return false;
  if (normalize_ws(a.qed_clause) != normalize_ws(b.qed_clause)) return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

std::size_t count_nodes(const ProofNode& root) {
  std::size_t n = 1;
  for (const auto& c : root.children) n += count_nodes(c);
  return n;
}

int tree_depth(const ProofNode& root) {
  int depth = root.label.level;
  for (const auto& c : root.children) depth = std::max(depth, tree_depth(c));
  return depth;
}

// ---------------------------------------------------------------------------
// Comment stripping

namespace {

// Removes \* line comments and (possibly nested) (* *) block comments,
// leaving string literals intact. Newlines inside block comments are kept so
// line structure survives.
std::string strip_comments(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '"') {
      out.push_back(c);
      ++i;
      while (i < s.size() && s[i] != '"') {
        out.push_back(s[i]);
        ++i;
      }
      if (i < s.size()) {
        out.push_back('"');
        ++i;
      }
    } else if (c == '\\' && i + 1 < s.size() && s[i + 1] == '*') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '(' && i + 1 < s.size() && s[i + 1] == '*') {
      int depth = 1;
      i += 2;
      while (i < s.size() && depth > 0) {
        if (s[i] == '(' && i + 1 < s.size() && s[i + 1] == '*') {
          ++depth;
          i += 2;
        } else if (s[i] == '*' && i + 1 < s.size() && s[i + 1] == ')') {
          --depth;
          i += 2;
        } else {
          if (s[i] == '\n') out.push_back('\n');
          ++i;
        }
      }
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

bool is_dash_separator(std::string_view line) {
  std::string t = trim(line);
  if (t.size() < 4) return false;
  return t.find_first_not_of('-') == std::string::npos;
}

bool is_module_end(std::string_view line) {
  std::string t = trim(line);
  if (t.size() < 4) return false;
  return t.find_first_not_of('=') == std::string::npos;
}

bool is_label_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != '<') return false;
  std::size_t j = i + 1;
  while (j < line.size() && is_digit(line[j])) ++j;
  return j > i + 1 && j < line.size() && line[j] == '>';
}

// Identifier definition at the start of a line: "Name ==" or "Name(args) ==".
bool is_definition_line(std::string_view line, std::string* name_out = nullptr) {
  std::size_t i = 0;
  if (i >= line.size() || !is_ident_start(line[i])) return false;
  std::size_t name_begin = i;
  while (i < line.size() && is_ident_cont(line[i])) ++i;
  std::string name(line.substr(name_begin, i - name_begin));
  if (i < line.size() && line[i] == '(') {
    int depth = 1;
    ++i;
    while (i < line.size() && depth > 0) {
      if (line[i] == '(') ++depth;
      if (line[i] == ')') --depth;
      ++i;
    }
  }
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i + 1 < line.size() && line[i] == '=' && line[i + 1] == '=') {
    if (name_out) *name_out = name;
    return true;
  }
  return false;
}

bool is_theorem_line(std::string_view line) {
  for (const char* kw : {"THEOREM", "LEMMA", "PROPOSITION", "COROLLARY"}) {
    if (word_at(line, 0, kw)) return true;
  }
  return false;
}

bool is_top_level_construct(std::string_view line) {
  if (line.empty()) return false;
  if (line[0] == ' ' || line[0] == '\t') return false;
  if (is_theorem_line(line)) return true;
  if (is_definition_line(line)) return true;
  if (is_dash_separator(line) || is_module_end(line)) return true;
  for (const char* kw :
       {"EXTENDS", "CONSTANT", "CONSTANTS", "VARIABLE", "VARIABLES", "ASSUME", "ASSUMPTION",
        "AXIOM", "INSTANCE", "LOCAL", "RECURSIVE", "USE", "HIDE"}) {
    if (word_at(line, 0, kw)) return true;
  }
  return false;
}

struct RawStep {
  StepLabel label;
  std::string text;  // everything after the label up to the next label line
};

std::vector<RawStep> scan_steps(const std::vector<std::string>& lines) {
  std::vector<RawStep> steps;
  auto append_continuation = [&steps](const std::string& line) {
    std::string t = trim(line);
    if (t.empty() || steps.empty()) return;
    if (!steps.back().text.empty()) steps.back().text += "\n";
    steps.back().text += t;
  };
  for (const auto& line : lines) {
    if (is_label_line(line)) {
      std::size_t indent = line.find('<');
      std::string_view rest = std::string_view(line).substr(indent);
      std::size_t consumed = 0;
      try {
        StepLabel label = parse_step_label(rest, consumed);
        steps.push_back({label, std::string(trim(rest.substr(consumed)))});
        continue;
      } catch (const MalformedLabel&) {
        append_continuation(line);  // looked like a label, was not one
        continue;
      }
    }
    if (!steps.empty()) {
      append_continuation(line);
    }
    // text before the first label belongs to the theorem assertion, handled
    // by the caller
  }
  return steps;
}

// Splits leaf step text into assertion and proof body. Steps without a
// recognizable proof terminator keep everything as assertion (opaque,
// Unproven).
void split_assertion_body(const std::string& text, std::string* assertion, std::string* body) {
  std::size_t pos = find_proof_start_token(text);
  if (pos == std::string::npos) {
    *assertion = trim(text);
    body->clear();
    return;
  }
  *assertion = trim(std::string_view(text).substr(0, pos));
  std::string rest = trim(std::string_view(text).substr(pos));
  if (word_at(rest, 0, "PROOF")) rest = trim(std::string_view(rest).substr(5));
  *body = rest;
}

ProofNode make_parsed_node(const StepLabel& label, std::string assertion, std::string body,
                           std::vector<ProofNode> children, std::string qed_clause) {
  ProofNode node;
  node.label = label;
  node.assertion = std::move(assertion);
  node.proof_body = std::move(body);
  node.children = std::move(children);
  node.qed_clause = std::move(qed_clause);
  // Structure present means the source carried a proof for this step. Bare
  // assertions stay Unproven.
  node.status = (!trim(node.proof_body).empty() || !node.children.empty())
                    ? NodeStatus::Verified
                    : NodeStatus::Unproven;
  return node;
}

// Builds the children of one level; stops at the level's QED or at a
// shallower label. `idx` advances past everything consumed.
std::pair<std::vector<ProofNode>, std::string> parse_level(const std::vector<RawStep>& steps,
                                                           std::size_t& idx, int level) {
  std::vector<ProofNode> children;
  std::string qed_clause;
  while (idx < steps.size()) {
    const RawStep& step = steps[idx];
    if (step.label.level < level) break;
    if (step.label.level > level)
      throw UnbalancedProofLevels("step " + step.label.to_string() + " skips past level " +
                                  std::to_string(level));
    if (step.label.is_qed()) {
      std::string clause = step.text;
      if (word_at(clause, 0, "QED")) clause = trim(std::string_view(clause).substr(3));
      qed_clause = normalize_ws(clause);
      ++idx;
      break;
    }
    ++idx;
    if (idx < steps.size() && steps[idx].label.level > level) {
      if (steps[idx].label.level != level + 1)
        throw UnbalancedProofLevels("step " + steps[idx].label.to_string() +
                                    " skips more than one level past " + step.label.to_string());
      auto [sub_children, sub_qed] = parse_level(steps, idx, level + 1);
      children.push_back(make_parsed_node(step.label, normalize_ws(step.text), "",
                                          std::move(sub_children), sub_qed));
    } else {
      std::string assertion, body;
      split_assertion_body(step.text, &assertion, &body);
      children.push_back(
          make_parsed_node(step.label, normalize_ws(assertion), normalize_ws(body), {}, ""));
    }
  }
  return {std::move(children), std::move(qed_clause)};
}

ProofNode parse_structured_proof(const std::vector<RawStep>& steps) {
  int base_level = steps.front().label.level;
  ProofNode root;
  root.label = StepLabel{base_level - 1, "", false};
  std::size_t idx = 0;
  auto [children, qed_clause] = parse_level(steps, idx, base_level);
  if (idx < steps.size())
    throw UnbalancedProofLevels("step " + steps[idx].label.to_string() +
                                " appears after its level was closed");
  root.children = std::move(children);
  root.qed_clause = qed_clause;
  root.status = root.children.empty() ? NodeStatus::Unproven : NodeStatus::Verified;
  return root;
}

}  // namespace

ProofNode parse_proof_script(std::string_view text) {
  std::vector<std::string> lines = split_lines(strip_comments(text));
  std::vector<RawStep> steps = scan_steps(lines);
  if (!steps.empty()) return parse_structured_proof(steps);

  ProofNode root;
  root.label = StepLabel{0, "", false};
  std::string body = trim(text);
  if (word_at(body, 0, "PROOF")) body = trim(std::string_view(body).substr(5));
  root.proof_body = normalize_ws(body);
  root.status = root.proof_body.empty() ? NodeStatus::Unproven : NodeStatus::Verified;
  return root;
}

// ---------------------------------------------------------------------------
// Module parsing

namespace {

Theorem parse_theorem_block(const std::vector<std::string>& lines) {
  // lines[0] starts with the THEOREM/LEMMA keyword.
  std::string first = lines[0];
  std::size_t kw_end = first.find_first_of(" \t");
  if (kw_end == std::string::npos) kw_end = first.size();
  std::string after_kw = trim(std::string_view(first).substr(kw_end));

  Theorem thm;
  std::string name;
  if (is_definition_line(after_kw, &name)) {
    thm.name = name;
    std::size_t eq = after_kw.find("==");
    after_kw = trim(std::string_view(after_kw).substr(eq + 2));
  }

  // Statement text runs until the first label line or proof keyword.
  std::string head = after_kw;
  std::vector<std::string> proof_lines;
  std::size_t i = 1;
  for (; i < lines.size(); ++i) {
    if (is_label_line(lines[i])) break;
    std::string t = trim(lines[i]);
    if (t.empty()) continue;
    if (!head.empty()) head += "\n";
    head += t;
  }
  for (; i < lines.size(); ++i) proof_lines.push_back(lines[i]);

  std::string assertion, inline_body;
  split_assertion_body(head, &assertion, &inline_body);
  thm.assertion = normalize_ws(assertion);

  if (!proof_lines.empty()) {
    std::string proof_text;
    for (const auto& l : proof_lines) proof_text += l + "\n";
    thm.root = parse_proof_script(proof_text);
  } else {
    ProofNode root;
    root.label = StepLabel{0, "", false};
    root.proof_body = normalize_ws(inline_body);
    root.status = root.proof_body.empty() ? NodeStatus::Unproven : NodeStatus::Verified;
    thm.root = root;
  }
  return thm;
}

}  // namespace

ParsedModule parse_module(std::string_view text) {
  std::string clean = strip_comments(text);
  std::vector<std::string> lines = split_lines(clean);

  ParsedModule mod;
  std::size_t i = 0;
  bool header_found = false;
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::size_t pos = line.find("MODULE");
    if (pos == std::string::npos) continue;
    std::string before = trim(std::string_view(line).substr(0, pos));
    if (before.empty() || before.find_first_not_of('-') != std::string::npos) continue;
    if (before.size() < 4) continue;
    std::string rest = trim(std::string_view(line).substr(pos + 6));
    std::size_t name_end = 0;
    while (name_end < rest.size() && is_ident_cont(rest[name_end])) ++name_end;
    if (name_end == 0) continue;
    mod.module_name = rest.substr(0, name_end);
    header_found = true;
    ++i;
    break;
  }
  if (!header_found) throw MissingModuleHeader("no '---- MODULE Name ----' header found");

  while (i < lines.size()) {
    const std::string& line = lines[i];
    std::string t = trim(line);
    if (t.empty() || is_dash_separator(line)) {
      ++i;
      continue;
    }
    if (is_module_end(line)) break;

    if (word_at(line, 0, "EXTENDS")) {
      std::string list = trim(std::string_view(line).substr(7));
      std::stringstream ss(list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::string name = trim(item);
        if (!name.empty()) mod.extends.push_back(name);
      }
      ++i;
      continue;
    }

    if (is_theorem_line(line)) {
      std::vector<std::string> block;
      block.push_back(line);
      ++i;
      while (i < lines.size() && !is_top_level_construct(lines[i])) {
        block.push_back(lines[i]);
        ++i;
      }
      mod.theorems.push_back(parse_theorem_block(block));
      continue;
    }

    std::string def_name;
    if (is_definition_line(line, &def_name)) {
      std::string def_text = line;
      ++i;
      while (i < lines.size() && !is_top_level_construct(lines[i])) {
        if (!trim(lines[i]).empty()) def_text += "\n" + lines[i];
        ++i;
      }
      mod.definitions.push_back({def_name, trim(def_text)});
      continue;
    }

    // CONSTANT/VARIABLES/ASSUME/... and anything unrecognized: skip the line.
    ++i;
  }
  return mod;
}

// ---------------------------------------------------------------------------
// Statement extraction

namespace {

void collect_statements(const ProofNode& node, const std::string& source_path,
                        const std::string& theorem, std::vector<ProofStatement>* out) {
  if (!node.label.is_root()) {
    std::string text = node.assertion;
    if (!node.proof_body.empty()) {
      if (!text.empty()) text += "\n";
      text += node.proof_body;
    }
    out->push_back(make_statement(text, node.label, source_path, theorem));
  }
  for (const auto& child : node.children) collect_statements(child, source_path, theorem, out);
  if (!node.children.empty()) {
    StepLabel qed_label{node.children.front().label.level, "", true};
    std::string text = "QED";
    if (!node.qed_clause.empty()) text += " " + node.qed_clause;
    out->push_back(make_statement(text, qed_label, source_path, theorem));
  }
}

}  // namespace

std::vector<ProofStatement> extract_statements(const ParsedModule& module) {
  std::vector<ProofStatement> statements;
  for (const auto& thm : module.theorems) {
    std::string theorem_id = thm.name.empty() ? normalize_ws(thm.assertion) : thm.name;
    collect_statements(thm.root, module.source_path, theorem_id, &statements);
  }
  return statements;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void render_children(const ProofNode& node, int indent, std::string* out) {
  std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  for (const auto& child : node.children) {
    if (child.label.level != node.label.level + 1)
      throw UnrenderableNode("child " + child.label.to_string() + " of " +
                             node.label.to_string() + " is not one level deeper");
    *out += pad + child.label.ref() + ". " + normalize_ws(child.assertion);
    if (!child.children.empty()) {
      *out += "\n";
      render_children(child, indent + 1, out);
    } else {
      if (!child.proof_body.empty()) *out += " " + normalize_ws(child.proof_body);
      *out += "\n";
    }
  }
  StepLabel qed{node.label.level + 1, "", true};
  *out += pad + "<" + std::to_string(qed.level) + ">. QED";
  if (!trim(node.qed_clause).empty()) *out += " " + normalize_ws(node.qed_clause);
  *out += "\n";
}

}  // namespace

std::string render_proof(const ProofNode& node) {
  if (!trim(node.proof_body).empty() && !node.children.empty())
    throw UnrenderableNode("node " + node.label.to_string() + " has both a proof body and children");

  std::string out;
  if (node.children.empty()) {
    if (!node.assertion.empty()) {
      out = normalize_ws(node.assertion);
      if (!node.proof_body.empty()) out += " " + normalize_ws(node.proof_body);
    } else {
      out = normalize_ws(node.proof_body);
    }
    out += "\n";
    return out;
  }
  if (!node.label.is_root() || !node.assertion.empty()) {
    out += node.label.is_root() ? normalize_ws(node.assertion)
                                : node.label.ref() + ". " + normalize_ws(node.assertion);
    out += "\n";
  }
  render_children(node, 0, &out);
  return out;
}

std::string render_module(const ParsedModule& module) {
  std::string out = "---------------- MODULE " + module.module_name + " ----------------\n";
  if (!module.extends.empty()) {
    out += "EXTENDS ";
    for (std::size_t i = 0; i < module.extends.size(); ++i) {
      if (i) out += ", ";
      out += module.extends[i];
    }
    out += "\n";
  }
  out += "\n";
  for (const auto& def : module.definitions) out += def.text + "\n\n";
  for (const auto& thm : module.theorems) {
    out += "THEOREM ";
    if (!thm.name.empty()) out += thm.name + " == ";
    out += normalize_ws(thm.assertion) + "\n";
    if (thm.root.children.empty() && trim(thm.root.proof_body).empty()) {
      out += "\n";
      continue;
    }
    ProofNode body = thm.root;
    body.assertion.clear();  // theorem line already emitted
    out += render_proof(body);
    out += "\n";
  }
  out += "================================================================\n";
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition skeleton

std::string sanitize_module_name(std::string_view name, std::string_view fallback) {
  std::string out;
  for (char c : name) {
    if (is_ident_cont(c)) out.push_back(c);
  }
  if (out.empty() || !is_ident_start(out[0])) out = std::string(fallback) + out;
  return out;
}

std::string make_decomposition_skeleton(
    const Obligation& obl, const std::vector<std::pair<StepLabel, std::string>>& subs,
    const std::string& qed_clause) {
  obl.validate();
  if (subs.empty()) throw EmptySubs("decomposition skeleton needs at least one sub-obligation");
  int level = subs.front().first.level;
  std::set<std::string> names;
  for (const auto& [label, assertion] : subs) {
    if (label.level != level)
      throw Error("sub-obligation labels must share one level");
    if (!names.insert(label.name).second)
      throw DuplicateLabel("duplicate sub-obligation label " + label.ref());
    if (trim(assertion).empty()) throw EmptySubs("empty sub-obligation assertion");
  }

  std::string module_name = sanitize_module_name(obl.name) + "_decomp";
  std::string out = "---------------- MODULE " + module_name + " ----------------\n";
  out += "EXTENDS ";
  bool first = true;
  bool has_tlaps = false;
  for (const auto& m : obl.module_context) {
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
  for (const auto& def : obl.definitions) out += def.text + "\n\n";

  out += "THEOREM " + sanitize_module_name(obl.name) + " == " + normalize_ws(obl.assertion) + "\n";
  for (const auto& [label, assertion] : subs) {
    out += label.ref() + ". " + normalize_ws(assertion) + "\n";
    out += "    OMITTED\n";
  }
  out += "<" + std::to_string(level) + ">. QED " + normalize_ws(qed_clause) + "\n";
  out += "================================================================\n";
  return out;
}

}  // namespace tlaproof
