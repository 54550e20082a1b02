#include "tlaproof/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "tlaproof/text.hpp"

namespace fs = std::filesystem;

namespace tlaproof {

namespace {

const char* kTemplateFiles[] = {"decompose.txt",       "refine.txt",
                                "prove.txt",           "baseline_minimal.txt",
                                "baseline_cot.txt",    "baseline_tot.txt",
                                "baseline_got.txt"};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string substitute(std::string tpl,
                       const std::vector<std::pair<std::string, std::string>>& vars) {
  for (const auto& [key, value] : vars) {
    tpl = replace_all(std::move(tpl), "{{" + key + "}}", value);
  }
  return tpl;
}

std::string definitions_block(const Obligation& obl) {
  std::string out;
  for (const auto& def : obl.definitions) {
    if (!out.empty()) out += "\n";
    out += def.text;
  }
  return out;
}

std::string references_block(const ReferenceSet& refs) {
  if (refs.entries.empty()) return "";
  std::string out = "Here are verified proof statements similar to the target obligation:\n\n";
  for (std::size_t i = 0; i < refs.entries.size(); ++i) {
    out += "[" + std::to_string(i + 1) + "] " + refs.entries[i].record.statement.text + "\n";
  }
  return out;
}

std::string failed_subs_block(const DecompositionProposal& failed) {
  std::string out;
  for (const auto& [label, assertion] : failed.sub_obligations) {
    out += label.ref() + ". " + assertion + "\n";
  }
  if (!failed.qed_clause.empty()) out += "QED " + failed.qed_clause + "\n";
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PromptLibrary

PromptLibrary PromptLibrary::load(const std::string& template_dir) {
  PromptLibrary lib;
  for (const char* file : kTemplateFiles) {
    fs::path path = fs::path(template_dir) / file;
    if (!fs::exists(path))
      throw ConfigurationError("missing prompt template: " + path.string());
    lib.templates_[file] = read_text_file(path.string());
  }
  return lib;
}

const std::string& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigurationError("unknown prompt template: " + name);
  return it->second;
}

PromptText PromptLibrary::render_decomposition_prompt(const Obligation& obl) const {
  obl.validate();
  std::string text = substitute(get("decompose.txt"), {{"obligation", obl.assertion},
                                                       {"definitions", definitions_block(obl)}});
  return {text, PromptKind::Decompose};
}

PromptText PromptLibrary::render_refinement_prompt(const Obligation& obl,
                                                   const DecompositionProposal& failed,
                                                   const VerificationResult& feedback) const {
  if (feedback.proved())
    throw RefineOnSuccess("refinement prompt requested for a successful verification");
  std::string feedback_text = feedback.failure_summary();
  if (feedback_text.empty())
    feedback_text = "verification failed (the prover reported no further detail)";
  std::string text = substitute(get("refine.txt"), {{"obligation", obl.assertion},
                                                    {"definitions", definitions_block(obl)},
                                                    {"failed_subs", failed_subs_block(failed)},
                                                    {"feedback", feedback_text}});
  return {text, PromptKind::Refine};
}

PromptText PromptLibrary::render_proof_prompt(const Obligation& obl,
                                              const ReferenceSet& refs) const {
  std::string text = substitute(get("prove.txt"), {{"obligation", obl.assertion},
                                                   {"definitions", definitions_block(obl)},
                                                   {"references", references_block(refs)}});
  return {text, PromptKind::ProveWithReferences};
}

PromptText PromptLibrary::render_baseline_prompt(BaselineStyle style,
                                                 const std::string& theorem) const {
  if (trim(theorem).empty()) throw Error("baseline prompt needs a nonempty theorem");
  const char* file = nullptr;
  PromptKind kind = PromptKind::BaselineMinimal;
  switch (style) {
    case BaselineStyle::Minimal: file = "baseline_minimal.txt"; kind = PromptKind::BaselineMinimal; break;
    case BaselineStyle::CoT: file = "baseline_cot.txt"; kind = PromptKind::BaselineCoT; break;
    case BaselineStyle::ToT: file = "baseline_tot.txt"; kind = PromptKind::BaselineToT; break;
    case BaselineStyle::GoT: file = "baseline_got.txt"; kind = PromptKind::BaselineGoT; break;
  }
  return {substitute(get(file), {{"theorem", theorem}}), kind};
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

const char* kSectionOriginal = "ORIGINAL OBLIGATION";
const char* kSectionReasoning = "DECOMPOSITION REASONING";
const char* kSectionStrategy = "PROOF STRATEGY";
const char* kSectionSubs = "SUB-OBLIGATIONS";
const char* kSectionQed = "QED CLAUSE";

// Strips markdown decoration from a candidate header line and returns the
// bare uppercased text, e.g. "### **Sub-Obligations:**" -> "SUB-OBLIGATIONS".
std::string header_key(const std::string& line) {
  std::string t = trim(line);
  std::size_t b = 0, e = t.size();
  while (b < e && (t[b] == '#' || t[b] == '*' || t[b] == '_' || t[b] == '>' || t[b] == ' '))
    ++b;
  while (e > b && (t[e - 1] == ':' || t[e - 1] == '*' || t[e - 1] == '_' || t[e - 1] == '#' ||
                   t[e - 1] == ' '))
    --e;
  return upper(trim(t.substr(b, e - b)));
}

std::map<std::string, std::string> split_sections(const std::string& text) {
  const char* names[] = {kSectionOriginal, kSectionReasoning, kSectionStrategy, kSectionSubs,
                         kSectionQed};
  std::map<std::string, std::string> sections;
  std::string current;
  for (const auto& line : split_lines(text)) {
    std::string key = header_key(line);
    bool is_header = false;
    for (const char* name : names) {
      if (key == name) {
        current = name;
        sections[current];  // ensure present even if empty
        is_header = true;
        break;
      }
    }
    if (is_header) continue;
    if (!current.empty()) {
      sections[current] += line;
      sections[current] += "\n";
    }
  }
  return sections;
}

bool is_fence(const std::string& line) { return starts_with(trim(line), "```"); }

std::string strip_bullet(const std::string& line, bool* was_item) {
  std::string t = trim(line);
  *was_item = false;
  if (t.size() >= 2 && (t[0] == '-' || t[0] == '*' || t[0] == '+') && t[1] == ' ') {
    *was_item = true;
    return trim(t.substr(2));
  }
  std::size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
    *was_item = true;
    return trim(t.substr(i + 1));
  }
  return t;
}

std::vector<std::pair<StepLabel, std::string>> parse_sub_obligations(const std::string& body,
                                                                     int default_level) {
  std::vector<std::pair<StepLabel, std::string>> labeled;
  std::vector<std::string> unlabeled;
  bool in_fence = false;
  bool last_was_labeled = false;

  for (const auto& raw : split_lines(body)) {
    if (is_fence(raw)) {
      in_fence = !in_fence;
      continue;
    }
    bool was_item = false;
    std::string line = strip_bullet(raw, &was_item);
    if (line.empty()) {
      last_was_labeled = false;
      continue;
    }
    if (line[0] == '<') {
      bool handled = false;
      try {
        std::size_t consumed = 0;
        StepLabel label = parse_step_label(line, consumed);
        if (label.is_qed()) {
          last_was_labeled = false;  // QED lines belong to the QED section
        } else {
          labeled.emplace_back(label, trim(line.substr(consumed)));
          last_was_labeled = true;
        }
        handled = true;
      } catch (const MalformedLabel&) {
        // not a labeled step after all
      }
      if (handled) continue;
    }
    if (last_was_labeled && !was_item && !in_fence) {
      // continuation of the previous labeled assertion
      auto& [label, assertion] = labeled.back();
      if (!assertion.empty()) assertion += " ";
      assertion += line;
      continue;
    }
    if (was_item || in_fence) {
      unlabeled.push_back(line);
      last_was_labeled = false;
    }
  }

  if (!labeled.empty()) return labeled;
  std::vector<std::pair<StepLabel, std::string>> out;
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    out.emplace_back(StepLabel{default_level, std::to_string(i + 1), false}, unlabeled[i]);
  }
  return out;
}

std::string strip_ticks(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), '`'), s.end());
  return s;
}

std::string synthesize_qed(const std::vector<std::pair<StepLabel, std::string>>& subs,
                           const Obligation* request) {
  std::string clause = "BY ";
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (i) clause += ", ";
    clause += subs[i].first.ref();
  }
  if (request && !request->definitions.empty()) {
    clause += " DEF ";
    const auto names = request->definition_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) clause += ", ";
      clause += names[i];
    }
  }
  return clause;
}

}  // namespace

DecompositionProposal parse_decomposition_response(const std::string& text,
                                                   const Obligation* request,
                                                   int default_level) {
  auto sections = split_sections(text);
  for (const char* required : {kSectionOriginal, kSectionReasoning, kSectionStrategy,
                               kSectionSubs}) {
    if (!sections.count(required)) throw MissingSection(required);
  }

  DecompositionProposal proposal;
  proposal.echoed_obligation = trim(strip_ticks(sections[kSectionOriginal]));
  proposal.reasoning = trim(sections[kSectionReasoning]);
  proposal.proof_strategy = trim(sections[kSectionStrategy]);
  if (proposal.echoed_obligation.empty()) throw MissingSection(kSectionOriginal);

  if (request &&
      normalize_ws(proposal.echoed_obligation) != normalize_ws(strip_ticks(request->assertion)))
    throw ObligationMismatch("echoed obligation does not match the request: '" +
                             proposal.echoed_obligation + "'");

  proposal.sub_obligations = parse_sub_obligations(sections[kSectionSubs], default_level);
  if (proposal.sub_obligations.empty())
    throw NoSubObligations("no sub-obligations found in the response");

  std::string qed;
  if (sections.count(kSectionQed)) {
    qed = trim(strip_ticks(sections[kSectionQed]));
    if (word_at(qed, 0, "QED")) qed = trim(qed.substr(3));
    qed = normalize_ws(qed);
  }
  proposal.qed_clause = qed.empty() ? synthesize_qed(proposal.sub_obligations, request) : qed;
  return proposal;
}

std::string format_decomposition_response(const DecompositionProposal& proposal) {
  std::string out;
  out += std::string(kSectionOriginal) + "\n" + proposal.echoed_obligation + "\n\n";
  out += std::string(kSectionReasoning) + "\n" + proposal.reasoning + "\n\n";
  out += std::string(kSectionStrategy) + "\n" + proposal.proof_strategy + "\n\n";
  out += std::string(kSectionSubs) + "\n";
  for (const auto& [label, assertion] : proposal.sub_obligations) {
    out += label.ref() + ". " + assertion + "\n";
  }
  out += "\n" + std::string(kSectionQed) + "\n" + proposal.qed_clause + "\n";
  return out;
}

std::string parse_proof_response(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);

  // Prefer the first fenced block.
  std::string fenced;
  bool in_fence = false, saw_fence = false;
  for (const auto& line : lines) {
    if (is_fence(line)) {
      if (in_fence) break;  // closing fence of the first block
      in_fence = true;
      saw_fence = true;
      continue;
    }
    if (in_fence) fenced += line + "\n";
  }

  std::string body;
  if (saw_fence) {
    body = fenced;
  } else {
    // Unfenced: skip leading commentary up to the first line that looks like
    // a proof.
    std::size_t start = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string t = trim(lines[i]);
      if (word_at(t, 0, "OBVIOUS") || word_at(t, 0, "OMITTED") || word_at(t, 0, "BY") ||
          word_at(t, 0, "PROOF") || (t.size() > 1 && t[0] == '<' &&
                                     std::isdigit(static_cast<unsigned char>(t[1])))) {
        start = i;
        break;
      }
    }
    for (std::size_t i = start; i < lines.size(); ++i) body += lines[i] + "\n";
  }

  std::string trimmed = trim(body);
  if (trimmed.empty()) throw EmptyProof("no proof body in response");
  return trimmed;
}

}  // namespace tlaproof
