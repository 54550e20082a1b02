#include "tlaproof/verifier.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tlaproof/subprocess.hpp"
#include "tlaproof/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tlaproof {

// ---------------------------------------------------------------------------
// Prover output parsing

namespace {

ObligationStatus map_status(const std::string& s) {
  if (s == "proved" || s == "trivial") return ObligationStatus::Proved;
  if (s == "failed" || s == "interrupted") return ObligationStatus::Failed;
  if (s == "omitted" || s == "missing") return ObligationStatus::Omitted;
  return ObligationStatus::ToolError;
}

struct RawBlock {
  std::map<std::string, std::string> fields;
  std::string raw;
};

std::vector<RawBlock> scan_blocks(const std::string& raw) {
  std::vector<RawBlock> blocks;
  RawBlock current;
  bool in_block = false;
  std::string pending_key;
  for (const auto& line : split_lines(raw)) {
    if (starts_with(line, "@!!BEGIN")) {
      current = RawBlock{};
      in_block = true;
      pending_key.clear();
      continue;
    }
    if (starts_with(line, "@!!END")) {
      if (in_block) blocks.push_back(std::move(current));
      in_block = false;
      pending_key.clear();
      continue;
    }
    if (!in_block) continue;
    current.raw += line + "\n";
    if (starts_with(line, "@!!")) {
      std::string rest = line.substr(3);
      std::size_t colon = rest.find(':');
      if (colon == std::string::npos) continue;
      pending_key = rest.substr(0, colon);
      current.fields[pending_key] = trim(rest.substr(colon + 1));
    } else if (!pending_key.empty()) {
      // continuation of a multi-line field such as obl
      std::string& val = current.fields[pending_key];
      if (!val.empty()) val += "\n";
      val += line;
    }
  }
  return blocks;
}

}  // namespace

std::vector<ProverObligation> parse_prover_output(const std::string& raw) {
  std::vector<ProverObligation> out;
  // Obligations report several times as their status evolves; the last block
  // per id (or location) wins.
  std::map<std::string, std::size_t> index_of;

  for (const auto& block : scan_blocks(raw)) {
    auto type_it = block.fields.find("type");
    std::string type = type_it == block.fields.end() ? "" : type_it->second;
    if (type == "obligationsnumber" || type == "obligationcount") continue;

    if (type != "obligation") {
      ProverObligation ob;
      ob.location = block.fields.count("loc") ? block.fields.at("loc") : "";
      ob.status = ObligationStatus::ToolError;
      ob.message = trim(block.raw);
      out.push_back(std::move(ob));
      continue;
    }

    ProverObligation ob;
    ob.location = block.fields.count("loc") ? block.fields.at("loc") : "";
    std::string status = block.fields.count("status") ? block.fields.at("status") : "";
    if (status == "to be proved" || status == "being proved") continue;  // progress only
    ob.status = map_status(status);
    if (ob.status == ObligationStatus::ToolError && !status.empty())
      ob.message = "unknown obligation status: " + status;
    if (block.fields.count("reason")) ob.message = block.fields.at("reason");
    if (block.fields.count("obl")) {
      if (!ob.message.empty()) ob.message += "\n";
      ob.message += trim(block.fields.at("obl"));
    }
    if (ob.status != ObligationStatus::Proved && ob.message.empty())
      ob.message = to_string(ob.status);

    std::string key = block.fields.count("id") ? "id:" + block.fields.at("id")
                                               : "loc:" + ob.location;
    auto it = index_of.find(key);
    if (it != index_of.end()) {
      out[it->second] = std::move(ob);
    } else {
      index_of[key] = out.size();
      out.push_back(std::move(ob));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Module wrapping

std::string render_check_module(const Obligation& obl, const std::string& proof_body,
                                const std::string& module_name) {
  if (trim(obl.assertion).empty())
    throw ModuleRenderError("obligation has an empty assertion");
  if (trim(proof_body).empty()) throw ModuleRenderError("proof body is empty");

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
  out += "THEOREM " + sanitize_module_name(obl.name) + " == " + normalize_ws(obl.assertion) +
         "\n";
  out += proof_body + "\n";
  out += "================================================================\n";
  return out;
}

// ---------------------------------------------------------------------------
// Verifier base

VerificationResult Verifier::try_tier(const Obligation& obl, ProverTier tier) {
  if (tier == ProverTier::Llm)
    throw Error("try_tier only handles the automated tiers (Obvious, AllProvers)");
  return check_proof(obl, tier_proof_body(tier));
}

// ---------------------------------------------------------------------------
// TlapsVerifier

TlapsVerifier::TlapsVerifier(TlapsConfig config) : config_(std::move(config)) {
  int cap = std::clamp(config_.max_concurrency, 1, 16);
  slots_ = std::make_unique<std::counting_semaphore<16>>(cap);
}

namespace {

std::string random_suffix() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  std::uint64_t v = rng();
  return fnv1a64_hex(std::to_string(v));
}

std::vector<std::string> build_argv(const TlapsConfig& cfg, const std::string& exe,
                                    const std::string& file) {
  std::vector<std::string> argv{exe};
  std::stringstream ss(cfg.args_template);
  std::string tok;
  while (ss >> tok) {
    tok = replace_all(tok, "{file}", file);
    tok = replace_all(tok, "{timeout}", std::to_string(cfg.timeout_seconds));
    argv.push_back(tok);
  }
  return argv;
}

// Maps a 1-based line in the module to the label of the step that starts at
// or before it.
std::string label_for_line(const std::vector<std::string>& lines, int line) {
  if (line < 1 || line > static_cast<int>(lines.size())) return "";
  for (int i = line - 1; i >= 0; --i) {
    const std::string& l = lines[static_cast<std::size_t>(i)];
    std::size_t pos = l.find('<');
    if (pos == std::string::npos) continue;
    std::string t = trim(l);
    if (t.empty() || t[0] != '<') continue;
    try {
      std::size_t consumed = 0;
      StepLabel label = parse_step_label(t, consumed);
      return label.qed ? "<" + std::to_string(label.level) + ">. QED" : label.ref();
    } catch (const MalformedLabel&) {
      continue;
    }
  }
  return "goal";
}

int first_loc_line(const std::string& loc) {
  try {
    return std::stoi(loc.substr(0, loc.find(':')));
  } catch (...) {
    return -1;
  }
}

}  // namespace

VerificationResult TlapsVerifier::run_on_module(const std::string& module_name,
                                                const std::string& module_text,
                                                bool decomposition_check, int qed_line) {
  std::string exe = find_executable(config_.executable);
  if (exe.empty()) throw ProverNotFound("prover executable not found: " + config_.executable);

  fs::path base = config_.artifacts_dir.empty() ? fs::temp_directory_path()
                                                : fs::path(config_.artifacts_dir);
  fs::path workdir = base / ("tlaproof-" + random_suffix());
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) throw WorkingDirError("cannot create working directory " + workdir.string());

  std::string file = module_name + ".tla";
  write_text_file((workdir / file).string(), module_text);

  slots_->acquire();
  ProcessResult proc;
  try {
    proc = run_process(build_argv(config_, exe, file), workdir.string(),
                       config_.timeout_seconds);
  } catch (...) {
    slots_->release();
    throw;
  }
  slots_->release();

  if (config_.keep_artifacts) {
    write_text_file((workdir / "prover.log").string(), proc.output);
  } else {
    fs::remove_all(workdir, ec);
  }

  VerificationResult result;
  result.duration_ms = proc.duration_ms;

  if (proc.timed_out) {
    result.overall = OverallVerdict::Timeout;
    result.message = "prover exceeded the " + std::to_string(config_.timeout_seconds) +
                     " s timeout";
    return result;
  }

  std::vector<std::string> module_lines = split_lines(module_text);
  std::vector<ObligationReport> reports;
  for (auto& ob : parse_prover_output(proc.output)) {
    if (decomposition_check && ob.status == ObligationStatus::Omitted)
      continue;  // omitted sub-obligations never count toward the verdict
    int line = first_loc_line(ob.location);
    std::string label = label_for_line(module_lines, line);
    ObligationReport rep;
    rep.location = label.empty() ? ob.location : label + " @ " + ob.location;
    if (decomposition_check && qed_line > 0 && line == qed_line) {
      rep.location = "<qed> @ " + ob.location;
    }
    rep.status = ob.status;
    rep.message = ob.message;
    reports.push_back(std::move(rep));
  }

  if (reports.empty()) {
    if (proc.exit_code != 0) {
      result.overall = OverallVerdict::ToolError;
      std::string tail = proc.output.size() > 2000
                             ? proc.output.substr(proc.output.size() - 2000)
                             : proc.output;
      result.message = "prover exited with code " + std::to_string(proc.exit_code) + ": " + tail;
      return result;
    }
    if (decomposition_check) {
      // only omitted obligations were reported; the QED was never checked
      result.overall = OverallVerdict::Failed;
      result.message = "no checkable QED obligation was reported";
      return result;
    }
    // nothing to prove and a clean exit
    result.overall = OverallVerdict::Proved;
    return result;
  }

  return make_verification_result(std::move(reports), proc.duration_ms);
}

VerificationResult TlapsVerifier::check_proof(const Obligation& obl,
                                              const std::string& proof_body) {
  if (trim(obl.assertion).empty())
    throw ModuleRenderError("obligation has an empty assertion");
  obl.validate();
  std::string module_name = sanitize_module_name(obl.name) + "_check";
  std::string module_text = render_check_module(obl, proof_body, module_name);
  return run_on_module(module_name, module_text, false, -1);
}

VerificationResult TlapsVerifier::check_decomposition(const Obligation& obl,
                                                      const DecompositionProposal& proposal) {
  if (proposal.sub_obligations.empty())
    throw EmptySubs("decomposition check needs at least one sub-obligation");
  std::string module_text =
      make_decomposition_skeleton(obl, proposal.sub_obligations, proposal.qed_clause);
  std::string module_name = sanitize_module_name(obl.name) + "_decomp";

  // The QED step is the only line starting with "<l>. QED".
  int qed_line = -1;
  std::vector<std::string> lines = split_lines(module_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string t = trim(lines[i]);
    if (t.size() > 2 && t[0] == '<' && t.find(". QED") != std::string::npos)
      qed_line = static_cast<int>(i + 1);
  }
  return run_on_module(module_name, module_text, true, qed_line);
}

// ---------------------------------------------------------------------------
// MockVerifier

void MockVerifier::add_proof_rule(ProofRule rule) {
  rule.assertion = normalize_ws(rule.assertion);
  rule.body = normalize_ws(rule.body);
  proof_rules_.push_back(std::move(rule));
}

void MockVerifier::add_decomposition_rule(DecompositionRule rule) {
  rule.assertion = normalize_ws(rule.assertion);
  for (auto& s : rule.subs) s = normalize_ws(s);
  decomposition_rules_.push_back(std::move(rule));
}

void MockVerifier::set_default(ObligationStatus verdict, std::string message) {
  default_verdict_ = verdict;
  default_message_ = std::move(message);
}

VerificationResult MockVerifier::check_proof(const Obligation& obl,
                                             const std::string& proof_body) {
  if (trim(obl.assertion).empty())
    throw ModuleRenderError("obligation has an empty assertion");
  if (trim(proof_body).empty()) throw ModuleRenderError("proof body is empty");
  std::string assertion = normalize_ws(obl.assertion);
  std::string body = normalize_ws(proof_body);

  ObligationStatus verdict = default_verdict_;
  std::string message = default_message_;
  for (const auto& rule : proof_rules_) {
    if (rule.assertion == assertion && (rule.body.empty() || rule.body == body)) {
      verdict = rule.verdict;
      message = rule.message;
      break;
    }
  }
  ObligationReport rep;
  rep.location = "goal";
  rep.status = verdict;
  rep.message = verdict == ObligationStatus::Proved ? "" : message;
  return make_verification_result({rep}, 0);
}

VerificationResult MockVerifier::check_decomposition(const Obligation& obl,
                                                     const DecompositionProposal& proposal) {
  if (proposal.sub_obligations.empty())
    throw EmptySubs("decomposition check needs at least one sub-obligation");
  std::string assertion = normalize_ws(obl.assertion);
  std::vector<std::string> subs;
  subs.reserve(proposal.sub_obligations.size());
  for (const auto& [label, text] : proposal.sub_obligations) subs.push_back(normalize_ws(text));

  ObligationStatus verdict = default_verdict_;
  std::string message = default_message_;
  for (const auto& rule : decomposition_rules_) {
    if (rule.assertion != assertion) continue;
    if (!rule.subs.empty() && rule.subs != subs) continue;
    verdict = rule.verdict;
    message = rule.message;
    break;
  }
  ObligationReport rep;
  rep.location = "<qed>";
  rep.status = verdict;
  rep.message = verdict == ObligationStatus::Proved ? "" : message;
  return make_verification_result({rep}, 0);
}

namespace {

ObligationStatus verdict_from_string(const std::string& s) {
  if (s == "proved") return ObligationStatus::Proved;
  if (s == "failed") return ObligationStatus::Failed;
  if (s == "omitted") return ObligationStatus::Omitted;
  throw Error("unknown verdict: " + s);
}

}  // namespace

std::unique_ptr<MockVerifier> MockVerifier::parse(const std::string& text) {
  auto mock = std::make_unique<MockVerifier>();
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw Error("empty verdict table");
  json header = json::parse(lines[0]);
  if (!header.contains("version") || header.at("version") != "verdicts/1")
    throw Error("unsupported verdict table version");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j = json::parse(lines[i]);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "proof") {
      ProofRule rule;
      rule.assertion = j.at("assertion").get<std::string>();
      rule.body = j.value("body", "");
      rule.verdict = verdict_from_string(j.at("verdict").get<std::string>());
      rule.message = j.value("message", "");
      mock->add_proof_rule(std::move(rule));
    } else if (kind == "decomposition") {
      DecompositionRule rule;
      rule.assertion = j.at("assertion").get<std::string>();
      if (j.contains("subs")) rule.subs = j.at("subs").get<std::vector<std::string>>();
      rule.verdict = verdict_from_string(j.at("verdict").get<std::string>());
      rule.message = j.value("message", "");
      mock->add_decomposition_rule(std::move(rule));
    } else if (kind == "default") {
      mock->set_default(verdict_from_string(j.at("verdict").get<std::string>()),
                        j.value("message", "verification failed"));
    } else {
      throw Error("unknown verdict rule kind: " + kind);
    }
  }
  return mock;
}

std::unique_ptr<MockVerifier> MockVerifier::from_file(const std::string& path) {
  return parse(read_text_file(path));
}

}  // namespace tlaproof
