#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tlaproof/config.hpp"
#include "tlaproof/llm_client.hpp"
#include "tlaproof/prompts.hpp"
#include "tlaproof/subprocess.hpp"
#include "tlaproof/text.hpp"

namespace fs = std::filesystem;
using namespace tlaproof;

namespace {

const std::string kFixtures = FIXTURES_DIR;
const std::string kTemplates = TEMPLATES_DIR;

ProcessResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), TLAPROOF_BIN);
  return run_process(args, "", 60);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("tlaproof_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_even_obligation(const TempDir& dir) {
  Obligation obl;
  obl.name = "EvenDoubled";
  obl.assertion = "Even(x + x)";
  obl.definitions = {{"Even", "Even(n) == n % 2 = 0"}};
  obl.module_context = {"Naturals", "TLAPS"};
  std::string path = dir.file("even_obligation.json");
  save_obligation_file(obl, path);
  return path;
}

std::string write_even_transcript(const TempDir& dir) {
  DecompositionProposal d1;
  d1.echoed_obligation = "Even(x + x)";
  d1.reasoning = "Rewrite the sum as a product of two.";
  d1.proof_strategy = "The rewrite and the evenness of 2 * x give the goal by DEF Even.";
  d1.sub_obligations = {{parse_step_label("<1>1"), "x + x = 2 * x"},
                        {parse_step_label("<1>2"), "Even(2 * x)"}};
  d1.qed_clause = "BY <1>1, <1>2 DEF Even";

  DecompositionProposal d2;
  d2.echoed_obligation = "Even(2 * x)";
  d2.reasoning = "Unfold Even into membership and divisibility.";
  d2.proof_strategy = "Both facts instantiate the definition of Even.";
  d2.sub_obligations = {{parse_step_label("<2>1"), "2 * x \\in Nat"},
                        {parse_step_label("<2>2"), "(2 * x) % 2 = 0"}};
  d2.qed_clause = "BY <2>1, <2>2 DEF Even";

  std::vector<TranscriptEntry> entries = {
      {"", "", {format_decomposition_response(d1)}},
      {"", "", {"OBVIOUS"}},
      {"", "", {format_decomposition_response(d2)}},
  };
  std::string path = dir.file("even_transcript.jsonl");
  save_transcript(entries, path);
  return path;
}

std::string write_even_verdicts(const TempDir& dir) {
  std::string table =
      "{\"version\":\"verdicts/1\"}\n"
      "{\"kind\":\"proof\",\"assertion\":\"x + x = 2 * x\",\"body\":\"OBVIOUS\",\"verdict\":\"proved\"}\n"
      "{\"kind\":\"proof\",\"assertion\":\"Even(2 * x)\",\"body\":\"OBVIOUS\",\"verdict\":\"failed\","
      "\"message\":\"OBVIOUS does not expand Even\"}\n"
      "{\"kind\":\"proof\",\"assertion\":\"2 * x \\\\in Nat\",\"body\":\"OBVIOUS\",\"verdict\":\"proved\"}\n"
      "{\"kind\":\"proof\",\"assertion\":\"(2 * x) % 2 = 0\",\"body\":\"OBVIOUS\",\"verdict\":\"proved\"}\n"
      "{\"kind\":\"decomposition\",\"assertion\":\"Even(x + x)\","
      "\"subs\":[\"x + x = 2 * x\",\"Even(2 * x)\"],\"verdict\":\"proved\"}\n"
      "{\"kind\":\"decomposition\",\"assertion\":\"Even(2 * x)\","
      "\"subs\":[\"2 * x \\\\in Nat\",\"(2 * x) % 2 = 0\"],\"verdict\":\"proved\"}\n"
      "{\"kind\":\"default\",\"verdict\":\"failed\",\"message\":\"no scripted verdict\"}\n";
  std::string path = dir.file("even_verdicts.jsonl");
  write_text_file(path, table);
  return path;
}

std::string write_failing_verdicts(const TempDir& dir) {
  write_text_file(dir.file("fail_verdicts.jsonl"),
                  "{\"version\":\"verdicts/1\"}\n"
                  "{\"kind\":\"default\",\"verdict\":\"failed\",\"message\":\"scripted failure\"}\n");
  return dir.file("fail_verdicts.jsonl");
}

}  // namespace

TEST_CASE("build-corpus over the bundled tree prints a positive count") {
  TempDir dir("build");
  auto result = run_cli({"build-corpus", kFixtures, "--out", dir.file("corpus.jsonl")});
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("records written") != std::string::npos);
  CHECK(fs::exists(dir.file("corpus.jsonl")));
}

TEST_CASE("build-corpus twice produces byte-identical corpora") {
  TempDir dir("idempotent");
  REQUIRE(run_cli({"build-corpus", kFixtures, "--out", dir.file("a.jsonl")}).exit_code == 0);
  REQUIRE(run_cli({"build-corpus", kFixtures, "--out", dir.file("b.jsonl")}).exit_code == 0);
  CHECK(read_text_file(dir.file("a.jsonl")) == read_text_file(dir.file("b.jsonl")));
}

TEST_CASE("build-corpus on an empty directory exits 1") {
  TempDir dir("empty");
  fs::create_directories(dir.path / "nothing_here");
  auto result = run_cli({"build-corpus", (dir.path / "nothing_here").string(), "--out",
                         dir.file("corpus.jsonl")});
  CHECK(result.exit_code == 1);
}

TEST_CASE("build-corpus excluding everything warns and writes an empty corpus") {
  TempDir dir("excluded");
  write_text_file(dir.file("exclude_all.txt"), "*.tla\n");
  auto result = run_cli({"build-corpus", kFixtures, "--exclusions", dir.file("exclude_all.txt"),
                         "--out", dir.file("corpus.jsonl")});
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("0 records written") != std::string::npos);
  CHECK(result.output.find("warning") != std::string::npos);
}

TEST_CASE("retrieve ranks an exact corpus statement first with score 1.0") {
  TempDir dir("retrieve");
  REQUIRE(run_cli({"build-corpus", kFixtures + "/even_double.tla", "--out",
                   dir.file("corpus.jsonl")})
              .exit_code == 0);
  auto result = run_cli({"retrieve", "\\A x \\in Nat : x + x = 2 * x OBVIOUS", "--corpus",
                         dir.file("corpus.jsonl"), "--k", "3"});
  CHECK(result.exit_code == 0);
  auto lines = split_lines(trim(result.output));
  REQUIRE(lines.size() == 3);  // min(k, corpus size) rows
  CHECK(starts_with(lines[0], "1.000000"));
  CHECK(lines[0].find("x + x = 2 * x OBVIOUS") != std::string::npos);
}

TEST_CASE("retrieve row count is min(k, corpus size)") {
  TempDir dir("retrieve_k");
  REQUIRE(run_cli({"build-corpus", kFixtures + "/dup_a.tla", "--out", dir.file("c.jsonl")})
              .exit_code == 0);  // 2 records
  auto result = run_cli({"retrieve", "QED", "--corpus", dir.file("c.jsonl"), "--k", "50"});
  CHECK(result.exit_code == 0);
  CHECK(split_lines(trim(result.output)).size() == 2);
}

TEST_CASE("retrieve rejects k = 0 at flag parsing") {
  auto result = run_cli({"retrieve", "query", "--corpus", "/nonexistent", "--k", "0"});
  CHECK(result.exit_code == 2);
}

TEST_CASE("prove replays the arithmetic example end to end") {
  TempDir dir("prove");
  std::string obligation = write_even_obligation(dir);
  std::string transcript = write_even_transcript(dir);
  std::string verdicts = write_even_verdicts(dir);

  auto result = run_cli({"prove", obligation, "--llm", "replay:" + transcript, "--verifier",
                         "mock:" + verdicts, "--templates", kTemplates, "--candidates", "1",
                         "--out", dir.file("out")});
  CAPTURE(result.output);
  CHECK(result.exit_code == 0);

  std::string proof_path = dir.file("out") + "/EvenDoubled_proof.tla";
  REQUIRE(fs::exists(proof_path));
  ParsedModule mod = parse_module(read_text_file(proof_path));
  REQUIRE(mod.theorems.size() == 1);
  REQUIRE(mod.theorems[0].root.children.size() == 2);
  CHECK(mod.theorems[0].root.children[1].children.size() == 2);
  CHECK(fs::exists(dir.file("out") + "/EvenDoubled_runlog.jsonl"));
}

TEST_CASE("prove with an always-failing verifier exhausts and exits 3") {
  TempDir dir("exhaust");
  std::string obligation = write_even_obligation(dir);
  std::string verdicts = write_failing_verdicts(dir);

  DecompositionProposal p;
  p.echoed_obligation = "Even(x + x)";
  p.reasoning = "r";
  p.proof_strategy = "s";
  p.sub_obligations = {{parse_step_label("<1>1"), "x + x = 2 * x"},
                       {parse_step_label("<1>2"), "Even(2 * x)"}};
  p.qed_clause = "BY <1>1, <1>2 DEF Even";
  std::vector<TranscriptEntry> entries;
  for (int i = 0; i < 10; ++i)
    entries.push_back({"", "", {format_decomposition_response(p)}});
  save_transcript(entries, dir.file("transcript.jsonl"));

  auto result = run_cli({"prove", obligation, "--llm", "replay:" + dir.file("transcript.jsonl"),
                         "--verifier", "mock:" + verdicts, "--templates", kTemplates, "--out",
                         dir.file("out")});
  CAPTURE(result.output);
  CHECK(result.exit_code == 3);
  CHECK(result.output.find("10 decomposition checks") != std::string::npos);
}

TEST_CASE("prove with a missing obligation file exits 4") {
  TempDir dir("missing");
  std::string verdicts = write_failing_verdicts(dir);
  auto result = run_cli({"prove", dir.file("nope.json"), "--llm", "replay:/dev/null",
                         "--verifier", "mock:" + verdicts, "--templates", kTemplates});
  CHECK(result.exit_code == 4);
}

TEST_CASE("check accepts a proof the mock verifier scripts as proved") {
  TempDir dir("check");
  std::string obligation = write_even_obligation(dir);
  write_text_file(dir.file("proof.txt"), "OBVIOUS\n");
  write_text_file(dir.file("verdicts.jsonl"),
                  "{\"version\":\"verdicts/1\"}\n"
                  "{\"kind\":\"proof\",\"assertion\":\"Even(x + x)\",\"body\":\"OBVIOUS\","
                  "\"verdict\":\"proved\"}\n");
  auto ok = run_cli({"check", obligation, dir.file("proof.txt"), "--verifier",
                     "mock:" + dir.file("verdicts.jsonl")});
  CAPTURE(ok.output);
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("proved") != std::string::npos);

  std::string failing = write_failing_verdicts(dir);
  auto bad = run_cli({"check", obligation, dir.file("proof.txt"), "--verifier",
                      "mock:" + failing});
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("scripted failure") != std::string::npos);
}

TEST_CASE("check without a prover install exits 4") {
  TempDir dir("noprover");
  std::string obligation = write_even_obligation(dir);
  write_text_file(dir.file("proof.txt"), "OBVIOUS\n");
  auto result = run_cli({"check", obligation, dir.file("proof.txt"), "--verifier",
                         "tlaps:no-such-prover-binary"});
  CHECK(result.exit_code == 4);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({"retrieve"}).exit_code == 2);          // missing required arg
  CHECK(run_cli({"no-such-command"}).exit_code == 2);
  CHECK(run_cli({}).exit_code == 2);                    // subcommand required
}

TEST_CASE("the obligation extractor pulls theorems out of modules") {
  Obligation obl = obligation_from_module(kFixtures + "/even_double.tla", "EvenDoubled");
  CHECK(obl.name == "EvenDoubled");
  CHECK(obl.assertion == "\\A x \\in Nat : Even(x + x)");
  REQUIRE(obl.definitions.size() == 1);
  CHECK(obl.definitions[0].name == "Even");
  CHECK(obl.module_context == std::vector<std::string>{"Naturals", "TLAPS"});
}

TEST_CASE("tool config files reject unknown keys and honor precedence") {
  TempDir dir("config");
  write_text_file(dir.file("good.json"),
                  "{\"max_depth\": 7, \"llm_kind\": \"replay\", \"verbosity\": 0}\n");
  ToolConfig cfg = load_tool_config(dir.file("good.json"));
  CHECK(cfg.run.max_depth == 7);
  CHECK(cfg.llm_kind == "replay");

  write_text_file(dir.file("bad.json"), "{\"max_dpeth\": 7}\n");
  CHECK_THROWS_AS(load_tool_config(dir.file("bad.json")), ConfigurationError);

  write_text_file(dir.file("corrupt.json"), "{nope\n");
  CHECK_THROWS_AS(load_tool_config(dir.file("corrupt.json")), ConfigurationError);
}
