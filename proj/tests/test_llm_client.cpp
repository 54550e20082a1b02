#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tlaproof/llm_client.hpp"

namespace fs = std::filesystem;
using namespace tlaproof;

namespace {

GenerationRequest request(const std::string& prompt, int n = 1) {
  GenerationRequest req;
  req.prompt = PromptText{prompt, PromptKind::ProveWithReferences};
  req.n_candidates = n;
  return req;
}

}  // namespace

TEST_CASE("sequential replay feeds scripted responses in order") {
  ReplayBackend backend(std::vector<std::vector<std::string>>{{"OBVIOUS"}});
  GenerationResult result = backend.generate(request("anything", 1));
  REQUIRE(result.candidates.size() == 1);
  CHECK(result.candidates[0] == "OBVIOUS");
}

TEST_CASE("sequential replay returns all scripted candidates of one entry") {
  ReplayBackend backend(
      std::vector<std::vector<std::string>>{{"OBVIOUS", "BY SMT", "BY Zenon"}});
  GenerationResult result = backend.generate(request("prompt", 3));
  REQUIRE(result.candidates.size() == 3);
  CHECK(result.candidates[0] == "OBVIOUS");
  CHECK(result.candidates[1] == "BY SMT");
  CHECK(result.candidates[2] == "BY Zenon");
}

TEST_CASE("replay never returns more candidates than requested") {
  ReplayBackend backend(std::vector<std::vector<std::string>>{{"a", "b", "c"}});
  GenerationResult result = backend.generate(request("prompt", 2));
  REQUIRE(result.candidates.size() == 2);
  CHECK(result.candidates[0] == "a");
  CHECK(result.candidates[1] == "b");
}

TEST_CASE("an exhausted script reads as an unreachable backend") {
  ReplayBackend backend(std::vector<std::vector<std::string>>{{"OBVIOUS"}});
  backend.generate(request("first", 1));
  CHECK_THROWS_AS(backend.generate(request("second", 1)), BackendUnreachable);
}

TEST_CASE("an empty transcript mismatches every request") {
  ReplayBackend backend(std::vector<TranscriptEntry>{});
  CHECK_THROWS_AS(backend.generate(request("anything", 1)), TranscriptMismatch);
}

TEST_CASE("keyed replay matches requests by prompt hash") {
  std::vector<TranscriptEntry> entries = {
      {prompt_hash("prompt A"), "prompt A", {"answer A"}},
      {prompt_hash("prompt B"), "prompt B", {"answer B"}},
  };
  ReplayBackend backend(entries);
  CHECK(backend.generate(request("prompt B", 1)).candidates[0] == "answer B");
  CHECK(backend.generate(request("prompt A", 1)).candidates[0] == "answer A");
  CHECK_THROWS_AS(backend.generate(request("prompt C", 1)), TranscriptMismatch);
  CHECK_THROWS_AS(backend.generate(request("prompt A", 1)), BackendUnreachable);
}

TEST_CASE("transcripts round-trip through the file format") {
  std::vector<TranscriptEntry> entries = {
      {prompt_hash("p1"), "p1", {"r1", "r2"}},
      {prompt_hash("p2"), "p2", {"multi\nline\nresponse"}},
  };
  std::string text = serialize_transcript(entries);
  auto back = deserialize_transcript(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].prompt_hash == entries[0].prompt_hash);
  CHECK(back[0].responses == entries[0].responses);
  CHECK(back[1].responses[0] == "multi\nline\nresponse");

  CHECK_THROWS_AS(deserialize_transcript(""), TranscriptFormatError);
  CHECK_THROWS_AS(deserialize_transcript("{\"version\":\"transcript/9\"}\n"),
                  TranscriptFormatError);
  CHECK_THROWS_AS(deserialize_transcript("{\"version\":\"transcript/1\"}\nnot json\n"),
                  TranscriptFormatError);
}

TEST_CASE("recording a run replays byte-identically") {
  ReplayBackend source(std::vector<std::vector<std::string>>{{"OBVIOUS"}, {"BY SMT"}});
  RecordingBackend recorder(source);
  std::string a = recorder.generate(request("decompose this", 1)).candidates[0];
  std::string b = recorder.generate(request("prove that", 1)).candidates[0];

  fs::path path = fs::temp_directory_path() / "tlaproof_transcript_test.jsonl";
  recorder.write(path.string());
  auto replays = ReplayBackend::from_file(path.string());
  CHECK(replays->generate(request("decompose this", 1)).candidates[0] == a);
  CHECK(replays->generate(request("prove that", 1)).candidates[0] == b);
  fs::remove(path);
}

TEST_CASE("two replays of one transcript agree") {
  std::vector<TranscriptEntry> entries = {{prompt_hash("p"), "p", {"x", "y"}}};
  ReplayBackend one(entries), two(entries);
  GenerationResult r1 = one.generate(request("p", 2));
  GenerationResult r2 = two.generate(request("p", 2));
  CHECK(r1.candidates == r2.candidates);
}

TEST_CASE("http backend: candidates come back in index order") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    long seed = body.value("seed", 0L);
    nlohmann::json out;
    out["choices"] = {{{"message", {{"content", "candidate-" + std::to_string(seed)}}}}};
    res.set_content(out.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "test-model";
  cfg.max_in_flight = 2;
  HttpBackend backend(cfg);

  GenerationRequest req = request("prompt", 3);
  req.seed_hint = 100;
  GenerationResult result = backend.generate(req);
  REQUIRE(result.candidates.size() == 3);
  CHECK(result.candidates[0] == "candidate-100");
  CHECK(result.candidates[1] == "candidate-101");
  CHECK(result.candidates[2] == "candidate-102");
  CHECK(result.latency_ms.size() == 3);

  server.stop();
  thread.join();
}

TEST_CASE("http backend retries transient errors and respects rejections") {
  std::atomic<int> hits{0};
  httplib::Server server;
  server.Post("/flaky", [&hits](const httplib::Request&, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    nlohmann::json out;
    out["choices"] = {{{"message", {{"content", "recovered"}}}}};
    res.set_content(out.dump(), "application/json");
  });
  server.Post("/reject", [](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  std::string base = "http://127.0.0.1:" + std::to_string(port);

  HttpBackendConfig flaky;
  flaky.endpoint_url = base + "/flaky";
  flaky.model = "m";
  HttpBackend flaky_backend(flaky);
  CHECK(flaky_backend.generate(request("p", 1)).candidates[0] == "recovered");

  HttpBackendConfig reject;
  reject.endpoint_url = base + "/reject";
  reject.model = "m";
  HttpBackend reject_backend(reject);
  CHECK_THROWS_AS(reject_backend.generate(request("p", 1)), AllCandidatesFailed);

  server.stop();
  thread.join();
}

TEST_CASE("http backend reports unreachable endpoints") {
  HttpBackendConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:1/nowhere";
  cfg.model = "m";
  cfg.max_retries = 0;
  HttpBackend backend(cfg);
  CHECK_THROWS_AS(backend.generate(request("p", 1)), AllCandidatesFailed);
}
