#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tlaproof/prompts.hpp"

namespace tlaproof {

struct BackendUnreachable : Error {
  using Error::Error;
};
struct BackendRejected : Error {
  BackendRejected(int status, const std::string& message)
      : Error("backend rejected request (status " + std::to_string(status) + "): " + message),
        status(status) {}
  int status;
};
struct AllCandidatesFailed : Error {
  using Error::Error;
};
struct TranscriptMismatch : Error {
  using Error::Error;
};
struct TranscriptFormatError : Error {
  using Error::Error;
};

struct GenerationRequest {
  PromptText prompt;
  int n_candidates = 1;
  double temperature = 0.7;
  int max_tokens = 2048;
  std::optional<std::uint64_t> seed_hint;
};

struct GenerationResult {
  std::vector<std::string> candidates;  // never empty on success
  std::string backend_id;
  std::vector<long> latency_ms;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual GenerationResult generate(const GenerationRequest& req) = 0;
  virtual std::string id() const = 0;
};

std::string prompt_hash(const std::string& prompt_text);

// One generate() exchange: the prompt (keyed by its hash) and the responses
// it produced.
struct TranscriptEntry {
  std::string prompt_hash;  // empty = sequential entry, matches any request
  std::string prompt_text;
  std::vector<std::string> responses;
};

// Line-delimited transcript with a "transcript/1" header line.
std::string serialize_transcript(const std::vector<TranscriptEntry>& entries);
std::vector<TranscriptEntry> deserialize_transcript(const std::string& text);
void save_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path);
std::vector<TranscriptEntry> load_transcript(const std::string& path);

// Deterministic scripted backend. Two modes:
//  - sequential: entries without prompt hashes are consumed in order,
//    whatever the prompt;
//  - keyed: entries with hashes form per-prompt FIFO queues; a request whose
//    prompt hash never appears raises TranscriptMismatch, while a consumed
//    queue raises BackendUnreachable (script exhausted).
// A transcript must not mix the two modes.
class ReplayBackend : public LlmBackend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries);
  // Sequential script from bare response lists.
  explicit ReplayBackend(const std::vector<std::vector<std::string>>& script);
  static std::unique_ptr<ReplayBackend> from_file(const std::string& path);

  GenerationResult generate(const GenerationRequest& req) override;
  std::string id() const override { return "replay"; }

  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  bool keyed_ = false;
  bool originally_empty_ = false;
  std::deque<TranscriptEntry> sequence_;
  std::map<std::string, std::deque<TranscriptEntry>> by_hash_;
};

// Wraps a live backend and records every exchange; the transcript replays
// the run byte-identically through ReplayBackend.
class RecordingBackend : public LlmBackend {
 public:
  explicit RecordingBackend(LlmBackend& inner);

  GenerationResult generate(const GenerationRequest& req) override;
  std::string id() const override { return inner_.id() + "+record"; }

  const std::vector<TranscriptEntry>& transcript() const { return entries_; }
  void write(const std::string& path) const;

 private:
  LlmBackend& inner_;
  std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

struct HttpBackendConfig {
  std::string endpoint_url;  // chat-completions style endpoint
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
  int max_retries = 2;
  int max_in_flight = 4;
};

// Client for a chat-completions-style HTTP endpoint. Candidates are fetched
// concurrently (one request each, capped by max_in_flight) and re-ordered by
// candidate index.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  GenerationResult generate(const GenerationRequest& req) override;
  std::string id() const override;

 private:
  std::string fetch_one(const GenerationRequest& req, int index) const;
  HttpBackendConfig config_;
};

}  // namespace tlaproof
