#include "tlaproof/llm_client.hpp"

#include <chrono>
#include <future>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tlaproof/text.hpp"

using nlohmann::json;

namespace tlaproof {

std::string prompt_hash(const std::string& prompt_text) { return fnv1a64_hex(prompt_text); }

// ---------------------------------------------------------------------------
// Transcripts

namespace {
constexpr const char* kTranscriptVersion = "transcript/1";
}

std::string serialize_transcript(const std::vector<TranscriptEntry>& entries) {
  std::string out = json{{"version", kTranscriptVersion}}.dump() + "\n";
  for (const auto& e : entries) {
    json j;
    j["prompt_hash"] = e.prompt_hash;
    j["prompt_text"] = e.prompt_text;
    j["responses"] = e.responses;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<TranscriptEntry> deserialize_transcript(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw TranscriptFormatError("empty transcript file");
  json header;
  try {
    header = json::parse(lines[0]);
  } catch (const json::exception& e) {
    throw TranscriptFormatError(std::string("bad transcript header: ") + e.what());
  }
  if (!header.contains("version") || header.at("version") != kTranscriptVersion)
    throw TranscriptFormatError("unsupported transcript version");

  std::vector<TranscriptEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      json j = json::parse(lines[i]);
      TranscriptEntry e;
      e.prompt_hash = j.value("prompt_hash", "");
      e.prompt_text = j.value("prompt_text", "");
      e.responses = j.at("responses").get<std::vector<std::string>>();
      entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw TranscriptFormatError("corrupted transcript line " + std::to_string(i + 1) + ": " +
                                  e.what());
    }
  }
  return entries;
}

void save_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path) {
  write_text_file(path, serialize_transcript(entries));
}

std::vector<TranscriptEntry> load_transcript(const std::string& path) {
  return deserialize_transcript(read_text_file(path));
}

// ---------------------------------------------------------------------------
// ReplayBackend

ReplayBackend::ReplayBackend(std::vector<TranscriptEntry> entries) {
  originally_empty_ = entries.empty();
  bool any_keyed = false, any_sequential = false;
  for (auto& e : entries) {
    if (e.prompt_hash.empty()) any_sequential = true;
    else any_keyed = true;
  }
  if (any_keyed && any_sequential)
    throw TranscriptFormatError("transcript mixes keyed and sequential entries");
  keyed_ = any_keyed;
  for (auto& e : entries) {
    if (keyed_) by_hash_[e.prompt_hash].push_back(std::move(e));
    else sequence_.push_back(std::move(e));
  }
}

ReplayBackend::ReplayBackend(const std::vector<std::vector<std::string>>& script) {
  originally_empty_ = script.empty();
  for (const auto& responses : script) sequence_.push_back(TranscriptEntry{"", "", responses});
}

std::unique_ptr<ReplayBackend> ReplayBackend::from_file(const std::string& path) {
  return std::make_unique<ReplayBackend>(load_transcript(path));
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t n = sequence_.size();
  for (const auto& [hash, queue] : by_hash_) n += queue.size();
  return n;
}

GenerationResult ReplayBackend::generate(const GenerationRequest& req) {
  std::lock_guard lock(mutex_);
  TranscriptEntry entry;
  if (keyed_) {
    std::string hash = prompt_hash(req.prompt.text);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end())
      throw TranscriptMismatch("no transcript entry for prompt hash " + hash);
    if (it->second.empty())
      throw BackendUnreachable("replay script exhausted for prompt hash " + hash);
    entry = std::move(it->second.front());
    it->second.pop_front();
  } else {
    if (sequence_.empty()) {
      if (originally_empty_)
        throw TranscriptMismatch("empty transcript cannot answer any request");
      throw BackendUnreachable("replay script exhausted");
    }
    entry = std::move(sequence_.front());
    sequence_.pop_front();
  }

  GenerationResult result;
  result.backend_id = id();
  std::size_t n = std::min<std::size_t>(entry.responses.size(),
                                        static_cast<std::size_t>(std::max(req.n_candidates, 1)));
  if (n == 0)
    throw BackendUnreachable("transcript entry has no responses");
  result.candidates.assign(entry.responses.begin(), entry.responses.begin() + n);
  result.latency_ms.assign(n, 0);
  return result;
}

// ---------------------------------------------------------------------------
// RecordingBackend

RecordingBackend::RecordingBackend(LlmBackend& inner) : inner_(inner) {}

GenerationResult RecordingBackend::generate(const GenerationRequest& req) {
  GenerationResult result = inner_.generate(req);
  std::lock_guard lock(mutex_);
  entries_.push_back(
      TranscriptEntry{prompt_hash(req.prompt.text), req.prompt.text, result.candidates});
  return result;
}

void RecordingBackend::write(const std::string& path) const {
  save_transcript(entries_, path);
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint_url.empty())
    throw ConfigurationError("http backend needs an endpoint URL");
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string HttpBackend::fetch_one(const GenerationRequest& req, int index) const {
  auto [base, path] = split_url(config_.endpoint_url);

  json body;
  body["model"] = config_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", req.prompt.text}}});
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  if (req.seed_hint) body["seed"] = *req.seed_hint + static_cast<std::uint64_t>(index);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
    }
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "no response from " + config_.endpoint_url;
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status != 200) throw BackendRejected(res->status, res->body);
    try {
      json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendRejected(res->status, std::string("malformed completion payload: ") + e.what());
    }
  }
  throw BackendUnreachable("backend unreachable after " +
                           std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

GenerationResult HttpBackend::generate(const GenerationRequest& req) {
  int n = std::max(req.n_candidates, 1);
  std::counting_semaphore<64> slots(std::max(config_.max_in_flight, 1));

  std::vector<std::future<std::pair<std::string, long>>> futures;
  futures.reserve(n);
  for (int i = 0; i < n; ++i) {
    futures.push_back(std::async(std::launch::async, [this, &req, &slots, i] {
      slots.acquire();
      auto start = std::chrono::steady_clock::now();
      std::string text;
      try {
        text = fetch_one(req, i);
      } catch (...) {
        slots.release();
        throw;
      }
      slots.release();
      long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
      return std::make_pair(std::move(text), ms);
    }));
  }

  GenerationResult result;
  result.backend_id = id();
  std::string first_error;
  for (auto& f : futures) {
    try {
      auto [text, ms] = f.get();
      result.candidates.push_back(std::move(text));
      result.latency_ms.push_back(ms);
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (result.candidates.empty())
    throw AllCandidatesFailed("all " + std::to_string(n) + " candidates failed: " + first_error);
  return result;
}

}  // namespace tlaproof
