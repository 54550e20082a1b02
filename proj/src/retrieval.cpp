#include "tlaproof/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <httplib.h>
#include <json.hpp>

#include "tlaproof/text.hpp"

using nlohmann::json;

namespace tlaproof {

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

// ---------------------------------------------------------------------------
// FallbackEmbedder

FallbackEmbedder::FallbackEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error("embedder dimension must be positive");
}

std::string FallbackEmbedder::id() const {
  return "fallback-trigram-" + std::to_string(dimension_);
}

EmbeddingVector FallbackEmbedder::embed(const std::string& text) const {
  std::string norm = normalize_ws(text);
  if (norm.empty()) throw Error("cannot embed empty text");

  EmbeddingVector v;
  v.values.assign(dimension_, 0.0);
  if (norm.size() < 3) {
    v.values[fnv1a64(norm) % dimension_] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
      v.values[fnv1a64(std::string_view(norm).substr(i, 3)) % dimension_] += 1.0;
    }
  }
  double norm2 = std::sqrt(
      std::inner_product(v.values.begin(), v.values.end(), v.values.begin(), 0.0));
  for (double& x : v.values) x /= norm2;
  return v;
}

// ---------------------------------------------------------------------------
// RemoteEmbedder

RemoteEmbedder::RemoteEmbedder(std::string endpoint_url, std::size_t dimension,
                               std::string api_key)
    : endpoint_url_(std::move(endpoint_url)), dimension_(dimension),
      api_key_(std::move(api_key)) {
  if (dimension_ == 0) throw Error("embedder dimension must be positive");
}

std::string RemoteEmbedder::id() const { return "remote:" + endpoint_url_; }

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<std::string> normalized;
  normalized.reserve(texts.size());
  for (const auto& t : texts) normalized.push_back(normalize_ws(t));

  auto [base, path] = split_url(endpoint_url_);
  httplib::Client client(base);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  json body;
  body["texts"] = normalized;
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw EmbedderUnavailable("embedding service unreachable: " + endpoint_url_);
  if (res->status != 200)
    throw EmbedderUnavailable("embedding service returned status " +
                              std::to_string(res->status));
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception& e) {
    throw EmbedderUnavailable(std::string("embedding service sent invalid JSON: ") + e.what());
  }
  if (!reply.contains("embeddings") || !reply["embeddings"].is_array() ||
      reply["embeddings"].size() != normalized.size())
    throw EmbedderUnavailable("embedding service reply malformed");

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& arr : reply["embeddings"]) {
    EmbeddingVector v;
    v.values = arr.get<std::vector<double>>();
    if (v.dimension() != dimension_)
      throw EmbedderUnavailable("embedding service returned dimension " +
                                std::to_string(v.dimension()) + ", expected " +
                                std::to_string(dimension_));
    out.push_back(std::move(v));
  }
  return out;
}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
  return embed_batch({text}).front();
}

// ---------------------------------------------------------------------------
// Similarity and retrieval

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension())
    throw DimensionMismatch("cosine of " + std::to_string(a.dimension()) + "-dim and " +
                            std::to_string(b.dimension()) + "-dim vectors");
  if (a.is_zero() || b.is_zero()) throw ZeroVector("cosine similarity of a zero vector");

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  double sim = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(sim, -1.0, 1.0);
}

ReferenceSet top_k(const EmbeddingVector& query, const std::vector<CorpusRecord>& corpus,
                   std::size_t k) {
  if (corpus.empty()) throw EmptyCorpus("retrieval over an empty corpus");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].embedding)
      throw Error("corpus record " + corpus[i].id + " has no embedding");
    scored.emplace_back(cosine_similarity(query, *corpus[i].embedding), i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;  // stable: ties keep corpus order
  });

  ReferenceSet result;
  result.k = k;
  std::size_t n = std::min(k, scored.size());
  result.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.entries.push_back({corpus[scored[i].second], scored[i].first});
  }
  return result;
}

ReferenceSet top_k(const std::string& query_text, const std::vector<CorpusRecord>& corpus,
                   std::size_t k, const Embedder& embedder) {
  return top_k(embedder.embed(normalize_ws(query_text)), corpus, k);
}

ReferenceSet top_k(const Obligation& query, const std::vector<CorpusRecord>& corpus,
                   std::size_t k, const Embedder& embedder) {
  return top_k(query.assertion, corpus, k, embedder);
}

void embed_corpus(std::vector<CorpusRecord>& records, const Embedder& embedder) {
  std::vector<std::size_t> missing;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].embedding) {
      missing.push_back(i);
      texts.push_back(records[i].statement.normalized_text);
    }
  }
  if (missing.empty()) return;
  std::vector<EmbeddingVector> vectors = embedder.embed_batch(texts);
  for (std::size_t j = 0; j < missing.size(); ++j) {
    records[missing[j]].embedding = std::move(vectors[j]);
  }
}

}  // namespace tlaproof
