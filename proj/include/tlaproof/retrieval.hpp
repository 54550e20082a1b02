#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tlaproof/corpus.hpp"

namespace tlaproof {

struct EmbedderUnavailable : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct ZeroVector : Error {
  using Error::Error;
};
struct EmptyCorpus : Error {
  using Error::Error;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;

  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
};

// Deterministic offline embedder: hashed character-trigram term frequencies,
// L2-normalized. Input is whitespace-normalized first, so texts that differ
// only in spacing embed identically. Any nonempty input yields a nonzero
// vector.
class FallbackEmbedder : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit FallbackEmbedder(std::size_t dimension = kDefaultDimension);
  EmbeddingVector embed(const std::string& text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string id() const override;

 private:
  std::size_t dimension_;
};

// Client for an HTTP embedding service: POST {"texts": [...]} to the
// endpoint, expect {"embeddings": [[...], ...]}. Throws EmbedderUnavailable
// when the service cannot be reached or answers with anything unusable.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(std::string endpoint_url, std::size_t dimension, std::string api_key = "");
  EmbeddingVector embed(const std::string& text) const override;
  // one POST for the whole batch
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string id() const override;

 private:
  std::string endpoint_url_;
  std::size_t dimension_;
  std::string api_key_;
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct ReferenceSet {
  struct Entry {
    CorpusRecord record;
    double score;
  };
  std::vector<Entry> entries;  // descending score, stable on ties
  std::size_t k = 0;           // requested size
};

// Exact exhaustive scan: the k records with the highest cosine similarity to
// the query, ties broken by corpus order. Records must already carry
// embeddings of the query's dimension.
ReferenceSet top_k(const EmbeddingVector& query, const std::vector<CorpusRecord>& corpus,
                   std::size_t k);
ReferenceSet top_k(const std::string& query_text, const std::vector<CorpusRecord>& corpus,
                   std::size_t k, const Embedder& embedder);
ReferenceSet top_k(const Obligation& query, const std::vector<CorpusRecord>& corpus, std::size_t k,
                   const Embedder& embedder);

// Fills in missing embeddings in place.
void embed_corpus(std::vector<CorpusRecord>& records, const Embedder& embedder);

}  // namespace tlaproof
