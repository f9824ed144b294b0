#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ragxlate/corpus.hpp"

namespace ragxlate {

// Token-limit presets for small- vs large-context embedding models.
inline constexpr int kTokenLimitSmall = 512;
inline constexpr int kTokenLimitLarge = 8192;

// Seed of the FNV-1a bucket hash used by the local embedder (the standard
// FNV offset basis). Documented so vectors can be recomputed independently.
inline constexpr std::uint64_t kEmbedHashSeed = 0xcbf29ce484222325ULL;

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
  int dim = 0;
};

struct EmbeddingBackendConfig {
  std::string model_id = "local-hash-v1";
  int dim = 64;
  int max_tokens = kTokenLimitSmall;  // inputs are truncated to this many tokens
  std::string endpoint;               // empty selects the local backend
  int timeout_ms = 30000;             // remote only
  int max_retries = 3;                // remote only
  int retry_backoff_ms = 250;         // remote only: base of the exponential backoff
  std::string api_key_env = "RAGXLATE_EMBED_API_KEY";
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  // Deterministic for a fixed config and input. The input is tokenized and
  // truncated to the first max_tokens tokens before embedding.
  virtual EmbeddingVector embed(const std::string& code) = 0;

  virtual const EmbeddingBackendConfig& config() const = 0;
};

// Offline deterministic embedder: hashed token frequency. Every token text is
// hashed with FNV-1a (seed kEmbedHashSeed) into one of cfg.dim buckets; each
// non-empty bucket weighs 1 + ln(count); the vector is L2-normalized. Similar
// code shares tokens, so it lands close in cosine space — close enough for
// retrieval tests to be meaningful without any model weights.
class LocalEmbedder : public EmbeddingBackend {
 public:
  explicit LocalEmbedder(EmbeddingBackendConfig cfg);

  EmbeddingVector embed(const std::string& code) override;
  const EmbeddingBackendConfig& config() const override { return cfg_; }

 private:
  EmbeddingBackendConfig cfg_;
};

// Client for a minimal embeddings HTTP API:
//   POST cfg.endpoint   body {"model": ..., "input": [code]}
//   response            {"data": [{"embedding": [...]}]}
// Transient failures are retried with exponential backoff; a reply with the
// wrong dimension raises ContractError. If cfg.api_key_env names a set
// environment variable, its value is sent as a bearer token.
class RemoteEmbedder : public EmbeddingBackend {
 public:
  explicit RemoteEmbedder(EmbeddingBackendConfig cfg);

  EmbeddingVector embed(const std::string& code) override;
  const EmbeddingBackendConfig& config() const override { return cfg_; }

 private:
  EmbeddingBackendConfig cfg_;
};

// endpoint empty -> LocalEmbedder, otherwise RemoteEmbedder.
std::unique_ptr<EmbeddingBackend> make_backend(const EmbeddingBackendConfig& cfg);

struct EmbeddingFailure {
  std::string pair_id;
  std::string message;
};

struct EmbedBatchResult {
  // (pair id, vector) in dataset order; failed pairs are absent here.
  std::vector<std::pair<std::string, EmbeddingVector>> vectors;
  std::vector<EmbeddingFailure> failures;  // collected, never silently dropped
};

// One vector per pair, order preserved; per-item errors are collected into
// `failures` instead of aborting the batch. `parallelism` bounds concurrent
// embed calls (useful for remote backends); output order is independent of
// scheduling.
EmbedBatchResult embed_dataset(const Dataset& ds, EmbeddingBackend& backend,
                               int parallelism = 4);

// JSONL persistence: {"dim":N,"id":...,"model_id":...,"values":[...]} rows.
void save_vectors(const EmbedBatchResult& batch, const std::string& path);
std::vector<std::pair<std::string, EmbeddingVector>> load_vectors(
    const std::string& path);

}  // namespace ragxlate
