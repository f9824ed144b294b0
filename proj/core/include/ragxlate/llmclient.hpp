#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ragxlate/corpus.hpp"
#include "ragxlate/embedding.hpp"
#include "ragxlate/prompting.hpp"
#include "ragxlate/vectorstore.hpp"

namespace ragxlate {

struct ModelConfig {
  std::string model_id;
  std::string endpoint;  // "mock:" selects the offline mock model
  double temperature = 0.0;
  int max_output_tokens = 1024;
  int context_tokens = 8192;
  int timeout_ms = 60000;
  int max_retries = 3;
  int retry_backoff_ms = 250;
  std::string api_key_env = "RAGXLATE_LLM_API_KEY";
};

enum class TranslationStatus { Ok, ContextOverflow, TransportFailure };

std::string to_string(TranslationStatus s);
TranslationStatus translation_status_from_string(const std::string& s);

struct TranslationResult {
  std::string query_id;
  std::string model_id;
  int k_requested = 0;  // shots asked for; the resume key is (query, model, k_requested)
  int shots = 0;        // shots actually included in the prompt
  std::string raw_response;
  std::string candidate_cpp;
  TranslationStatus status = TranslationStatus::Ok;
  long long latency_ms = 0;  // always 0 for the mock model, keeping runs byte-stable
  std::vector<std::string> example_ids;  // ids of the retrieved shots, rank order
  std::vector<double> shot_scores;       // retrieval score per included example
  std::string error;                     // diagnostic when status != Ok
};

class ChatModel {
 public:
  virtual ~ChatModel() = default;

  // Returns the raw assistant text; throws TransportError/ContractError on
  // unrecoverable failures.
  virtual std::string complete(const Prompt& prompt) = 0;

  virtual const ModelConfig& config() const = 0;
};

// Offline deterministic model. Echoes, wrapped in a ```cpp fence: the last
// fenced block of the user message if there is one; otherwise the final
// shot's C++ section (few-shot prompts); otherwise the query snippet itself
// (zero-shot prompts). Few-shot runs therefore produce candidates identical
// to the retrieved shot's target code — a strong end-to-end self-check.
class MockModel : public ChatModel {
 public:
  explicit MockModel(ModelConfig cfg) : cfg_(std::move(cfg)) {}

  std::string complete(const Prompt& prompt) override;
  const ModelConfig& config() const override { return cfg_; }

 private:
  ModelConfig cfg_;
};

// chat-completions wire format:
//   POST endpoint  {"model","temperature","max_tokens","messages":[...]}
//   response       {"choices":[{"message":{"content": ...}}]}
// Retries transient failures with exponential backoff; a well-formed HTTP
// reply that violates the shape above raises ContractError.
class HttpChatModel : public ChatModel {
 public:
  explicit HttpChatModel(ModelConfig cfg);

  std::string complete(const Prompt& prompt) override;
  const ModelConfig& config() const override { return cfg_; }

 private:
  ModelConfig cfg_;
};

// endpoint "mock:" -> MockModel, anything else -> HttpChatModel.
std::unique_ptr<ChatModel> make_model(const ModelConfig& cfg);

// JSON array of ModelConfig objects; model_id and endpoint are required,
// everything else defaults.
std::vector<ModelConfig> load_model_configs(const std::string& path);

// Returns the contents of the first fenced code block (``` or ```lang). With
// no fence, strips leading/trailing prose lines (lines with no code
// punctuation) and falls back to the trimmed raw text, so the result is never
// empty when raw has a non-blank line. ExtractionError otherwise.
std::string extract_code(const std::string& raw);

// Gate on the context budget (no request is sent when
// est_tokens + max_output_tokens > context_tokens), send, retry transient
// failures, extract the candidate. Failures land in `status`/`error`; this
// function does not throw on per-request problems.
TranslationResult translate(const Prompt& prompt, ChatModel& model,
                            const std::string& query_id, int k_requested);

struct BatchOptions {
  Metric metric = Metric::Cosine;
  Order order = Order::Nearest;
  int parallelism = 4;    // bounded concurrent translate calls
  std::string out_path;   // JSONL sink, appended as rows complete ("" = none)
  bool resume = true;     // skip (query, model, k) rows already in out_path
};

// For every (query, model, k): retrieve k examples (the query's own id is
// always excluded), build the prompt (build_zero_shot for k = 0), translate,
// and persist. Rows are written in deterministic (query, model, k) order — a
// crash loses only in-flight items and a resumed run appends the remainder,
// reproducing the bytes of an uninterrupted run. Per-item errors become row
// statuses; the batch never aborts. Queries absent from the store are
// embedded with `query_backend` (pass nullptr when all queries are stored).
// Returns the newly produced rows (resumed rows are not re-returned).
std::vector<TranslationResult> translate_batch(
    const Dataset& queries, const VectorStore& store,
    EmbeddingBackend* query_backend, const std::vector<ModelConfig>& cfgs,
    const std::vector<int>& k_values, const BatchOptions& opts = {});

std::string to_jsonl(const TranslationResult& r);
TranslationResult result_from_json_line(const std::string& line);
std::vector<TranslationResult> load_results(const std::string& path);

}  // namespace ragxlate
