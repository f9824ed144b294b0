#include "ragxlate/embedding.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "http_util.hpp"
#include "io_util.hpp"
#include "ragxlate/errors.hpp"
#include "ragxlate/hashing.hpp"
#include "ragxlate/tokenizer.hpp"

namespace ragxlate {

namespace {

using nlohmann::json;

void validate_config(const EmbeddingBackendConfig& cfg) {
  if (cfg.dim < 1) throw ArgumentError("embedding config: dim must be >= 1");
  if (cfg.max_tokens < 1)
    throw ArgumentError("embedding config: max_tokens must be >= 1");
}

}  // namespace

LocalEmbedder::LocalEmbedder(EmbeddingBackendConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
}

EmbeddingVector LocalEmbedder::embed(const std::string& code) {
  std::vector<Token> tokens = tokenize(code);
  if (tokens.size() > static_cast<std::size_t>(cfg_.max_tokens))
    tokens.resize(cfg_.max_tokens);
  if (tokens.empty())
    throw DomainError("cannot embed: input has no tokens after truncation");

  std::vector<long long> counts(cfg_.dim, 0);
  for (const Token& t : tokens)
    counts[fnv1a64(t.text, kEmbedHashSeed) % cfg_.dim] += 1;

  EmbeddingVector v;
  v.model_id = cfg_.model_id;
  v.dim = cfg_.dim;
  v.values.resize(cfg_.dim, 0.0);
  double norm_sq = 0.0;
  for (int b = 0; b < cfg_.dim; ++b) {
    if (counts[b] == 0) continue;
    const double w = 1.0 + std::log(static_cast<double>(counts[b]));
    v.values[b] = w;
    norm_sq += w * w;
  }
  // >= 1 token implies >= 1 bucket with weight >= 1, so the norm is positive
  const double norm = std::sqrt(norm_sq);
  for (double& x : v.values) x /= norm;
  return v;
}

RemoteEmbedder::RemoteEmbedder(EmbeddingBackendConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  if (cfg_.endpoint.empty())
    throw ArgumentError("remote embedding backend needs an endpoint");
}

EmbeddingVector RemoteEmbedder::embed(const std::string& code) {
  // Truncate to the first max_tokens tokens by cutting the original bytes at
  // the last kept token's end, so the text the service sees matches the
  // truncation contract exactly.
  std::string payload = code;
  const std::vector<Token> tokens = tokenize(code);
  if (tokens.empty())
    throw DomainError("cannot embed: input has no tokens after truncation");
  if (tokens.size() > static_cast<std::size_t>(cfg_.max_tokens))
    payload = code.substr(0, tokens[cfg_.max_tokens - 1].end);

  json body;
  body["model"] = cfg_.model_id;
  body["input"] = json::array({payload});

  const std::string reply = detail::post_json_with_retries(
      cfg_.endpoint, body.dump(), cfg_.api_key_env, cfg_.timeout_ms,
      cfg_.max_retries, cfg_.retry_backoff_ms);

  const json j = json::parse(reply, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw ContractError("embeddings endpoint returned non-JSON");
  if (!j.contains("data") || !j["data"].is_array() || j["data"].empty() ||
      !j["data"][0].contains("embedding") ||
      !j["data"][0]["embedding"].is_array())
    throw ContractError("embeddings reply missing data[0].embedding");

  const json& raw = j["data"][0]["embedding"];
  if (static_cast<int>(raw.size()) != cfg_.dim)
    throw ContractError("embedding dimension mismatch: expected " +
                        std::to_string(cfg_.dim) + ", got " +
                        std::to_string(raw.size()));

  EmbeddingVector v;
  v.model_id = cfg_.model_id;
  v.dim = cfg_.dim;
  v.values.reserve(raw.size());
  for (const json& x : raw) {
    if (!x.is_number())
      throw ContractError("embedding contains a non-numeric entry");
    const double d = x.get<double>();
    if (!std::isfinite(d))
      throw ContractError("embedding contains a non-finite entry");
    v.values.push_back(d);
  }
  return v;
}

std::unique_ptr<EmbeddingBackend> make_backend(const EmbeddingBackendConfig& cfg) {
  if (cfg.endpoint.empty()) return std::make_unique<LocalEmbedder>(cfg);
  return std::make_unique<RemoteEmbedder>(cfg);
}

EmbedBatchResult embed_dataset(const Dataset& ds, EmbeddingBackend& backend,
                               int parallelism) {
  if (parallelism < 1) throw ArgumentError("embed_dataset: parallelism >= 1");

  const std::size_t n = ds.pairs.size();
  std::vector<std::optional<EmbeddingVector>> slots(n);
  std::vector<std::optional<EmbeddingFailure>> errors(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const CodePair& p = ds.pairs[i];
      try {
        slots[i] = backend.embed(p.fortran);
      } catch (const Error& e) {
        errors[i] = EmbeddingFailure{p.id, e.what()};
      }
    }
  };

  const int workers =
      static_cast<int>(std::min<std::size_t>(parallelism, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  // collect in dataset order regardless of worker scheduling
  EmbedBatchResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i].has_value()) {
      out.vectors.emplace_back(ds.pairs[i].id, std::move(*slots[i]));
    } else if (errors[i].has_value()) {
      out.failures.push_back(std::move(*errors[i]));
    }
  }
  return out;
}

void save_vectors(const EmbedBatchResult& batch, const std::string& path) {
  std::string out;
  for (const auto& [id, vec] : batch.vectors) {
    json j;
    j["dim"] = vec.dim;
    j["id"] = id;
    j["model_id"] = vec.model_id;
    j["values"] = vec.values;
    out += j.dump();
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

std::vector<std::pair<std::string, EmbeddingVector>> load_vectors(
    const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::pair<std::string, EmbeddingVector>> out;

  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j.contains("values") || !j["values"].is_array())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed vector row");
    EmbeddingVector v;
    v.model_id = j.value("model_id", std::string{});
    v.values = j["values"].get<std::vector<double>>();
    v.dim = j.value("dim", static_cast<int>(v.values.size()));
    if (v.dim != static_cast<int>(v.values.size()))
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": dim field disagrees with values length");
    out.emplace_back(j["id"].get<std::string>(), std::move(v));
  }
  return out;
}

}  // namespace ragxlate
