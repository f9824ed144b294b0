#include "ragxlate/llmclient.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "http_util.hpp"
#include "io_util.hpp"
#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

using nlohmann::json;

constexpr const char* kMockScheme = "mock:";

bool is_mock_endpoint(const std::string& endpoint) {
  return endpoint.rfind(kMockScheme, 0) == 0;
}

// Finds the last complete ``` ... ``` block in `text`; returns its inner
// content (without the fence lines) when one exists.
std::optional<std::string> last_fenced_block(const std::string& text) {
  std::optional<std::string> found;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = text.find("```", pos);
    if (open == std::string::npos) break;
    const std::size_t body = text.find('\n', open);
    if (body == std::string::npos) break;
    const std::size_t close = text.find("```", body + 1);
    if (close == std::string::npos) break;
    std::string content = text.substr(body + 1, close - body - 1);
    if (!content.empty() && content.back() == '\n') content.pop_back();
    found = std::move(content);
    pos = close + 3;
  }
  return found;
}

bool is_blank(const std::string& text) {
  return text.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string trim(const std::string& text) {
  const std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const std::size_t e = text.find_last_not_of(" \t\r\n");
  return text.substr(b, e - b + 1);
}

// Characters that essentially never appear in running prose but are common
// in code; a line without any of them is treated as prose.
bool looks_like_prose(const std::string& line) {
  return line.find_first_of(";{}()[]=<>+-*/%&|^~#\"'`@\\") == std::string::npos;
}

}  // namespace

std::string to_string(TranslationStatus s) {
  switch (s) {
    case TranslationStatus::Ok:
      return "ok";
    case TranslationStatus::ContextOverflow:
      return "context_overflow";
    case TranslationStatus::TransportFailure:
      return "transport_failure";
  }
  return "unknown";
}

TranslationStatus translation_status_from_string(const std::string& s) {
  if (s == "ok") return TranslationStatus::Ok;
  if (s == "context_overflow") return TranslationStatus::ContextOverflow;
  if (s == "transport_failure") return TranslationStatus::TransportFailure;
  throw ParseError("unknown translation status: " + s);
}

std::string MockModel::complete(const Prompt& prompt) {
  const std::string& u = prompt.user;
  std::string payload;

  if (auto fenced = last_fenced_block(u); fenced.has_value()) {
    payload = std::move(*fenced);
  } else if (const std::size_t t = u.rfind("Here's the CPP translation:\n");
             t != std::string::npos) {
    // final shot's target code, running up to the closing lead-in
    const std::size_t start = t + std::string("Here's the CPP translation:\n").size();
    const std::size_t end = u.find(
        "\nNow translate the following code from Fortran to CPP:\n", start);
    if (end != std::string::npos) {
      payload = u.substr(start, end - start);
    } else {
      payload = u.substr(start);
      if (!payload.empty() && payload.back() == '\n') payload.pop_back();
    }
  } else if (const std::size_t z =
                 u.find("Translate the following code from Fortran to CPP:\n");
             z != std::string::npos) {
    payload = u.substr(
        z + std::string("Translate the following code from Fortran to CPP:\n").size());
  } else if (const std::size_t nz = u.find(
                 "Now translate the following code from Fortran to CPP:\n");
             nz != std::string::npos) {
    payload = u.substr(
        nz +
        std::string("Now translate the following code from Fortran to CPP:\n").size());
  } else {
    payload = u;
  }
  return "```cpp\n" + payload + "\n```";
}

HttpChatModel::HttpChatModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty() || is_mock_endpoint(cfg_.endpoint))
    throw ArgumentError("HttpChatModel needs an http(s) endpoint");
  if (cfg_.context_tokens < 1)
    throw ArgumentError("model config: context_tokens must be >= 1");
  if (cfg_.temperature < 0.0)
    throw ArgumentError("model config: temperature must be >= 0");
}

std::string HttpChatModel::complete(const Prompt& prompt) {
  json body;
  body["model"] = cfg_.model_id;
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_output_tokens;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", prompt.system}},
      json{{"role", "user"}, {"content", prompt.user}},
  });

  const std::string reply = detail::post_json_with_retries(
      cfg_.endpoint, body.dump(), cfg_.api_key_env, cfg_.timeout_ms,
      cfg_.max_retries, cfg_.retry_backoff_ms);

  const json j = json::parse(reply, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw ContractError("chat endpoint returned non-JSON");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw ContractError("chat reply missing choices[0]");
  const json& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    throw ContractError("chat reply missing choices[0].message.content");
  return choice["message"]["content"].get<std::string>();
}

std::unique_ptr<ChatModel> make_model(const ModelConfig& cfg) {
  if (is_mock_endpoint(cfg.endpoint)) return std::make_unique<MockModel>(cfg);
  return std::make_unique<HttpChatModel>(cfg);
}

std::vector<ModelConfig> load_model_configs(const std::string& path) {
  const json j = json::parse(detail::read_file(path), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array())
    throw ParseError("model config file must be a JSON array: " + path);

  std::vector<ModelConfig> out;
  for (const json& m : j) {
    if (!m.is_object() || !m.contains("model_id") || !m.contains("endpoint"))
      throw ParseError("model config entries need model_id and endpoint: " + path);
    ModelConfig cfg;
    cfg.model_id = m["model_id"].get<std::string>();
    cfg.endpoint = m["endpoint"].get<std::string>();
    cfg.temperature = m.value("temperature", cfg.temperature);
    cfg.max_output_tokens = m.value("max_output_tokens", cfg.max_output_tokens);
    cfg.context_tokens = m.value("context_tokens", cfg.context_tokens);
    cfg.timeout_ms = m.value("timeout_ms", cfg.timeout_ms);
    cfg.max_retries = m.value("max_retries", cfg.max_retries);
    cfg.retry_backoff_ms = m.value("retry_backoff_ms", cfg.retry_backoff_ms);
    cfg.api_key_env = m.value("api_key_env", cfg.api_key_env);
    out.push_back(std::move(cfg));
  }
  return out;
}

std::string extract_code(const std::string& raw) {
  if (is_blank(raw)) throw ExtractionError("blank model response");

  // first fenced block, language tag ignored; an unterminated fence runs to
  // the end of input
  const std::size_t open = raw.find("```");
  if (open != std::string::npos) {
    const std::size_t body = raw.find('\n', open);
    std::string content;
    if (body != std::string::npos) {
      const std::size_t close = raw.find("```", body + 1);
      content = close == std::string::npos
                    ? raw.substr(body + 1)
                    : raw.substr(body + 1, close - body - 1);
      if (!content.empty() && content.back() == '\n') content.pop_back();
    }
    if (is_blank(content))
      throw ExtractionError("fenced code block is empty");
    return content;
  }

  // no fence: strip leading/trailing prose lines
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t nl = raw.find('\n', start);
    if (nl == std::string::npos) nl = raw.size();
    lines.push_back(raw.substr(start, nl - start));
    if (nl == raw.size()) break;
    start = nl + 1;
  }
  std::size_t lo = 0;
  std::size_t hi = lines.size();
  while (lo < hi && (is_blank(lines[lo]) || looks_like_prose(lines[lo]))) ++lo;
  while (hi > lo && (is_blank(lines[hi - 1]) || looks_like_prose(lines[hi - 1])))
    --hi;

  std::string kept;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i > lo) kept += '\n';
    kept += lines[i];
  }
  if (!is_blank(kept)) return kept;
  return trim(raw);  // all prose: better to return it than to drop everything
}

TranslationResult translate(const Prompt& prompt, ChatModel& model,
                            const std::string& query_id, int k_requested) {
  const ModelConfig& cfg = model.config();

  TranslationResult r;
  r.query_id = query_id;
  r.model_id = cfg.model_id;
  r.k_requested = k_requested;
  r.shots = prompt.shots;
  r.example_ids = prompt.example_ids;

  if (prompt.est_tokens + cfg.max_output_tokens > cfg.context_tokens) {
    r.status = TranslationStatus::ContextOverflow;
    r.error = "estimated " + std::to_string(prompt.est_tokens) + " tokens + " +
              std::to_string(cfg.max_output_tokens) + " output exceeds context " +
              std::to_string(cfg.context_tokens);
    return r;
  }

  const bool mock = is_mock_endpoint(cfg.endpoint);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.raw_response = model.complete(prompt);
  } catch (const Error& e) {
    r.status = TranslationStatus::TransportFailure;
    r.error = e.what();
    return r;
  }
  if (!mock) {
    r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  }

  try {
    r.candidate_cpp = extract_code(r.raw_response);
  } catch (const ExtractionError& e) {
    r.status = TranslationStatus::TransportFailure;
    r.error = std::string("unusable model output: ") + e.what();
    return r;
  }
  r.status = TranslationStatus::Ok;
  return r;
}

std::string to_jsonl(const TranslationResult& r) {
  json j;
  j["query_id"] = r.query_id;
  j["model_id"] = r.model_id;
  j["k_requested"] = r.k_requested;
  j["shots"] = r.shots;
  j["status"] = to_string(r.status);
  j["raw_response"] = r.raw_response;
  j["candidate_cpp"] = r.candidate_cpp;
  j["latency_ms"] = r.latency_ms;
  j["example_ids"] = r.example_ids;
  j["shot_scores"] = r.shot_scores;
  j["error"] = r.error;
  return j.dump();
}

TranslationResult result_from_json_line(const std::string& line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("malformed result row");
  try {
    TranslationResult r;
    r.query_id = j.at("query_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.k_requested = j.value("k_requested", 0);
    r.shots = j.value("shots", 0);
    r.status = translation_status_from_string(j.value("status", std::string("ok")));
    r.raw_response = j.value("raw_response", std::string{});
    r.candidate_cpp = j.value("candidate_cpp", std::string{});
    r.latency_ms = j.value("latency_ms", 0LL);
    if (j.contains("example_ids"))
      r.example_ids = j["example_ids"].get<std::vector<std::string>>();
    if (j.contains("shot_scores"))
      r.shot_scores = j["shot_scores"].get<std::vector<double>>();
    r.error = j.value("error", std::string{});
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed result row: ") + e.what());
  }
}

std::vector<TranslationResult> load_results(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<TranslationResult> out;
  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(result_from_json_line(line));
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TranslationResult> translate_batch(
    const Dataset& queries, const VectorStore& store,
    EmbeddingBackend* query_backend, const std::vector<ModelConfig>& cfgs,
    const std::vector<int>& k_values, const BatchOptions& opts) {
  if (opts.parallelism < 1)
    throw ArgumentError("translate_batch: parallelism must be >= 1");
  for (const int k : k_values)
    if (k < 0) throw ArgumentError("translate_batch: shot counts must be >= 0");

  // one model instance per config, shared across workers (stateless clients)
  std::vector<std::unique_ptr<ChatModel>> models;
  models.reserve(cfgs.size());
  for (const ModelConfig& cfg : cfgs) models.push_back(make_model(cfg));

  struct Job {
    const CodePair* query;
    std::size_t model_idx;
    int k;
  };
  // deterministic row order: query, then model, then k
  std::vector<Job> jobs;
  for (const CodePair& q : queries.pairs)
    for (std::size_t m = 0; m < cfgs.size(); ++m)
      for (const int k : k_values) jobs.push_back(Job{&q, m, k});

  // resume: skip rows already present in the sink
  std::set<std::tuple<std::string, std::string, int>> done;
  if (!opts.out_path.empty() && opts.resume &&
      std::filesystem::exists(opts.out_path)) {
    for (const TranslationResult& r : load_results(opts.out_path))
      done.emplace(r.query_id, r.model_id, r.k_requested);
  }
  std::vector<Job> todo;
  for (const Job& job : jobs) {
    if (done.count({job.query->id, cfgs[job.model_idx].model_id, job.k}) == 0)
      todo.push_back(job);
  }

  const std::size_t n = todo.size();
  std::vector<std::optional<TranslationResult>> slots(n);

  std::optional<std::ofstream> sink;
  if (!opts.out_path.empty()) {
    std::filesystem::path p(opts.out_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    sink.emplace(opts.out_path, (opts.resume ? std::ios::app : std::ios::trunc) |
                                    std::ios::binary);
    if (!*sink)
      throw ArgumentError("cannot open results sink: " + opts.out_path);
  }

  std::mutex flush_mutex;
  std::size_t flushed = 0;
  // rows leave in job order no matter how workers interleave, so a crash
  // loses only in-flight items and reruns reproduce identical bytes
  auto flush_ready = [&](std::vector<TranslationResult>* out) {
    const std::lock_guard<std::mutex> lock(flush_mutex);
    while (flushed < n && slots[flushed].has_value()) {
      if (sink.has_value()) {
        *sink << to_jsonl(*slots[flushed]) << '\n';
        sink->flush();
      }
      if (out != nullptr) out->push_back(*slots[flushed]);
      ++flushed;
    }
  };

  auto run_job = [&](const Job& job) -> TranslationResult {
    const CodePair& q = *job.query;
    const ModelConfig& cfg = cfgs[job.model_idx];
    try {
      if (job.k == 0) {
        return translate(build_zero_shot(q), *models[job.model_idx], q.id, 0);
      }
      const VectorRecord* own = store.find(q.id);
      EmbeddingVector qe;
      if (own != nullptr) {
        qe = own->embedding;
      } else if (query_backend != nullptr) {
        qe = query_backend->embed(q.fortran);
      } else {
        throw ArgumentError("query '" + q.id +
                            "' is not in the store and no query backend was given");
      }
      RetrievalQuery rq;
      rq.query_embedding = std::move(qe);
      rq.k = job.k;
      rq.metric = opts.metric;
      rq.order = opts.order;
      rq.exclude_ids = {q.id};  // leave-one-out, always
      const std::vector<RetrievedExample> examples = store.query(rq);

      Prompt prompt;
      try {
        prompt = build_few_shot(q, examples,
                                cfg.context_tokens - cfg.max_output_tokens);
      } catch (const ContextOverflowError& e) {
        TranslationResult r;
        r.query_id = q.id;
        r.model_id = cfg.model_id;
        r.k_requested = job.k;
        r.status = TranslationStatus::ContextOverflow;
        r.error = e.what();
        return r;
      }
      TranslationResult r = translate(prompt, *models[job.model_idx], q.id, job.k);
      r.shot_scores.reserve(prompt.example_ids.size());
      for (std::size_t i = 0; i < prompt.example_ids.size(); ++i)
        r.shot_scores.push_back(examples[i].score);
      return r;
    } catch (const Error& e) {
      TranslationResult r;
      r.query_id = q.id;
      r.model_id = cfg.model_id;
      r.k_requested = job.k;
      r.status = TranslationStatus::TransportFailure;
      r.error = e.what();
      return r;
    }
  };

  std::vector<TranslationResult> fresh;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      slots[i] = run_job(todo[i]);
      flush_ready(&fresh);
    }
  };

  const int workers = static_cast<int>(
      std::min<std::size_t>(opts.parallelism, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  flush_ready(&fresh);
  return fresh;
}

}  // namespace ragxlate
