#include "ragxlate/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "io_util.hpp"
#include "ragxlate/errors.hpp"
#include "ragxlate/hashing.hpp"
#include "ragxlate/llmclient.hpp"
#include "ragxlate/report.hpp"
#include "ragxlate/version.hpp"

namespace ragxlate {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// config file parsing

struct RawValue {
  enum class Kind { String, Number, List } kind = Kind::String;
  std::string str;
  double num = 0.0;
  std::vector<RawValue> items;
  int line = 0;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') quoted = !quoted;
    if (c == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

RawValue parse_value(const std::string& text, int line_no, const std::string& where) {
  RawValue v;
  v.line = line_no;
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(where + ": missing value");

  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw ConfigError(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == '\\' && i + 2 < t.size() && (t[i + 1] == '"' || t[i + 1] == '\\')) {
        out += t[i + 1];
        ++i;
      } else {
        out += t[i];
      }
    }
    v.kind = RawValue::Kind::String;
    v.str = std::move(out);
    return v;
  }

  if (t.front() == '[') {
    if (t.back() != ']') throw ConfigError(where + ": unterminated list");
    v.kind = RawValue::Kind::List;
    const std::string inner = t.substr(1, t.size() - 2);
    std::string cur;
    bool quoted = false;
    for (const char c : inner) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        if (!trim(cur).empty()) v.items.push_back(parse_value(cur, line_no, where));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) v.items.push_back(parse_value(cur, line_no, where));
    return v;
  }

  try {
    std::size_t used = 0;
    v.num = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing junk");
    v.kind = RawValue::Kind::Number;
    v.str = t;
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse value '" + t + "'");
  }
}

std::string want_string(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Kind::String)
    throw ConfigError("key '" + key + "' needs a quoted string value");
  return v.str;
}

double want_number(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Kind::Number)
    throw ConfigError("key '" + key + "' needs a numeric value");
  return v.num;
}

int want_int(const RawValue& v, const std::string& key) {
  const double d = want_number(v, key);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError("key '" + key + "' needs an integer value");
  return i;
}

// ---------------------------------------------------------------------------
// path and io helpers

std::string resolve_path(const std::string& config_dir, const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(config_dir) / p).lexically_normal().string();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// config facets that influence results, as canonical JSON (output_dir and
// config_dir deliberately excluded: where artifacts land must not change them)
json config_facets(const RunConfig& cfg) {
  json j;
  j["dataset_name"] = cfg.dataset_name;
  j["min_bytes"] = cfg.min_bytes.has_value() ? json(*cfg.min_bytes) : json(nullptr);
  j["max_bytes"] = cfg.max_bytes.has_value() ? json(*cfg.max_bytes) : json(nullptr);
  j["embedding"] = {
      {"model_id", cfg.embedding.model_id},
      {"dim", cfg.embedding.dim},
      {"max_tokens", cfg.embedding.max_tokens},
      {"endpoint", cfg.embedding.endpoint},
  };
  j["metric"] = to_string(cfg.metric);
  j["order"] = to_string(cfg.order);
  j["shots"] = cfg.shots;
  j["weights"] = cfg.weights;
  j["kw_weight"] = cfg.kw_weight;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  const std::string text = detail::read_file(path);
  RunConfig cfg;
  {
    const fs::path parent = fs::path(path).parent_path();
    cfg.config_dir = parent.empty() ? "." : parent.string();
  }

  std::string section;
  std::set<std::string> seen;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string raw_line = text.substr(start, nl - start);
    const bool at_end = nl == text.size();
    start = nl + 1;
    ++line_no;

    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) {
      if (at_end) break;
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      if (at_end) break;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string bare = trim(line.substr(0, eq));
    if (bare.empty()) throw ConfigError(where + ": empty key");
    const std::string key = section.empty() ? bare : section + "." + bare;
    if (!seen.insert(key).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
    const RawValue v = parse_value(line.substr(eq + 1), line_no, where);

    if (key == "dataset") {
      cfg.dataset_path = want_string(v, key);
    } else if (key == "dataset_name") {
      cfg.dataset_name = want_string(v, key);
    } else if (key == "min_bytes") {
      const int n = want_int(v, key);
      if (n < 0) throw ConfigError(where + ": min_bytes must be >= 0");
      cfg.min_bytes = static_cast<std::size_t>(n);
    } else if (key == "max_bytes") {
      const int n = want_int(v, key);
      if (n < 0) throw ConfigError(where + ": max_bytes must be >= 0");
      cfg.max_bytes = static_cast<std::size_t>(n);
    } else if (key == "output_dir") {
      cfg.output_dir = want_string(v, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned>(want_int(v, key));
    } else if (key == "parallelism") {
      cfg.parallelism = want_int(v, key);
    } else if (key == "embedding.model_id") {
      cfg.embedding.model_id = want_string(v, key);
    } else if (key == "embedding.dim") {
      cfg.embedding.dim = want_int(v, key);
    } else if (key == "embedding.max_tokens") {
      cfg.embedding.max_tokens = want_int(v, key);
    } else if (key == "embedding.endpoint") {
      cfg.embedding.endpoint = want_string(v, key);
    } else if (key == "embedding.timeout_ms") {
      cfg.embedding.timeout_ms = want_int(v, key);
    } else if (key == "embedding.max_retries") {
      cfg.embedding.max_retries = want_int(v, key);
    } else if (key == "embedding.retry_backoff_ms") {
      cfg.embedding.retry_backoff_ms = want_int(v, key);
    } else if (key == "embedding.api_key_env") {
      cfg.embedding.api_key_env = want_string(v, key);
    } else if (key == "retrieval.metric") {
      cfg.metric = parse_metric(want_string(v, key));
    } else if (key == "retrieval.order") {
      cfg.order = parse_order(want_string(v, key));
    } else if (key == "translate.models") {
      cfg.models_path = want_string(v, key);
    } else if (key == "translate.shots") {
      if (v.kind != RawValue::Kind::List)
        throw ConfigError(where + ": translate.shots needs a list, e.g. [0, 1]");
      cfg.shots.clear();
      for (const RawValue& item : v.items) cfg.shots.push_back(want_int(item, key));
    } else if (key == "evaluate.weights") {
      if (v.kind != RawValue::Kind::List || v.items.size() != 4)
        throw ConfigError(where + ": evaluate.weights needs a 4-element list");
      for (std::size_t i = 0; i < 4; ++i)
        cfg.weights[i] = want_number(v.items[i], key);
    } else if (key == "evaluate.kw_weight") {
      cfg.kw_weight = want_number(v, key);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (at_end) break;
  }

  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  if (cfg.dataset_path.empty())
    throw ConfigError("config: 'dataset' is required");
  const std::string dataset = resolve_path(cfg.config_dir, cfg.dataset_path);
  if (!fs::exists(dataset))
    throw ConfigError("config: dataset file not found: " + dataset);
  if (cfg.models_path.empty())
    throw ConfigError("config: 'translate.models' is required");
  const std::string models = resolve_path(cfg.config_dir, cfg.models_path);
  if (!fs::exists(models))
    throw ConfigError("config: model config file not found: " + models);
  if (cfg.dataset_name.empty())
    throw ConfigError("config: 'dataset_name' must be non-empty");
  if (cfg.output_dir.empty())
    throw ConfigError("config: 'output_dir' must be non-empty");
  if (cfg.min_bytes.has_value() && cfg.max_bytes.has_value() &&
      *cfg.min_bytes > *cfg.max_bytes)
    throw ConfigError("config: min_bytes exceeds max_bytes");
  if (cfg.embedding.dim < 1) throw ConfigError("config: embedding.dim must be >= 1");
  if (cfg.embedding.max_tokens < 1)
    throw ConfigError("config: embedding.max_tokens must be >= 1");
  if (cfg.parallelism < 1) throw ConfigError("config: parallelism must be >= 1");
  if (cfg.shots.empty()) throw ConfigError("config: translate.shots must be non-empty");
  for (const int k : cfg.shots)
    if (k < 0) throw ConfigError("config: shot counts must be >= 0");
  double wsum = 0.0;
  for (const double w : cfg.weights) {
    if (w < 0.0) throw ConfigError("config: evaluate.weights must be >= 0");
    wsum += w;
  }
  if (wsum <= 0.0) throw ConfigError("config: evaluate.weights must not all be zero");
  if (cfg.kw_weight < 1.0)
    throw ConfigError("config: evaluate.kw_weight must be >= 1");
}

std::string config_hash(const RunConfig& cfg) {
  json j = config_facets(cfg);
  // inputs participate by content, not by path, so moving files around
  // without changing them keeps the hash stable
  j["dataset_bytes"] =
      hex64(fnv1a64(detail::read_file(resolve_path(cfg.config_dir, cfg.dataset_path))));
  j["models_bytes"] =
      hex64(fnv1a64(detail::read_file(resolve_path(cfg.config_dir, cfg.models_path))));
  return hex64(fnv1a64(j.dump()));
}

std::string manifest_to_json(const RunManifest& m) {
  ordered_json j;
  j["version"] = m.version;
  j["config_hash"] = m.config_hash;
  j["stages"] = ordered_json::array();
  for (const StageRecord& s : m.stages) {
    ordered_json stage;
    stage["name"] = s.name;
    stage["fingerprint"] = s.fingerprint;
    stage["outputs"] = s.outputs;
    stage["skipped"] = s.skipped;
    j["stages"].push_back(std::move(stage));
  }
  return j.dump(2) + "\n";
}

namespace {

struct StageContext {
  const RunConfig& cfg;
  fs::path out_dir;
  std::map<std::string, StageRecord> previous;  // by stage name, from manifest.json
  RunManifest manifest;

  fs::path out(const std::string& rel) const { return out_dir / rel; }

  bool outputs_exist(const std::vector<std::string>& outputs) const {
    for (const std::string& rel : outputs)
      if (!fs::exists(out(rel))) return false;
    return true;
  }

  // fingerprint = library version + stage-relevant config + input bytes
  std::string fingerprint(const std::string& stage, const json& facet,
                          const std::vector<std::string>& input_paths) const {
    std::string blob = std::string(kVersion) + '\x1f' + stage + '\x1f' + facet.dump();
    for (const std::string& p : input_paths) {
      blob += '\x1f';
      blob += fs::path(p).filename().string();
      blob += '\x1f';
      blob += detail::read_file(p);
    }
    return hex64(fnv1a64(blob));
  }

  // a stage is reusable when its inputs hash the same and everything it wrote
  // last time is still on disk; returns the previous record so conditional
  // outputs (e.g. the pairwise heatmap) survive into the new manifest
  const StageRecord* reusable(const std::string& stage, const std::string& fp,
                              const std::vector<std::string>& outputs) const {
    const auto it = previous.find(stage);
    if (it == previous.end() || it->second.fingerprint != fp) return nullptr;
    if (!outputs_exist(outputs) || !outputs_exist(it->second.outputs)) return nullptr;
    return &it->second;
  }

  void record(StageRecord rec) {
    manifest.stages.push_back(std::move(rec));
    detail::write_file_atomic((out_dir / "manifest.json").string(),
                              manifest_to_json(manifest));
  }
};

std::map<std::string, StageRecord> load_previous_manifest(const fs::path& path) {
  std::map<std::string, StageRecord> out;
  if (!fs::exists(path)) return out;
  const json j = json::parse(detail::read_file(path.string()), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("stages")) return out;
  for (const json& s : j["stages"]) {
    if (!s.is_object() || !s.contains("name") || !s.contains("fingerprint")) continue;
    StageRecord rec;
    rec.name = s["name"].get<std::string>();
    rec.fingerprint = s["fingerprint"].get<std::string>();
    if (s.contains("outputs"))
      rec.outputs = s["outputs"].get<std::vector<std::string>>();
    out[rec.name] = std::move(rec);
  }
  return out;
}

template <typename Fn>
void run_stage(StageContext& ctx, const std::string& name, const json& facet,
               const std::vector<std::string>& inputs,
               const std::vector<std::string>& outputs, Fn&& body) {
  StageRecord rec;
  rec.name = name;
  rec.outputs = outputs;
  try {
    rec.fingerprint = ctx.fingerprint(name, facet, inputs);
    if (const StageRecord* prev = ctx.reusable(name, rec.fingerprint, outputs)) {
      rec.outputs = prev->outputs;
      rec.skipped = true;
    } else {
      body(rec);
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
  ctx.record(std::move(rec));
}

}  // namespace

RunManifest run_pipeline(const RunConfig& cfg) {
  validate_run_config(cfg);

  StageContext ctx{cfg, fs::path(cfg.output_dir), {}, {}};
  fs::create_directories(ctx.out_dir);
  ctx.previous = load_previous_manifest(ctx.out_dir / "manifest.json");
  ctx.manifest.version = kVersion;
  ctx.manifest.config_hash = config_hash(cfg);

  const std::string dataset_path = resolve_path(cfg.config_dir, cfg.dataset_path);
  const std::string models_path = resolve_path(cfg.config_dir, cfg.models_path);
  const json facets = config_facets(cfg);

  // -- ingest: normalize, filter, persist the working corpus -----------------
  run_stage(
      ctx, "ingest",
      json{{"name", cfg.dataset_name},
           {"min", facets["min_bytes"]},
           {"max", facets["max_bytes"]}},
      {dataset_path}, {"corpus.jsonl"}, [&](StageRecord&) {
        Dataset ds = load_dataset(dataset_path, cfg.dataset_name);
        if (cfg.min_bytes.has_value() || cfg.max_bytes.has_value()) {
          ds = filter_by_size(ds, cfg.min_bytes.value_or(0),
                              cfg.max_bytes.value_or(
                                  std::numeric_limits<std::size_t>::max()));
          if (ds.pairs.empty())
            throw DomainError("size filter removed every pair");
        }
        save_dataset(ds, ctx.out("corpus.jsonl").string());
      });

  // -- embed: one vector per pair, failures collected ------------------------
  run_stage(
      ctx, "embed", facets["embedding"], {ctx.out("corpus.jsonl").string()},
      {"vectors.jsonl", "embed_failures.jsonl"}, [&](StageRecord&) {
        const Dataset ds =
            load_dataset(ctx.out("corpus.jsonl").string(), cfg.dataset_name);
        const std::unique_ptr<EmbeddingBackend> backend = make_backend(cfg.embedding);
        const EmbedBatchResult batch = embed_dataset(ds, *backend, cfg.parallelism);
        save_vectors(batch, ctx.out("vectors.jsonl").string());
        std::string failures;
        for (const EmbeddingFailure& f : batch.failures) {
          ordered_json row;
          row["id"] = f.pair_id;
          row["message"] = f.message;
          failures += row.dump() + "\n";
        }
        detail::write_file_atomic(ctx.out("embed_failures.jsonl").string(), failures);
        if (batch.vectors.empty())
          throw DomainError("no pair could be embedded");
      });

  // -- index: vectors + code text into one queryable store -------------------
  run_stage(
      ctx, "index", json::object(),
      {ctx.out("corpus.jsonl").string(), ctx.out("vectors.jsonl").string()},
      {"store.json"}, [&](StageRecord&) {
        const Dataset ds =
            load_dataset(ctx.out("corpus.jsonl").string(), cfg.dataset_name);
        std::unordered_map<std::string, const CodePair*> by_id;
        for (const CodePair& p : ds.pairs) by_id[p.id] = &p;

        std::vector<VectorRecord> recs;
        for (const auto& [id, vec] : load_vectors(ctx.out("vectors.jsonl").string())) {
          const auto it = by_id.find(id);
          if (it == by_id.end())
            throw IntegrityError("vector for unknown pair id '" + id + "'");
          VectorRecord rec;
          rec.pair_id = id;
          rec.embedding = vec;
          rec.fortran = it->second->fortran;
          rec.cpp = it->second->cpp;
          recs.push_back(std::move(rec));
        }
        VectorStore store;
        store.upsert(recs);
        store.save(ctx.out("store.json").string());
      });

  // -- translate: every (query, model, k), resumable -------------------------
  run_stage(
      ctx, "translate",
      json{{"metric", facets["metric"]},
           {"order", facets["order"]},
           {"shots", facets["shots"]}},
      {ctx.out("corpus.jsonl").string(), ctx.out("store.json").string(), models_path},
      {"results.jsonl"}, [&](StageRecord& rec) {
        const Dataset queries =
            load_dataset(ctx.out("corpus.jsonl").string(), cfg.dataset_name);
        const VectorStore store = VectorStore::load(ctx.out("store.json").string());
        const std::vector<ModelConfig> models = load_model_configs(models_path);
        if (models.empty())
          throw ConfigError("model config file lists no models: " + models_path);
        const std::unique_ptr<EmbeddingBackend> backend = make_backend(cfg.embedding);

        BatchOptions opts;
        opts.metric = cfg.metric;
        opts.order = cfg.order;
        opts.parallelism = cfg.parallelism;
        opts.out_path = ctx.out("results.jsonl").string();
        // a fingerprint change means inputs changed: stale rows must not be
        // resumed into the new run
        const auto prev = ctx.previous.find("translate");
        const bool stale =
            prev == ctx.previous.end() || prev->second.fingerprint != rec.fingerprint;
        if (stale && fs::exists(opts.out_path)) fs::remove(opts.out_path);
        opts.resume = true;

        const std::vector<TranslationResult> fresh = translate_batch(
            queries, store, backend.get(), models, cfg.shots, opts);
        rec.skipped = fresh.empty() && !stale;
      });

  // -- evaluate: score candidates against references and against shots -------
  run_stage(
      ctx, "evaluate",
      json{{"weights", facets["weights"]}, {"kw_weight", facets["kw_weight"]}},
      {ctx.out("corpus.jsonl").string(), ctx.out("results.jsonl").string()},
      {"scores.jsonl"}, [&](StageRecord&) {
        const Dataset ds =
            load_dataset(ctx.out("corpus.jsonl").string(), cfg.dataset_name);
        std::string out;
        for (const ScoreRow& row :
             score_results(load_results(ctx.out("results.jsonl").string()), ds,
                           cfg.weights, cfg.kw_weight))
          out += score_row_to_jsonl(row) + "\n";
        detail::write_file_atomic(ctx.out("scores.jsonl").string(), out);
      });

  // -- report: tables, scatter, heatmaps --------------------------------------
  run_stage(
      ctx, "report", json::object(),
      {ctx.out("scores.jsonl").string(), ctx.out("results.jsonl").string(),
       ctx.out("vectors.jsonl").string()},
      {"summary_table.md", "delta_table.md", "scatter.csv", "similarity.csv",
       "similarity.svg"},
      [&](StageRecord& rec) {
        const std::vector<ScoreRow> rows =
            load_scores(ctx.out("scores.jsonl").string());

        std::map<StatKey, std::vector<double>> grouped;
        for (const ScoreRow& row : rows)
          if (row.status == "ok")
            grouped[{row.model_id, row.k_requested}].push_back(row.combined);
        std::map<StatKey, AggregateStat> stats;
        for (const auto& [key, values] : grouped) stats[key] = aggregate(values);

        detail::write_file_atomic(ctx.out("summary_table.md").string(),
                                  summary_table_markdown(stats));

        bool all_have_baseline = !stats.empty();
        std::set<std::string> models;
        for (const auto& [key, stat] : stats) models.insert(key.first);
        for (const std::string& m : models)
          if (stats.find({m, 0}) == stats.end()) all_have_baseline = false;
        detail::write_file_atomic(
            ctx.out("delta_table.md").string(),
            all_have_baseline
                ? delta_table_markdown(delta_table(stats))
                : std::string("delta table unavailable: no zero-shot baseline "
                              "for every model\n"));

        detail::write_file_atomic(ctx.out("scatter.csv").string(),
                                  scatter_csv(scatter_data(rows)));

        // model-vs-model agreement, aligned on (query, k) cells every model
        // translated successfully
        const std::map<std::string, std::vector<std::string>> aligned =
            aligned_candidates(load_results(ctx.out("results.jsonl").string()));
        if (!aligned.empty()) {
          const PairwiseMatrix pm = pairwise_matrix(aligned);
          render_heatmap(pm.values, pm.model_ids, ctx.out("pairwise.svg").string(),
                         ctx.out("pairwise.csv").string(), "model agreement");
          rec.outputs.push_back("pairwise.csv");
          rec.outputs.push_back("pairwise.svg");
        }

        const auto vectors = load_vectors(ctx.out("vectors.jsonl").string());
        std::vector<std::string> labels;
        std::vector<EmbeddingVector> embeddings;
        for (const auto& [id, vec] : vectors) {
          labels.push_back(id);
          embeddings.push_back(vec);
        }
        render_heatmap(similarity_matrix(embeddings), labels,
                       ctx.out("similarity.svg").string(),
                       ctx.out("similarity.csv").string(), "cosine similarity");
      });

  return ctx.manifest;
}

}  // namespace ragxlate
