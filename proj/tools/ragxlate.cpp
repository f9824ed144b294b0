// ragxlate — retrieval-augmented Fortran -> C++ translation pipeline.
//
// Subcommands mirror the pipeline stages (ingest, embed, index, query,
// translate, evaluate, report) plus `run`, which executes all of them from a
// single config file. Exit codes: 0 ok, 2 configuration/usage error, 3 stage
// failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragxlate/corpus.hpp"
#include "ragxlate/embedding.hpp"
#include "ragxlate/errors.hpp"
#include "ragxlate/llmclient.hpp"
#include "ragxlate/pipeline.hpp"
#include "ragxlate/report.hpp"
#include "ragxlate/vectorstore.hpp"
#include "ragxlate/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ragxlate::ArgumentError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ragxlate::ArgumentError("cannot write file: " + path);
  out << content;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::string cur;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (!cur.empty()) {
        try {
          out.push_back(std::stoi(cur));
        } catch (const std::exception&) {
          throw ragxlate::ConfigError(flag + ": bad integer '" + cur + "'");
        }
        cur.clear();
      }
    } else if (text[i] != ' ') {
      cur += text[i];
    }
  }
  if (out.empty()) throw ragxlate::ConfigError(flag + ": empty list");
  return out;
}

std::array<double, 4> parse_weights(const std::string& text) {
  std::array<double, 4> out{};
  std::size_t idx = 0;
  std::string cur;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (!cur.empty()) {
        if (idx >= 4) throw ragxlate::ConfigError("--weights: expected 4 values");
        try {
          out[idx++] = std::stod(cur);
        } catch (const std::exception&) {
          throw ragxlate::ConfigError("--weights: bad number '" + cur + "'");
        }
        cur.clear();
      }
    } else if (text[i] != ' ') {
      cur += text[i];
    }
  }
  if (idx != 4) throw ragxlate::ConfigError("--weights: expected 4 values");
  return out;
}

ragxlate::EmbeddingBackendConfig embed_config_from_flags(
    const std::string& backend, const std::string& model_id, int dim,
    int max_tokens, const std::string& endpoint) {
  if (backend != "local" && backend != "remote")
    throw ragxlate::ConfigError("--backend must be 'local' or 'remote'");
  if (backend == "remote" && endpoint.empty())
    throw ragxlate::ConfigError("--backend remote needs --endpoint");
  if (backend == "local" && !endpoint.empty())
    throw ragxlate::ConfigError("--endpoint only applies to --backend remote");

  ragxlate::EmbeddingBackendConfig cfg;
  if (!model_id.empty()) cfg.model_id = model_id;
  cfg.dim = dim;
  cfg.max_tokens = max_tokens;
  cfg.endpoint = endpoint;
  return cfg;
}

// Queries default to the store's own records (in-corpus evaluation).
ragxlate::Dataset dataset_from_store(const ragxlate::VectorStore& store) {
  ragxlate::Dataset ds;
  ds.name = "store";
  ds.labeled = store.size() > 0;
  for (const auto& [id, rec] : store.records()) {
    ragxlate::CodePair p;
    p.id = id;
    p.fortran = rec.fortran;
    p.cpp = rec.cpp;
    p.dataset = ds.name;
    p.byte_len = rec.fortran.size();
    ds.pairs.push_back(std::move(p));
    if (rec.cpp.empty()) ds.labeled = false;
  }
  return ds;
}

struct IngestArgs {
  std::string input, name = "corpus", out;
  long long min_bytes = -1, max_bytes = -1;
};

void cmd_ingest(const IngestArgs& a) {
  ragxlate::Dataset ds = ragxlate::load_dataset(a.input, a.name);
  if (a.min_bytes >= 0 || a.max_bytes >= 0) {
    ds = ragxlate::filter_by_size(
        ds, a.min_bytes >= 0 ? static_cast<std::size_t>(a.min_bytes) : 0,
        a.max_bytes >= 0 ? static_cast<std::size_t>(a.max_bytes)
                         : std::numeric_limits<std::size_t>::max());
  }
  ragxlate::save_dataset(ds, a.out);
  std::cout << "ingested " << ds.pairs.size() << " pairs ("
            << (ds.labeled ? "labeled" : "unlabeled") << ") -> " << a.out << "\n";
}

struct EmbedArgs {
  std::string dataset, backend = "local", model_id, endpoint, out, failures_out;
  int dim = 64, max_tokens = ragxlate::kTokenLimitSmall, parallelism = 4;
};

void cmd_embed(const EmbedArgs& a) {
  const ragxlate::EmbeddingBackendConfig cfg = embed_config_from_flags(
      a.backend, a.model_id, a.dim, a.max_tokens, a.endpoint);
  const ragxlate::Dataset ds = ragxlate::load_dataset(a.dataset, "corpus");
  const auto backend = ragxlate::make_backend(cfg);
  const ragxlate::EmbedBatchResult batch =
      ragxlate::embed_dataset(ds, *backend, a.parallelism);
  ragxlate::save_vectors(batch, a.out);

  if (!a.failures_out.empty()) {
    std::string lines;
    for (const ragxlate::EmbeddingFailure& f : batch.failures) {
      json row;
      row["id"] = f.pair_id;
      row["message"] = f.message;
      lines += row.dump() + "\n";
    }
    write_file(a.failures_out, lines);
  } else {
    for (const ragxlate::EmbeddingFailure& f : batch.failures)
      std::cerr << "embed failed for '" << f.pair_id << "': " << f.message << "\n";
  }
  if (batch.vectors.empty())
    throw ragxlate::DomainError("no pair could be embedded");
  std::cout << "embedded " << batch.vectors.size() << "/" << ds.pairs.size()
            << " pairs -> " << a.out << "\n";
}

struct IndexArgs {
  std::string vectors, dataset, out;
};

void cmd_index(const IndexArgs& a) {
  const ragxlate::Dataset ds = ragxlate::load_dataset(a.dataset, "corpus");
  std::map<std::string, const ragxlate::CodePair*> by_id;
  for (const ragxlate::CodePair& p : ds.pairs) by_id[p.id] = &p;

  std::vector<ragxlate::VectorRecord> recs;
  for (const auto& [id, vec] : ragxlate::load_vectors(a.vectors)) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw ragxlate::IntegrityError("vector for unknown pair id '" + id + "'");
    ragxlate::VectorRecord rec;
    rec.pair_id = id;
    rec.embedding = vec;
    rec.fortran = it->second->fortran;
    rec.cpp = it->second->cpp;
    recs.push_back(std::move(rec));
  }
  ragxlate::VectorStore store;
  store.upsert(recs);
  store.save(a.out);
  std::cout << "indexed " << store.size() << " records (dim " << store.dim()
            << ") -> " << a.out << "\n";
}

struct QueryArgs {
  std::string store, id, file, metric = "cosine", order = "nearest";
  std::string backend = "local", model_id, endpoint;
  int k = 3, max_tokens = ragxlate::kTokenLimitSmall;
};

void cmd_query(const QueryArgs& a) {
  if (a.id.empty() == a.file.empty())
    throw ragxlate::ConfigError("query needs exactly one of --id or --file");
  const ragxlate::VectorStore store = ragxlate::VectorStore::load(a.store);

  ragxlate::RetrievalQuery rq;
  rq.k = a.k;
  rq.metric = ragxlate::parse_metric(a.metric);
  rq.order = ragxlate::parse_order(a.order);
  if (!a.id.empty()) {
    const ragxlate::VectorRecord* rec = store.find(a.id);
    if (rec == nullptr)
      throw ragxlate::ArgumentError("id not in store: " + a.id);
    rq.query_embedding = rec->embedding;
    rq.exclude_ids.insert(a.id);  // in-corpus query: never retrieve itself
  } else {
    const ragxlate::EmbeddingBackendConfig cfg = embed_config_from_flags(
        a.backend, a.model_id, store.dim(), a.max_tokens, a.endpoint);
    rq.query_embedding =
        ragxlate::make_backend(cfg)->embed(
            ragxlate::normalize_code_lenient(read_file(a.file), ragxlate::Lang::Fortran));
  }

  for (const ragxlate::RetrievedExample& ex : store.query(rq)) {
    json row;
    row["rank"] = ex.rank;
    row["pair_id"] = ex.pair_id;
    row["score"] = ex.score;
    std::cout << row.dump() << "\n";
  }
}

struct TranslateArgs {
  std::string store, queries, models, out;
  std::string shots = "0,1", metric = "cosine", order = "nearest";
  std::string embed_backend = "local", embed_model_id, embed_endpoint;
  int embed_max_tokens = ragxlate::kTokenLimitSmall;
  int parallelism = 4;
  bool no_resume = false;
};

void cmd_translate(const TranslateArgs& a) {
  const ragxlate::VectorStore store = ragxlate::VectorStore::load(a.store);
  const ragxlate::Dataset queries = a.queries.empty()
                                        ? dataset_from_store(store)
                                        : ragxlate::load_dataset(a.queries, "queries");
  const std::vector<ragxlate::ModelConfig> models =
      ragxlate::load_model_configs(a.models);
  if (models.empty())
    throw ragxlate::ConfigError("model config file lists no models: " + a.models);

  const ragxlate::EmbeddingBackendConfig ecfg =
      embed_config_from_flags(a.embed_backend, a.embed_model_id, store.dim(),
                              a.embed_max_tokens, a.embed_endpoint);
  const auto backend = ragxlate::make_backend(ecfg);

  ragxlate::BatchOptions opts;
  opts.metric = ragxlate::parse_metric(a.metric);
  opts.order = ragxlate::parse_order(a.order);
  opts.parallelism = a.parallelism;
  opts.out_path = a.out;
  opts.resume = !a.no_resume;

  const auto fresh = ragxlate::translate_batch(
      queries, store, backend.get(), models, parse_int_list(a.shots, "--shots"),
      opts);
  std::cout << "wrote " << fresh.size() << " new rows -> " << a.out << "\n";
}

struct EvaluateArgs {
  std::string results, references, out;
  std::string weights = "0.25,0.25,0.25,0.25";
  double kw_weight = ragxlate::kDefaultKeywordWeight;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const auto results = ragxlate::load_results(a.results);
  const ragxlate::Dataset refs = ragxlate::load_dataset(a.references, "references");
  std::string out;
  for (const ragxlate::ScoreRow& row : ragxlate::score_results(
           results, refs, parse_weights(a.weights), a.kw_weight))
    out += ragxlate::score_row_to_jsonl(row) + "\n";
  write_file(a.out, out);
  std::cout << "scored " << results.size() << " rows -> " << a.out << "\n";
}

struct ReportArgs {
  std::string kind, scores, results, matrix, out, csv, title;
};

std::map<ragxlate::StatKey, ragxlate::AggregateStat> stats_from_scores(
    const std::vector<ragxlate::ScoreRow>& rows) {
  std::map<ragxlate::StatKey, std::vector<double>> grouped;
  for (const ragxlate::ScoreRow& row : rows)
    if (row.status == "ok")
      grouped[{row.model_id, row.k_requested}].push_back(row.combined);
  std::map<ragxlate::StatKey, ragxlate::AggregateStat> stats;
  for (const auto& [key, values] : grouped) stats[key] = ragxlate::aggregate(values);
  return stats;
}

void cmd_report(const ReportArgs& a) {
  const std::string csv_twin =
      !a.csv.empty() ? a.csv
                     : fs::path(a.out).replace_extension(".csv").string();

  if (a.kind == "table" || a.kind == "delta" || a.kind == "scatter") {
    if (a.scores.empty())
      throw ragxlate::ConfigError("report --kind " + a.kind + " needs --scores");
    const std::vector<ragxlate::ScoreRow> rows = ragxlate::load_scores(a.scores);
    if (a.kind == "table") {
      write_file(a.out, ragxlate::summary_table_markdown(stats_from_scores(rows)));
    } else if (a.kind == "delta") {
      write_file(a.out, ragxlate::delta_table_markdown(
                            ragxlate::delta_table(stats_from_scores(rows))));
    } else {
      write_file(a.out, ragxlate::scatter_csv(ragxlate::scatter_data(rows)));
    }
  } else if (a.kind == "pairwise") {
    if (a.results.empty())
      throw ragxlate::ConfigError("report --kind pairwise needs --results");
    const auto aligned =
        ragxlate::aligned_candidates(ragxlate::load_results(a.results));
    if (aligned.empty())
      throw ragxlate::DomainError(
          "no (query, k) cell was translated successfully by every model");
    const ragxlate::PairwiseMatrix pm = ragxlate::pairwise_matrix(aligned);
    ragxlate::render_heatmap(pm.values, pm.model_ids, a.out, csv_twin,
                             a.title.empty() ? "model agreement" : a.title);
  } else if (a.kind == "heatmap") {
    if (a.matrix.empty())
      throw ragxlate::ConfigError("report --kind heatmap needs --matrix");
    std::vector<std::string> labels;
    const ragxlate::Matrix m = ragxlate::load_matrix_csv(a.matrix, &labels);
    ragxlate::render_heatmap(m, labels, a.out, csv_twin, a.title);
  } else {
    throw ragxlate::ConfigError(
        "--kind must be one of table|delta|pairwise|scatter|heatmap");
  }
  std::cout << "report (" << a.kind << ") -> " << a.out << "\n";
}

struct RunArgs {
  std::string config;
  // flag overrides; empty/-1 means "keep the config file's value"
  std::string dataset, dataset_name, output_dir, models, metric, order, shots,
      endpoint, weights;
  long long min_bytes = -1, max_bytes = -1, seed = -1;
  int parallelism = -1, dim = -1, max_tokens = -1;
  double kw_weight = -1.0;
};

std::string absolutize(const std::string& p) {
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

void cmd_run(const RunArgs& a) {
  ragxlate::RunConfig cfg = ragxlate::parse_run_config(a.config);

  // flags beat config keys; paths given on the command line are relative to
  // the working directory, so pin them down before config_dir resolution
  if (!a.dataset.empty()) cfg.dataset_path = absolutize(a.dataset);
  if (!a.dataset_name.empty()) cfg.dataset_name = a.dataset_name;
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (!a.models.empty()) cfg.models_path = absolutize(a.models);
  if (!a.metric.empty()) cfg.metric = ragxlate::parse_metric(a.metric);
  if (!a.order.empty()) cfg.order = ragxlate::parse_order(a.order);
  if (!a.shots.empty()) cfg.shots = parse_int_list(a.shots, "--shots");
  if (!a.endpoint.empty()) cfg.embedding.endpoint = a.endpoint;
  if (!a.weights.empty()) cfg.weights = parse_weights(a.weights);
  if (a.min_bytes >= 0) cfg.min_bytes = static_cast<std::size_t>(a.min_bytes);
  if (a.max_bytes >= 0) cfg.max_bytes = static_cast<std::size_t>(a.max_bytes);
  if (a.seed >= 0) cfg.seed = static_cast<unsigned>(a.seed);
  if (a.parallelism >= 1) cfg.parallelism = a.parallelism;
  if (a.dim >= 1) cfg.embedding.dim = a.dim;
  if (a.max_tokens >= 1) cfg.embedding.max_tokens = a.max_tokens;
  if (a.kw_weight >= 0.0) cfg.kw_weight = a.kw_weight;

  ragxlate::validate_run_config(cfg);
  const ragxlate::RunManifest manifest = ragxlate::run_pipeline(cfg);
  for (const ragxlate::StageRecord& s : manifest.stages)
    std::cout << "stage " << s.name << ": " << (s.skipped ? "skipped" : "done")
              << "\n";
  std::cout << "run complete -> " << cfg.output_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieval-augmented Fortran -> C++ translation pipeline"};
  app.set_version_flag("--version", std::string("ragxlate ") + ragxlate::kVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  CLI::App* c = app.add_subcommand("ingest", "normalize a JSONL corpus");
  c->add_option("--input", ingest.input, "raw JSONL corpus")->required();
  c->add_option("--name", ingest.name, "dataset name");
  c->add_option("--min-bytes", ingest.min_bytes, "drop pairs below this size");
  c->add_option("--max-bytes", ingest.max_bytes, "drop pairs above this size");
  c->add_option("--out", ingest.out, "normalized corpus path")->required();
  c->callback([&] { cmd_ingest(ingest); });

  EmbedArgs embed;
  c = app.add_subcommand("embed", "embed every pair of a corpus");
  c->add_option("--dataset", embed.dataset, "normalized corpus")->required();
  c->add_option("--backend", embed.backend, "local|remote");
  c->add_option("--model-id", embed.model_id, "embedding model id");
  c->add_option("--dim", embed.dim, "vector dimension");
  c->add_option("--max-tokens", embed.max_tokens, "token truncation limit");
  c->add_option("--endpoint", embed.endpoint, "remote embeddings endpoint");
  c->add_option("--parallelism", embed.parallelism, "concurrent embed calls");
  c->add_option("--out", embed.out, "vectors JSONL path")->required();
  c->add_option("--failures", embed.failures_out, "failures JSONL path");
  c->callback([&] { cmd_embed(embed); });

  IndexArgs index;
  c = app.add_subcommand("index", "build a vector store from vectors + corpus");
  c->add_option("--vectors", index.vectors, "vectors JSONL")->required();
  c->add_option("--dataset", index.dataset, "normalized corpus")->required();
  c->add_option("--out", index.out, "store path")->required();
  c->callback([&] { cmd_index(index); });

  QueryArgs query;
  c = app.add_subcommand("query", "retrieve similar examples from a store");
  c->add_option("--store", query.store, "vector store")->required();
  c->add_option("--id", query.id, "query by stored pair id (self-excluding)");
  c->add_option("--file", query.file, "query by code snippet file");
  c->add_option("--k", query.k, "results to return");
  c->add_option("--metric", query.metric, "cosine|l2");
  c->add_option("--order", query.order, "nearest|farthest");
  c->add_option("--backend", query.backend, "local|remote (with --file)");
  c->add_option("--model-id", query.model_id, "embedding model id (with --file)");
  c->add_option("--endpoint", query.endpoint, "remote endpoint (with --file)");
  c->add_option("--max-tokens", query.max_tokens, "token limit (with --file)");
  c->callback([&] { cmd_query(query); });

  TranslateArgs translate;
  c = app.add_subcommand("translate", "translate queries with retrieved shots");
  c->add_option("--store", translate.store, "vector store")->required();
  c->add_option("--queries", translate.queries,
                "query corpus (default: the store's own records)");
  c->add_option("--models", translate.models, "model config JSON")->required();
  c->add_option("--shots", translate.shots, "comma list of shot counts");
  c->add_option("--metric", translate.metric, "cosine|l2");
  c->add_option("--order", translate.order, "nearest|farthest");
  c->add_option("--parallelism", translate.parallelism, "concurrent requests");
  c->add_option("--embed-backend", translate.embed_backend,
                "backend for out-of-store queries");
  c->add_option("--embed-model-id", translate.embed_model_id, "its model id");
  c->add_option("--embed-endpoint", translate.embed_endpoint, "its endpoint");
  c->add_option("--embed-max-tokens", translate.embed_max_tokens, "its token limit");
  c->add_flag("--no-resume", translate.no_resume, "discard existing rows in --out");
  c->add_option("--out", translate.out, "results JSONL path")->required();
  c->callback([&] { cmd_translate(translate); });

  EvaluateArgs evaluate;
  c = app.add_subcommand("evaluate", "score results against references");
  c->add_option("--results", evaluate.results, "results JSONL")->required();
  c->add_option("--references", evaluate.references, "reference corpus")->required();
  c->add_option("--weights", evaluate.weights, "four comma-separated weights");
  c->add_option("--kw-weight", evaluate.kw_weight, "keyword n-gram weight");
  c->add_option("--out", evaluate.out, "scores JSONL path")->required();
  c->callback([&] { cmd_evaluate(evaluate); });

  ReportArgs report;
  c = app.add_subcommand("report", "tables, scatter data and heatmaps");
  c->add_option("--kind", report.kind, "table|delta|pairwise|scatter|heatmap")
      ->required();
  c->add_option("--scores", report.scores, "scores JSONL (table/delta/scatter)");
  c->add_option("--results", report.results, "results JSONL (pairwise)");
  c->add_option("--matrix", report.matrix, "matrix CSV (heatmap)");
  c->add_option("--title", report.title, "heatmap title");
  c->add_option("--csv", report.csv, "CSV twin path (pairwise/heatmap)");
  c->add_option("--out", report.out, "output path")->required();
  c->callback([&] { cmd_report(report); });

  RunArgs run;
  c = app.add_subcommand("run", "execute the full pipeline from a config file");
  c->add_option("--config", run.config, "TOML-style run config")->required();
  c->add_option("--dataset", run.dataset, "override: corpus path");
  c->add_option("--dataset-name", run.dataset_name, "override: dataset name");
  c->add_option("--output-dir", run.output_dir, "override: artifact directory");
  c->add_option("--models", run.models, "override: model config JSON");
  c->add_option("--metric", run.metric, "override: cosine|l2");
  c->add_option("--order", run.order, "override: nearest|farthest");
  c->add_option("--shots", run.shots, "override: comma list of shot counts");
  c->add_option("--endpoint", run.endpoint, "override: embeddings endpoint");
  c->add_option("--weights", run.weights, "override: metric weights");
  c->add_option("--min-bytes", run.min_bytes, "override: size filter floor");
  c->add_option("--max-bytes", run.max_bytes, "override: size filter ceiling");
  c->add_option("--seed", run.seed, "override: random seed");
  c->add_option("--parallelism", run.parallelism, "override: worker count");
  c->add_option("--dim", run.dim, "override: embedding dimension");
  c->add_option("--max-tokens", run.max_tokens, "override: embedding token limit");
  c->add_option("--kw-weight", run.kw_weight, "override: keyword n-gram weight");
  c->callback([&] { cmd_run(run); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ragxlate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ragxlate::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ragxlate::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ragxlate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
