#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ragxlate/codebleu.hpp"
#include "ragxlate/embedding.hpp"
#include "ragxlate/vectorstore.hpp"

namespace ragxlate {

struct RunConfig {
  // Directory of the config file; relative paths in the config resolve
  // against it. Filled by parse_run_config, "." when built programmatically.
  std::string config_dir = ".";

  std::string dataset_path;
  std::string dataset_name = "corpus";
  std::optional<std::size_t> min_bytes;  // optional ingest size filter
  std::optional<std::size_t> max_bytes;

  EmbeddingBackendConfig embedding;

  Metric metric = Metric::Cosine;
  Order order = Order::Nearest;

  std::vector<int> shots{0, 1};
  std::string models_path;
  int parallelism = 4;

  std::array<double, 4> weights = kDefaultWeights;
  double kw_weight = kDefaultKeywordWeight;

  std::string output_dir = "out";
  unsigned seed = 42;  // reserved for sampling extensions; recorded in the hash
};

// Minimal TOML-style reader: `key = value` lines, `[section]` headers that
// prefix the keys that follow, `#` comments, quoted strings, numbers and
// [a, b, c] lists. Unknown keys are rejected (ConfigError) so typos fail
// loudly. See data/run_mock.toml for the full key set.
RunConfig parse_run_config(const std::string& path);

// Existence and range checks; throws ConfigError with a precise message.
void validate_run_config(const RunConfig& cfg);

// Canonical hash of everything that affects results (output_dir excluded, so
// the same run in two directories hashes identically).
std::string config_hash(const RunConfig& cfg);

struct StageRecord {
  std::string name;
  std::string fingerprint;            // content hash of the stage's inputs
  std::vector<std::string> outputs;   // paths relative to output_dir
  bool skipped = false;               // true when reused from a previous run
};

struct RunManifest {
  std::string version;
  std::string config_hash;
  std::vector<StageRecord> stages;
};

std::string manifest_to_json(const RunManifest& m);

// ingest -> embed -> index -> translate -> evaluate -> report. Artifacts land
// in cfg.output_dir; manifest.json records versions, the config hash and
// per-stage outputs. Stages whose input fingerprints match a previous run are
// skipped, so reruns are cheap and interrupted runs resume. A stage failure
// throws PipelineError naming the stage; completed artifacts are preserved.
RunManifest run_pipeline(const RunConfig& cfg);

}  // namespace ragxlate
