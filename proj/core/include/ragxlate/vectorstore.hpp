#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ragxlate/embedding.hpp"

namespace ragxlate {

enum class Metric { Cosine, L2 };
enum class Order { Nearest, Farthest };

Metric parse_metric(const std::string& text);  // "cosine" | "l2"
Order parse_order(const std::string& text);    // "nearest" | "farthest"
std::string to_string(Metric m);
std::string to_string(Order o);

struct VectorRecord {
  std::string pair_id;
  EmbeddingVector embedding;
  std::string fortran;
  std::string cpp;
};

struct RetrievalQuery {
  EmbeddingVector query_embedding;
  int k = 0;
  Metric metric = Metric::Cosine;
  Order order = Order::Nearest;
  std::set<std::string> exclude_ids;  // leave-one-out: put the query's own id here
};

struct RetrievedExample {
  std::string pair_id;
  std::string fortran;
  std::string cpp;
  double score = 0.0;  // cosine similarity in [-1,1], or L2 distance >= 0
  int rank = 0;        // 1-based
};

// dot(a,b) / (|a| |b|). ArgumentError on dimension mismatch, DomainError on a
// zero-norm input.
double cosine_sim(const std::vector<double>& a, const std::vector<double>& b);

// sqrt(sum (a_i - b_i)^2). ArgumentError on dimension mismatch.
double l2_dist(const std::vector<double>& a, const std::vector<double>& b);

struct Matrix {
  std::size_t n = 0;
  std::vector<double> cells;  // row-major n*n

  double& at(std::size_t i, std::size_t j) { return cells[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
};

// Symmetric cosine-similarity matrix with a unit diagonal (up to rounding).
// DomainError (naming the index) on any zero-norm vector; ArgumentError on an
// empty input or mixed dimensions.
Matrix similarity_matrix(const std::vector<EmbeddingVector>& vectors);

// Exact brute-force top-k store over in-memory records, persisted as a single
// JSON file (written atomically: temp file + rename). Many concurrent readers
// are fine; writes need external serialization.
class VectorStore {
 public:
  // Insert or replace by pair_id. All records (and the store) must share one
  // dimension; on mismatch the store is left unchanged and ContractError is
  // thrown.
  void upsert(const std::vector<VectorRecord>& records);

  // Exact top-k under the chosen metric and order, after removing
  // exclude_ids. Ties break by ascending pair_id. Returns min(k, remaining)
  // results, ranks 1..k'. ContractError on dimension mismatch.
  std::vector<RetrievedExample> query(const RetrievalQuery& q) const;

  void save(const std::string& path) const;
  static VectorStore load(const std::string& path);

  std::size_t size() const { return records_.size(); }
  int dim() const;
  const VectorRecord* find(const std::string& pair_id) const;
  const std::map<std::string, VectorRecord>& records() const { return records_; }

 private:
  std::map<std::string, VectorRecord> records_;  // sorted by pair_id
};

}  // namespace ragxlate
