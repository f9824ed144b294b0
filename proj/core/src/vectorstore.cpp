#include "ragxlate/vectorstore.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "io_util.hpp"
#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

using nlohmann::json;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

Metric parse_metric(const std::string& text) {
  if (text == "cosine") return Metric::Cosine;
  if (text == "l2") return Metric::L2;
  throw ArgumentError("unknown metric '" + text + "' (expected cosine|l2)");
}

Order parse_order(const std::string& text) {
  if (text == "nearest") return Order::Nearest;
  if (text == "farthest") return Order::Farthest;
  throw ArgumentError("unknown order '" + text + "' (expected nearest|farthest)");
}

std::string to_string(Metric m) { return m == Metric::Cosine ? "cosine" : "l2"; }
std::string to_string(Order o) {
  return o == Order::Nearest ? "nearest" : "farthest";
}

double cosine_sim(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ArgumentError("cosine_sim: dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    throw DomainError("cosine_sim: zero-norm vector");
  return dot(a, b) / (na * nb);
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ArgumentError("l2_dist: dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Matrix similarity_matrix(const std::vector<EmbeddingVector>& vectors) {
  if (vectors.empty())
    throw ArgumentError("similarity_matrix: need at least one vector");
  const std::size_t n = vectors.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].values.size() != vectors[0].values.size())
      throw ArgumentError("similarity_matrix: mixed dimensions at index " +
                          std::to_string(i));
    if (norm(vectors[i].values) == 0.0)
      throw DomainError("similarity_matrix: zero-norm vector at index " +
                        std::to_string(i));
  }

  Matrix m;
  m.n = n;
  m.cells.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double c = cosine_sim(vectors[i].values, vectors[j].values);
      m.at(i, j) = c;
      m.at(j, i) = c;  // mirrored, so the matrix is exactly symmetric
    }
  }
  return m;
}

void VectorStore::upsert(const std::vector<VectorRecord>& records) {
  // validate every record before touching the store, so a mismatch leaves it
  // unchanged
  int d = dim();
  for (const VectorRecord& r : records) {
    const int rd = static_cast<int>(r.embedding.values.size());
    if (d == 0) {
      d = rd;
    } else if (rd != d) {
      throw ContractError("upsert: record '" + r.pair_id + "' has dim " +
                          std::to_string(rd) + ", store has " +
                          std::to_string(d));
    }
  }
  for (const VectorRecord& r : records) records_[r.pair_id] = r;
}

int VectorStore::dim() const {
  if (records_.empty()) return 0;
  return static_cast<int>(records_.begin()->second.embedding.values.size());
}

const VectorRecord* VectorStore::find(const std::string& pair_id) const {
  const auto it = records_.find(pair_id);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<RetrievedExample> VectorStore::query(const RetrievalQuery& q) const {
  if (q.k < 0) throw ArgumentError("query: k must be >= 0");
  if (q.k == 0 || records_.empty()) return {};
  if (static_cast<int>(q.query_embedding.values.size()) != dim())
    throw ContractError("query: dimension mismatch (query " +
                        std::to_string(q.query_embedding.values.size()) +
                        ", store " + std::to_string(dim()) + ")");

  struct Scored {
    double score;
    const VectorRecord* rec;
  };
  std::vector<Scored> scored;
  scored.reserve(records_.size());
  for (const auto& [id, rec] : records_) {
    if (q.exclude_ids.count(id)) continue;
    const double s = q.metric == Metric::Cosine
                         ? cosine_sim(q.query_embedding.values, rec.embedding.values)
                         : l2_dist(q.query_embedding.values, rec.embedding.values);
    scored.push_back(Scored{s, &rec});
  }

  // Nearest: cosine descending / L2 ascending; Farthest flips the comparison.
  // Ties always break by ascending pair_id for reproducibility.
  const bool ascending = (q.metric == Metric::L2) == (q.order == Order::Nearest);
  std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
    return a.rec->pair_id < b.rec->pair_id;
  });

  const std::size_t take = std::min<std::size_t>(q.k, scored.size());
  std::vector<RetrievedExample> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(RetrievedExample{scored[i].rec->pair_id, scored[i].rec->fortran,
                                   scored[i].rec->cpp, scored[i].score,
                                   static_cast<int>(i) + 1});
  }
  return out;
}

void VectorStore::save(const std::string& path) const {
  json j;
  j["dim"] = dim();
  json rows = json::array();
  for (const auto& [id, rec] : records_) {
    json r;
    r["pair_id"] = rec.pair_id;
    r["model_id"] = rec.embedding.model_id;
    r["values"] = rec.embedding.values;
    r["fortran"] = rec.fortran;
    r["cpp"] = rec.cpp;
    rows.push_back(std::move(r));
  }
  j["records"] = std::move(rows);
  detail::write_file_atomic(path, j.dump(2) + "\n");
}

VectorStore VectorStore::load(const std::string& path) {
  const json j = json::parse(detail::read_file(path), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("records") ||
      !j["records"].is_array())
    throw IntegrityError("corrupt vector store file: " + path);

  std::vector<VectorRecord> records;
  for (const json& r : j["records"]) {
    if (!r.is_object() || !r.contains("pair_id") || !r.contains("values"))
      throw IntegrityError("corrupt vector store record in " + path);
    VectorRecord rec;
    rec.pair_id = r["pair_id"].get<std::string>();
    rec.embedding.model_id = r.value("model_id", std::string{});
    rec.embedding.values = r["values"].get<std::vector<double>>();
    rec.embedding.dim = static_cast<int>(rec.embedding.values.size());
    rec.fortran = r.value("fortran", std::string{});
    rec.cpp = r.value("cpp", std::string{});
    records.push_back(std::move(rec));
  }
  VectorStore store;
  store.upsert(records);  // also enforces the uniform-dimension invariant
  return store;
}

}  // namespace ragxlate
