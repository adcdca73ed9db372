#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/canonical.hpp"
#include "expcopilot/space.hpp"

namespace expcopilot {

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_tag;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// a.b / (|a||b|). Throws on mismatched tags or lengths and on zero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Deterministic offline embedder: feature-hashed bag of words (FNV-1a of each
// lowercase alphanumeric token, modulo the dimension), L2-normalized.
class BagOfWordsEmbedder {
 public:
  static constexpr std::size_t kDefaultDim = 256;

  explicit BagOfWordsEmbedder(std::size_t dim = kDefaultDim) : dim_(dim) {}

  EmbeddingVector embed(std::string_view text) const;
  std::string model_tag() const { return "bow-hash-" + std::to_string(dim_); }
  std::size_t dim() const { return dim_; }

  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::size_t dim_;
};

// One historical task with its embedding and best canonical experiences
// (best first).
struct PoolEntry {
  Task task;
  EmbeddingVector embedding;
  std::vector<CanonicalExperience> best;
};

struct Retrieved {
  std::size_t index = 0;  // into ExperiencePool::entries()
  double similarity = 0.0;
};

// Immutable experience pool with embeddings packed for scoring.
class ExperiencePool {
 public:
  ExperiencePool() = default;
  explicit ExperiencePool(std::vector<PoolEntry> entries);

  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string& model_tag() const { return tag_; }

  // Top-k entries by cosine similarity to `query`, descending, ties by
  // ascending task_id. Tasks in `exclude` are skipped.
  std::vector<Retrieved> retrieve(const EmbeddingVector& query, std::size_t k,
                                  const std::set<std::string>& exclude = {}) const;

 private:
  std::vector<PoolEntry> entries_;
  std::vector<double> packed_;
  std::size_t dim_ = 0;
  std::string tag_;
};

std::vector<Retrieved> retrieve_experience(const EmbeddingVector& query, const ExperiencePool& pool,
                                           std::size_t k, const std::set<std::string>& exclude = {});

struct KnowledgeProvenance {
  std::string question;
  double temperature = 0.0;
  int round = 0;
};

struct KnowledgeItem {
  std::string space_id;
  std::string text;
  double validation_score = 0.0;
  KnowledgeProvenance provenance;

  void validate() const;
};

// Every item elicited for `space_id`, highest validation score first, ties in
// insertion order.
std::vector<KnowledgeItem> retrieve_knowledge(std::string_view space_id,
                                              std::span<const KnowledgeItem> pool);

}  // namespace expcopilot
