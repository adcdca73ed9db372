#include "expcopilot/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "expcopilot/error.hpp"
#include "expcopilot/kernels.hpp"
#include "expcopilot/rng.hpp"

namespace expcopilot {

namespace {

void check_compatible(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.model_tag != b.model_tag)
    throw Error("embedding model mismatch: '" + a.model_tag + "' vs '" + b.model_tag + "'");
  if (a.values.size() != b.values.size() || a.values.empty())
    throw Error("embedding length mismatch: " + std::to_string(a.values.size()) + " vs " +
                std::to_string(b.values.size()));
}

bool is_zero(const EmbeddingVector& v) {
  return std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == 0.0; });
}

}  // namespace

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  check_compatible(a, b);
  if (is_zero(a) || is_zero(b)) throw Error("cosine similarity of a zero vector");
  const double ab = kernels::dot(a.values, b.values);
  return ab / (std::sqrt(kernels::dot(a.values, a.values)) * std::sqrt(kernels::dot(b.values, b.values)));
}

std::vector<std::string> BagOfWordsEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

EmbeddingVector BagOfWordsEmbedder::embed(std::string_view text) const {
  EmbeddingVector v{std::vector<double>(dim_, 0.0), model_tag()};
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw Error("cannot embed text without words");
  for (const auto& t : tokens) v.values[fnv1a64(t) % dim_] += 1.0;
  const double norm = std::sqrt(kernels::dot(v.values, v.values));
  for (double& x : v.values) x /= norm;
  return v;
}

ExperiencePool::ExperiencePool(std::vector<PoolEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) return;
  tag_ = entries_.front().embedding.model_tag;
  dim_ = entries_.front().embedding.values.size();
  packed_.reserve(entries_.size() * dim_);
  for (const auto& e : entries_) {
    check_compatible(entries_.front().embedding, e.embedding);
    if (is_zero(e.embedding)) throw Error("task '" + e.task.task_id + "' has a zero embedding");
    packed_.insert(packed_.end(), e.embedding.values.begin(), e.embedding.values.end());
  }
}

std::vector<Retrieved> ExperiencePool::retrieve(const EmbeddingVector& query, std::size_t k,
                                                const std::set<std::string>& exclude) const {
  if (k == 0) throw Error("retrieve: k must be >= 1");
  if (entries_.empty()) return {};
  check_compatible(entries_.front().embedding, query);
  if (is_zero(query)) throw Error("retrieve: zero query embedding");

  std::vector<double> sims(entries_.size());
  kernels::parallel::cosine_scores(query.values, {packed_, entries_.size(), dim_}, sims);

  std::vector<Retrieved> hits;
  hits.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!exclude.count(entries_[i].task.task_id)) hits.push_back({i, sims[i]});
  auto order = [&](const Retrieved& a, const Retrieved& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return entries_[a.index].task.task_id < entries_[b.index].task.task_id;
  };
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), order);
  hits.resize(keep);
  return hits;
}

std::vector<Retrieved> retrieve_experience(const EmbeddingVector& query, const ExperiencePool& pool,
                                           std::size_t k, const std::set<std::string>& exclude) {
  return pool.retrieve(query, k, exclude);
}

void KnowledgeItem::validate() const {
  if (normalize_text(text).empty()) throw ConfigError("knowledge item text must be non-empty");
  if (!std::isfinite(validation_score))
    throw ConfigError("knowledge item validation score must be finite");
}

std::vector<KnowledgeItem> retrieve_knowledge(std::string_view space_id,
                                              std::span<const KnowledgeItem> pool) {
  std::vector<KnowledgeItem> out;
  for (const auto& k : pool)
    if (k.space_id == space_id) out.push_back(k);
  std::stable_sort(out.begin(), out.end(), [](const KnowledgeItem& a, const KnowledgeItem& b) {
    return a.validation_score > b.validation_score;
  });
  return out;
}

}  // namespace expcopilot
