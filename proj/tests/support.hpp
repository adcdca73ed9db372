#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "expcopilot/benchmark.hpp"
#include "expcopilot/harness.hpp"
#include "expcopilot/io.hpp"
#include "expcopilot/retrieval.hpp"

namespace testsupport {

inline const std::filesystem::path kFixtures = EXPCOPILOT_FIXTURES;
inline const std::filesystem::path kGolden = EXPCOPILOT_GOLDEN;

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline expcopilot::SolutionSpace svm_space() {
  return expcopilot::io::load_space(kFixtures / "svm" / "space.json");
}

inline const expcopilot::Benchmark& synthetic() {
  static const expcopilot::Benchmark b = expcopilot::load_benchmark(kFixtures / "synthetic");
  return b;
}

inline std::vector<std::string> task_ids(const expcopilot::Benchmark& b) {
  std::vector<std::string> ids;
  for (const auto& t : b.tasks()) ids.push_back(t.task_id);
  return ids;
}

// Nearest-neighbour reference: most similar other task by the bag-of-words
// cosine (ties to the smaller id), its best table solution, looked up on the
// held-out task. Written against the table directly.
inline double nn_oracle_metric(const expcopilot::Benchmark& b, const std::string& held,
                               const std::set<std::string>& also_excluded = {}) {
  const expcopilot::BagOfWordsEmbedder emb;
  const auto q = emb.embed(b.task(held).description);
  std::string nearest;
  double best_sim = -2.0;
  for (const auto& t : b.tasks()) {
    if (t.task_id == held || also_excluded.count(t.task_id)) continue;
    const auto v = emb.embed(t.description);
    double dot = 0, nq = 0, nv = 0;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      dot += q.values[i] * v.values[i];
      nq += q.values[i] * q.values[i];
      nv += v.values[i] * v.values[i];
    }
    const double sim = dot / (std::sqrt(nq) * std::sqrt(nv));
    if (sim > best_sim || (sim == best_sim && t.task_id < nearest)) {
      best_sim = sim;
      nearest = t.task_id;
    }
  }
  const std::size_t nt = b.task_index(nearest);
  std::size_t best_g = 0;
  for (std::size_t g = 1; g < b.grid().size(); ++g)
    if (*b.lookup(nt, g) > *b.lookup(nt, best_g)) best_g = g;
  return *b.lookup(b.task_index(held), best_g);
}

// Offline artifacts built from every synthetic task except `held` and
// `also_excluded`, bag-of-words embeddings.
inline expcopilot::OfflineArtifacts loo_artifacts(const std::string& held,
                                                  const std::set<std::string>& also_excluded = {}) {
  const auto& b = synthetic();
  std::vector<std::string> train;
  std::map<std::string, expcopilot::EmbeddingVector> emb;
  const expcopilot::BagOfWordsEmbedder bow;
  for (const auto& t : b.tasks()) {
    if (t.task_id == held || also_excluded.count(t.task_id)) continue;
    train.push_back(t.task_id);
    emb[t.task_id] = bow.embed(t.description);
  }
  const auto records = b.records(train);
  return expcopilot::build_offline(records, b.space(), b.direction(), emb);
}

}  // namespace testsupport
