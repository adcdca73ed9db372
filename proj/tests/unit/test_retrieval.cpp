#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "expcopilot/error.hpp"
#include "expcopilot/retrieval.hpp"

using namespace expcopilot;

namespace {

EmbeddingVector ev(std::vector<double> v) { return {std::move(v), "t"}; }

PoolEntry entry(const std::string& id, std::vector<double> v) {
  return {Task{id, "s", "desc " + id, {}}, ev(std::move(v)), {}};
}

}  // namespace

TEST_CASE("cosine similarity") {
  CHECK(cosine_similarity(ev({1, 2}), ev({1, 2})) == doctest::Approx(1.0));
  CHECK(cosine_similarity(ev({1, 0}), ev({0, 1})) == 0.0);
  CHECK(cosine_similarity(ev({1, 1}), ev({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS(cosine_similarity(ev({1, 0}), ev({1, 0, 0})));
  CHECK_THROWS(cosine_similarity(ev({1, 0}), EmbeddingVector{{1, 0}, "other"}));
  CHECK_THROWS(cosine_similarity(ev({0, 0}), ev({1, 0})));
}

TEST_CASE("bag of words ignores order and separates vocabularies") {
  const BagOfWordsEmbedder e;
  CHECK(e.model_tag() == "bow-hash-256");
  const auto a = e.embed("red green blue");
  const auto b = e.embed("Blue, red... GREEN!");
  CHECK(cosine_similarity(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  const auto c = e.embed("alpha beta");
  CHECK(cosine_similarity(a, c) == 0.0);
  CHECK(e.embed("red green blue") == a);
  CHECK_THROWS(e.embed(" ... "));
  CHECK(BagOfWordsEmbedder::tokenize("The dataset-name is \"x_1\".") ==
        std::vector<std::string>{"the", "dataset", "name", "is", "x", "1"});
}

TEST_CASE("top-k with ties ordered by task id") {
  // Similarities 0.9, 0.9, 0.5, 0.1, 0.0 against query (1, 0).
  auto unit = [](double c) { return std::vector<double>{c, std::sqrt(1 - c * c)}; };
  const ExperiencePool pool({entry("e", unit(0.9)), entry("b", unit(0.9)), entry("c", unit(0.5)),
                             entry("a", unit(0.1)), entry("d", unit(0.0))});
  const auto hits = pool.retrieve(ev({1, 0}), 3);
  REQUIRE(hits.size() == 3);
  CHECK(pool.entries()[hits[0].index].task.task_id == "b");
  CHECK(pool.entries()[hits[1].index].task.task_id == "e");
  CHECK(pool.entries()[hits[2].index].task.task_id == "c");
  CHECK(pool.retrieve(ev({1, 0}), 10).size() == 5);
  const auto skip = pool.retrieve(ev({1, 0}), 2, {"b"});
  CHECK(pool.entries()[skip[0].index].task.task_id == "e");
  CHECK(ExperiencePool().retrieve(ev({1, 0}), 3).empty());
  CHECK_THROWS(pool.retrieve(ev({1, 0}), 0));
}

TEST_CASE("retrieval matches a full-sort oracle") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 30;
    std::vector<PoolEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse coordinates produce exact ties.
      entries.push_back(entry("t" + std::to_string(gen() % 1000) + "_" + std::to_string(i),
                              {static_cast<double>(gen() % 3) + 1, static_cast<double>(gen() % 3)}));
    }
    const ExperiencePool pool(entries);
    const auto q = ev({static_cast<double>(gen() % 3) + 1, static_cast<double>(gen() % 3)});
    const std::size_t k = 1 + gen() % (n + 2);

    std::vector<std::pair<double, std::string>> all;
    for (const auto& e : entries) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t d = 0; d < 2; ++d) {
        dot += q.values[d] * e.embedding.values[d];
        na += q.values[d] * q.values[d];
        nb += e.embedding.values[d] * e.embedding.values[d];
      }
      all.emplace_back(-(dot / (std::sqrt(na) * std::sqrt(nb))), e.task.task_id);
    }
    std::sort(all.begin(), all.end());
    const auto hits = pool.retrieve(q, k);
    REQUIRE(hits.size() == std::min(k, n));
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(pool.entries()[hits[i].index].task.task_id == all[i].second);
  }
}

TEST_CASE("knowledge retrieval filters by space and sorts by score") {
  const std::vector<KnowledgeItem> pool{{"A", "first", 0.3, {}}, {"B", "other", 0.9, {}},
                                        {"A", "second", 0.8, {}}, {"A", "third", 0.3, {}}};
  const auto a = retrieve_knowledge("A", pool);
  REQUIRE(a.size() == 3);
  CHECK(a[0].text == "second");
  CHECK(a[1].text == "first");
  CHECK(a[2].text == "third");
  CHECK(retrieve_knowledge("C", pool).empty());
  CHECK_THROWS((KnowledgeItem{"A", "  ", 0.1, {}}.validate()));
}
