#include "doctest.h"

#include "expcopilot/baselines.hpp"
#include "expcopilot/elicitation.hpp"
#include "expcopilot/error.hpp"
#include "expcopilot/gateway.hpp"
#include "support.hpp"

using namespace expcopilot;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(100 + i));
  return out;
}

// Scores candidates from a fixed sequence, one per call.
CandidateScorer sequence(std::vector<double> scores) {
  auto pos = std::make_shared<std::size_t>(0);
  return [scores = std::move(scores), pos](const KnowledgeItem&) { return scores.at((*pos)++); };
}

class DeadBackend : public Backend {
 public:
  std::string complete(const CompletionRequest&) override { throw BackendError("unavailable"); }
  EmbeddingVector embed(std::string_view) override { throw BackendError("unavailable"); }
  std::string embed_model_tag() const override { return "none"; }
};

}  // namespace

TEST_CASE("validation split sizes") {
  CHECK(split_validation(ids(10), 0.1, 1).validation.size() == 1);
  CHECK(split_validation(ids(12), 0.1, 1).validation.size() == 2);
  CHECK(split_validation(ids(30), 0.1, 1).validation.size() == 3);
  CHECK(split_validation(ids(2), 0.9, 1).validation.size() == 1);
  CHECK_THROWS_AS(split_validation(ids(1), 0.1, 1), ConfigError);
  CHECK_THROWS_AS(split_validation(ids(5), 0.0, 1), ConfigError);

  const auto a = split_validation(ids(20), 0.25, 9);
  const auto b = split_validation(ids(20), 0.25, 9);
  CHECK(a.validation == b.validation);
  CHECK(a.train.size() + a.validation.size() == 20);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  CHECK(all.size() == 20);
}

TEST_CASE("elicitation keeps the best candidate and stops on stagnation") {
  const auto& b = testsupport::synthetic();
  const auto art = testsupport::loo_artifacts("synth_00");
  ScriptedBackend backend;
  ElicitationConfig cfg;
  cfg.rounds = 10;
  cfg.patience = 2;
  const auto r = elicit_knowledge(art.pool, b.space(), cfg, backend, sequence({0.2, 0.5, 0.5, 0.3, 0.4}));
  CHECK(r.trace.size() == 5);
  CHECK(r.stopped_early);
  CHECK(r.generation_calls == 5);
  CHECK(r.best.validation_score == 0.5);
  CHECK(r.best.text == r.trace[1].candidate);
  CHECK(r.best.provenance.round == 2);
  CHECK(r.best.space_id == "synthetic-svm");
  CHECK(r.trace[0].improved);
  CHECK(r.trace[1].improved);
  CHECK_FALSE(r.trace[2].improved);
  for (const auto& t : r.trace) {
    CHECK(t.temperature >= 0.0);
    CHECK(t.temperature < 1.0);
    CHECK(t.sampled_tasks.size() == cfg.subset_size);
    CHECK(std::find(t.sampled_tasks.begin(), t.sampled_tasks.end(), "synth_00") == t.sampled_tasks.end());
  }
}

TEST_CASE("rounds and patience bound the loop") {
  const auto& b = testsupport::synthetic();
  const auto art = testsupport::loo_artifacts("synth_00");
  ScriptedBackend backend;
  ElicitationConfig cfg;
  cfg.rounds = 1;
  auto one = elicit_knowledge(art.pool, b.space(), cfg, backend, sequence({0.1}));
  CHECK(one.trace.size() == 1);
  CHECK_FALSE(one.stopped_early);

  cfg.rounds = 6;
  cfg.patience = 1;
  auto rising = elicit_knowledge(art.pool, b.space(), cfg, backend, sequence({1, 2, 3, 4, 5, 6}));
  CHECK(rising.trace.size() == 6);
  CHECK(rising.best.validation_score == 6);
  CHECK_FALSE(rising.stopped_early);

  cfg.rounds = 1;
  cfg.patience = 0;
  CHECK_THROWS_AS(elicit_knowledge(art.pool, b.space(), cfg, backend, sequence({0})), ConfigError);
}

TEST_CASE("elicitation is reproducible for a seed") {
  const auto& b = testsupport::synthetic();
  const auto art = testsupport::loo_artifacts("synth_00");
  ElicitationConfig cfg;
  cfg.rounds = 4;
  cfg.seed = 17;
  ScriptedBackend b1, b2;
  const auto r1 = elicit_knowledge(art.pool, b.space(), cfg, b1, sequence({1, 2, 3, 4}));
  const auto r2 = elicit_knowledge(art.pool, b.space(), cfg, b2, sequence({1, 2, 3, 4}));
  REQUIRE(r1.trace.size() == r2.trace.size());
  for (std::size_t i = 0; i < r1.trace.size(); ++i) {
    CHECK(r1.trace[i].sampled_tasks == r2.trace[i].sampled_tasks);
    CHECK(r1.trace[i].question == r2.trace[i].question);
    CHECK(r1.trace[i].temperature == r2.trace[i].temperature);
    CHECK(r1.trace[i].candidate == r2.trace[i].candidate);
  }
  cfg.seed = 18;
  ScriptedBackend b3;
  const auto r3 = elicit_knowledge(art.pool, b.space(), cfg, b3, sequence({1, 2, 3, 4}));
  CHECK(r3.trace[0].temperature != r1.trace[0].temperature);
}

TEST_CASE("a backend that always fails yields an elicitation error with the trace") {
  const auto& b = testsupport::synthetic();
  const auto art = testsupport::loo_artifacts("synth_00");
  DeadBackend dead;
  ElicitationConfig cfg;
  cfg.rounds = 3;
  cfg.patience = 5;
  try {
    elicit_knowledge(art.pool, b.space(), cfg, dead, sequence({1, 1, 1}));
    FAIL("expected an elicitation error");
  } catch (const ElicitationError& e) {
    CHECK(e.trace().size() == 3);
    CHECK_FALSE(e.trace()[0].score.has_value());
    CHECK(e.trace()[0].error.find("unavailable") != std::string::npos);
  }
  CHECK_THROWS_AS(elicit_knowledge(ExperiencePool{}, b.space(), cfg, dead, sequence({})), ConfigError);
}

TEST_CASE("candidates are scored by the mock online stage") {
  const auto& b = testsupport::synthetic();
  const auto art = testsupport::loo_artifacts("synth_00");
  const std::vector<std::string> val{"synth_04", "synth_09"};
  const auto train_pool =
      filter_pool(art.pool, {"synth_01", "synth_02", "synth_03", "synth_05", "synth_06", "synth_07", "synth_08",
                             "synth_10", "synth_11"});
  CHECK(train_pool.size() == 9);
  const ValidationContext ctx{b.space(), art.discretizers, train_pool, b, val, {}, SuggestionConfig{}};
  ScriptedBackend backend;
  const KnowledgeItem k{"synthetic-svm", "1. Prefer radial kernels.", 0.0, {}};
  double expected = 0;
  for (const auto& id : val)
    expected += normalize_accuracy(testsupport::nn_oracle_metric(b, id, {"synth_00", "synth_04", "synth_09"}), id, b);
  expected /= 2;
  CHECK(validate_candidate(k, ctx, backend) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS(validate_candidate({"synthetic-svm", "  ", 0.0, {}}, ctx, backend));

  ElicitationConfig cfg;
  cfg.rounds = 3;
  const auto r = elicit_knowledge(ctx, cfg, backend);
  CHECK(r.best.validation_score == doctest::Approx(expected).epsilon(1e-12));
  for (const auto& t : r.trace)
    for (const auto& id : t.sampled_tasks) CHECK(std::find(val.begin(), val.end(), id) == val.end());
}
