#include "expcopilot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#include "json.hpp"

#include "expcopilot/baselines.hpp"
#include "expcopilot/error.hpp"
#include "expcopilot/rng.hpp"
#include "expcopilot/suggestion.hpp"

namespace expcopilot {

OfflineArtifacts build_offline(std::span<const ExperienceRecord> records, const SolutionSpace& space,
                               Direction dir, const std::map<std::string, EmbeddingVector>& embeddings,
                               std::size_t best_per_task) {
  if (records.empty()) throw ConfigError("no history records");
  OfflineArtifacts out;
  out.discretizers = fit_discretizers(records, space, dir);

  std::vector<const Task*> order;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.task().task_id).second) order.push_back(&r.task());

  std::vector<PoolEntry> entries;
  for (const Task* t : order) {
    auto emb = embeddings.find(t->task_id);
    if (emb == embeddings.end()) throw ConfigError("no embedding for task '" + t->task_id + "'");
    PoolEntry e{*t, emb->second, {}};
    for (std::size_t i : best_solutions(records, t->task_id, best_per_task, dir))
      e.best.push_back(canonicalize(records[i], space, out.discretizers));
    entries.push_back(std::move(e));
  }
  out.pool = ExperiencePool(std::move(entries));
  return out;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::random: return "random";
    case Method::constant: return "constant";
    case Method::nearest: return "nearest";
    case Method::copilot: return "copilot";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  const std::string t = normalize_text(text);
  if (t == "random") return Method::random;
  if (t == "constant") return Method::constant;
  if (t == "nearest" || t == "nearest-task") return Method::nearest;
  if (t == "copilot" || t == "pipeline") return Method::copilot;
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::vector<std::string> audit_prompt(std::string_view prompt, const Task& held_out,
                                      std::span<const Task> twins) {
  const std::string own_section = "Dataset: " + held_out.description;
  if (prompt.size() >= own_section.size() &&
      prompt.substr(prompt.size() - own_section.size()) == own_section)
    prompt.remove_suffix(own_section.size());

  std::vector<std::string> leaked;
  auto scan = [&](const Task& t) {
    if (prompt.find(t.task_id) != std::string_view::npos) leaked.push_back(t.task_id);
    if (!t.description.empty() && prompt.find(t.description) != std::string_view::npos)
      leaked.push_back(t.description);
  };
  scan(held_out);
  for (const auto& t : twins) scan(t);
  return leaked;
}

namespace {

struct UnitResult {
  std::vector<EvalRow> rows;  // one per method
  std::vector<AuditViolation> violations;
  std::size_t prompts = 0;
  std::size_t elicitation_failures = 0;
};

void score_row(EvalRow& row, const Benchmark& b, std::span<const Solution> sols) {
  if (sols.empty()) throw Error("method returned no solutions");
  std::vector<double> m;
  for (const auto& s : sols) m.push_back(evaluate_solution(b, row.task_id, s));
  for (std::size_t t = 1; t <= 3; ++t) {
    row.metric[t - 1] = metric_at_t(m, std::min(t, m.size()), b.direction());
    row.nacc[t - 1] = normalize_accuracy(row.metric[t - 1], row.task_id, b);
  }
}

void fail_row(EvalRow& row, const Benchmark& b, const std::string& what) {
  const auto [lo, hi] = b.norm_bounds(row.task_id);
  const double worst = b.direction() == Direction::higher_better ? lo : hi;
  row.metric.fill(worst);
  row.nacc.fill(0.0);
  row.failed = true;
  row.error = what;
}

}  // namespace

EvalReport run_loo_eval(const Benchmark& b, std::span<const Method> methods,
                        std::span<const std::uint64_t> seeds, const EvalConfig& cfg, Backend* backend) {
  if (b.tasks().size() < 2) throw ConfigError("leave-one-out needs at least 2 tasks");
  if (methods.empty()) throw ConfigError("no methods to evaluate");
  if (seeds.empty()) throw ConfigError("no seeds");
  if (cfg.n_suggestions < 1) throw ConfigError("n_suggestions must be >= 1");
  SuggestionConfig scfg = cfg.suggestion;
  scfg.n_suggestions = cfg.n_suggestions;
  scfg.task_kind = b.task_kind();
  scfg.validate();
  if (cfg.elicit) cfg.elicitation.validate();

  const bool copilot = std::find(methods.begin(), methods.end(), Method::copilot) != methods.end();
  if (copilot && !backend) throw ConfigError("the copilot method needs a backend");

  // Task descriptions are embedded once; each fold only uses its training
  // tasks' vectors plus the held-out query.
  std::map<std::string, EmbeddingVector> embeddings;
  if (copilot) {
    std::vector<std::string> texts;
    for (const auto& t : b.tasks()) texts.push_back(t.description);
    auto vecs = embed_all(*backend, texts, cfg.embed_parallel);
    for (std::size_t i = 0; i < vecs.size(); ++i) embeddings.emplace(b.tasks()[i].task_id, std::move(vecs[i]));
  }

  const std::size_t n_tasks = b.tasks().size();
  const std::size_t n_units = seeds.size() * n_tasks;
  std::vector<UnitResult> units(n_units);
  std::exception_ptr fatal;

#pragma omp parallel for schedule(dynamic)
  for (long u = 0; u < static_cast<long>(n_units); ++u) {
    try {
      const std::uint64_t seed = seeds[static_cast<std::size_t>(u) / n_tasks];
      const Task& held = b.tasks()[static_cast<std::size_t>(u) % n_tasks];
      UnitResult& res = units[static_cast<std::size_t>(u)];

      std::set<std::string> excluded{held.task_id};
      std::vector<Task> twins;
      for (const auto& id : b.twins_of(held.task_id)) {
        excluded.insert(id);
        if (b.has_task(id)) twins.push_back(b.task(id));
      }
      std::vector<std::string> train;
      for (const auto& t : b.tasks())
        if (!excluded.count(t.task_id)) train.push_back(t.task_id);

      std::optional<std::vector<Solution>> constant;
      auto constant_portfolio = [&]() -> const std::vector<Solution>& {
        if (!constant) constant = baseline_constant(b, train, cfg.n_suggestions);
        return *constant;
      };

      for (Method method : methods) {
        EvalRow row;
        row.method = method;
        row.seed = seed;
        row.task_id = held.task_id;
        try {
          if (train.empty()) throw Error("no training tasks remain after holding out '" + held.task_id + "'");
          std::vector<Solution> sols;
          switch (method) {
            case Method::random:
              sols = baseline_random(b, held.task_id, cfg.n_suggestions,
                                     Rng::stream(seed, "eval/random/" + held.task_id).next());
              break;
            case Method::constant:
              sols = constant_portfolio();
              break;
            case Method::nearest:
              sols = baseline_nearest_task(b, train, held.task_id, cfg.n_suggestions);
              break;
            case Method::copilot: {
              RecordingBackend rec(*backend);
              const auto records = b.records(train);
              const OfflineArtifacts art = build_offline(records, b.space(), b.direction(), embeddings);
              const auto& fallback = constant_portfolio();
              std::vector<KnowledgeItem> knowledge;
              if (cfg.elicit) {
                try {
                  const auto split = split_validation(
                      train, cfg.elicitation.val_fraction, Rng::stream(seed, "eval/split/" + held.task_id).next());
                  const ExperiencePool epool =
                      filter_pool(art.pool, std::set<std::string>(split.train.begin(), split.train.end()));
                  const ValidationContext vctx{b.space(), art.discretizers, epool, b,
                                               split.validation, fallback, scfg};
                  ElicitationConfig ecfg = cfg.elicitation;
                  ecfg.seed = Rng::stream(seed, "elicit/" + held.task_id).next();
                  knowledge.push_back(elicit_knowledge(vctx, ecfg, rec).best);
                } catch (const Error&) {
                  ++res.elicitation_failures;
                }
              }
              const SuggestionContext sctx{b.space(), art.discretizers, art.pool, knowledge, fallback};
              const SuggestionSet set = suggest(held, sctx, scfg, rec, excluded);
              for (const auto& s : set.solutions) sols.push_back(s.concrete);

              if (cfg.audit) {
                for (const auto& req : rec.requests()) {
                  ++res.prompts;
                  for (auto& needle : audit_prompt(req.prompt, held, twins))
                    res.violations.push_back({seed, held.task_id, std::move(needle)});
                }
              }
              break;
            }
          }
          score_row(row, b, sols);
        } catch (const Error& e) {
          fail_row(row, b, e.what());
        }
        res.rows.push_back(std::move(row));
      }
    } catch (...) {
#pragma omp critical(expcopilot_eval_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  EvalReport report;
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (const auto& unit : units) report.rows.push_back(unit.rows[m]);
  for (auto& unit : units) {
    report.violations.insert(report.violations.end(), unit.violations.begin(), unit.violations.end());
    report.prompts_audited += unit.prompts;
    report.elicitation_failures += unit.elicitation_failures;
  }
  return report;
}

std::vector<MethodSummary> summarize(const EvalReport& report) {
  std::vector<MethodSummary> out;
  auto find = [&](Method m) -> MethodSummary& {
    for (auto& s : out)
      if (s.method == m) return s;
    out.push_back({});
    out.back().method = m;
    return out.back();
  };
  for (const auto& r : report.rows) {
    MethodSummary& s = find(r.method);
    ++s.rows;
    if (r.failed) ++s.failures;
    for (std::size_t t = 0; t < 3; ++t) {
      s.nacc_mean[t] += r.nacc[t];
      s.metric_mean[t] += r.metric[t];
    }
  }
  for (auto& s : out)
    for (std::size_t t = 0; t < 3; ++t) {
      s.nacc_mean[t] /= static_cast<double>(s.rows);
      s.metric_mean[t] /= static_cast<double>(s.rows);
    }
  for (const auto& r : report.rows) {
    MethodSummary& s = find(r.method);
    for (std::size_t t = 0; t < 3; ++t) {
      s.nacc_std[t] += (r.nacc[t] - s.nacc_mean[t]) * (r.nacc[t] - s.nacc_mean[t]);
      s.metric_std[t] += (r.metric[t] - s.metric_mean[t]) * (r.metric[t] - s.metric_mean[t]);
    }
  }
  for (auto& s : out)
    for (std::size_t t = 0; t < 3; ++t) {
      s.nacc_std[t] = std::sqrt(s.nacc_std[t] / static_cast<double>(s.rows));
      s.metric_std[t] = std::sqrt(s.metric_std[t] / static_cast<double>(s.rows));
    }
  return out;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "method,seed,task_id,metric@1,metric@2,metric@3,nacc@1,nacc@2,nacc@3,failed\n";
  for (const auto& r : report.rows) {
    out += to_string(r.method) + ',' + std::to_string(r.seed) + ',' + r.task_id;
    for (double v : r.metric) out += ',' + format_real(v);
    for (double v : r.nacc) out += ',' + format_real(v);
    out += r.failed ? ",1\n" : ",0\n";
  }
  return out;
}

std::string report_json(const EvalReport& report, const Benchmark& b) {
  nlohmann::ordered_json j;
  j["benchmark"] = b.name();
  j["direction"] = to_string(b.direction());
  std::set<std::uint64_t> seeds;
  std::set<std::string> tasks;
  for (const auto& r : report.rows) {
    seeds.insert(r.seed);
    tasks.insert(r.task_id);
  }
  j["seeds"] = seeds;
  j["tasks"] = tasks.size();
  j["methods"] = nlohmann::ordered_json::array();
  for (const auto& s : summarize(report)) {
    nlohmann::ordered_json m;
    m["method"] = to_string(s.method);
    m["rows"] = s.rows;
    m["failures"] = s.failures;
    for (std::size_t t = 0; t < 3; ++t) {
      const std::string at = "@" + std::to_string(t + 1);
      m["nacc" + at] = {{"mean", s.nacc_mean[t]}, {"std", s.nacc_std[t]}};
      m["metric" + at] = {{"mean", s.metric_mean[t]}, {"std", s.metric_std[t]}};
    }
    j["methods"].push_back(std::move(m));
  }
  j["audit"] = {{"prompts", report.prompts_audited}, {"violations", report.violations.size()}};
  j["elicitation_failures"] = report.elicitation_failures;
  return j.dump(2) + "\n";
}

}  // namespace expcopilot
