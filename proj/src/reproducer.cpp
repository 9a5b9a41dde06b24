#include "statewalk/reproducer.hpp"

#include "statewalk/errors.hpp"

namespace statewalk {

std::string_view to_string(ReproduceOutcome outcome) {
  switch (outcome) {
    case ReproduceOutcome::reached_exact: return "reached_exact";
    case ReproduceOutcome::reached_similar: return "reached_similar";
    case ReproduceOutcome::failed: return "failed";
  }
  return "failed";
}

nlohmann::json to_json(const ReproduceResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.per_step) {
    steps.push_back({{"expected", s.expected.ordinal},
                     {"observed_hash", s.observed_hash.hex()},
                     {"similarity", s.similarity}});
  }
  nlohmann::json j{{"outcome", std::string(to_string(r.outcome))},
                   {"target", r.target.ordinal},
                   {"steps_executed", r.steps_executed},
                   {"per_step", steps},
                   {"test_case_index", r.test_case_index},
                   {"test_cases_tried", r.test_cases_tried}};
  j["test_case"] = r.test_case ? to_json(*r.test_case) : nlohmann::json(nullptr);
  if (r.failure) {
    nlohmann::json f{{"step", r.failure->step}, {"reason", r.failure->reason}};
    f["expected"] = r.failure->expected ? to_json(*r.failure->expected) : nlohmann::json(nullptr);
    f["observed"] = r.failure->observed ? to_json(*r.failure->observed) : nlohmann::json(nullptr);
    j["failure"] = std::move(f);
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

std::vector<TestCase> generate_test_cases(const StateModel& model, StateId target,
                                          std::size_t max_paths) {
  PathLimits limits;
  limits.max_paths = max_paths;
  return model.enumerate_paths(target, limits);
}

ReproduceResult execute_test_case(Environment& env, const TestCase& tc, const StateModel& model,
                                  const EngineConfig& config) {
  ReproduceResult r;
  r.target = tc.target;
  r.test_case = tc;
  r.test_cases_tried = 1;
  bool all_exact = true;

  env.restart();
  ViewNode observed = observe_stable(env, config.stabilization_retries);
  StateId previous{0};

  auto fail = [&](std::string reason, StateId expected, std::optional<ViewNode> seen) {
    r.outcome = ReproduceOutcome::failed;
    r.failure = FailureDetail{r.steps_executed, std::move(reason),
                              model.state(expected).snapshot, std::move(seen)};
    return r;
  };

  for (const TestStep& step : tc.steps) {
    ++r.steps_executed;
    const ModelState& source = model.state(previous);
    const ModelState& want = model.state(step.expected);
    UiEvent event = step.event;
    if (config.tolerant_replay && tree_hash(observed) != source.hash) {
      auto resolved = resolve_locator(source.snapshot, event.widget_path, observed);
      if (!resolved) {
        r.per_step.push_back({step.expected, tree_hash(observed), 0.0});
        return fail("cannot re-resolve " + event.label(), step.expected, observed);
      }
      event.widget_path = std::move(*resolved);
    }
    try {
      env.perform(event);
    } catch (const ResolutionError& e) {
      r.per_step.push_back({step.expected, tree_hash(observed), 0.0});
      return fail(e.what(), step.expected, observed);
    }
    observed = observe_stable(env, config.stabilization_retries);
    const StructureHash h = tree_hash(observed);
    const bool exact = h == want.hash;
    const double sim = exact ? 1.0 : similarity(want.snapshot, observed, config.matching_cutoff);
    r.per_step.push_back({step.expected, h, sim});
    if (!exact) {
      // A screen the model knows as another state is never accepted.
      const bool similar = config.tolerant_replay && !model.find(h) &&
                           sim >= config.similarity_threshold;
      if (!similar) {
        return fail("expected " + to_string(step.expected) + ", similarity " +
                        std::to_string(sim),
                    step.expected, observed);
      }
      all_exact = false;
    }
    previous = step.expected;
  }
  if (tc.steps.empty() && tree_hash(observed) != model.state(tc.target).hash) {
    const bool similar = config.tolerant_replay &&
                         similarity(model.state(tc.target).snapshot, observed,
                                    config.matching_cutoff) >= config.similarity_threshold;
    if (!similar) return fail("entry screen differs", tc.target, observed);
    all_exact = false;
  }
  r.outcome = all_exact ? ReproduceOutcome::reached_exact : ReproduceOutcome::reached_similar;
  return r;
}

ReproduceResult reproduce(Environment& env, const StateModel& model, StateId target,
                          const EngineConfig& config, std::size_t max_paths) {
  if (!model.contains(target)) {
    ReproduceResult r;
    r.target = target;
    r.failure = FailureDetail{0, "unknown state " + to_string(target), std::nullopt, std::nullopt};
    return r;
  }
  const auto cases = generate_test_cases(model, target, max_paths);
  if (cases.empty()) {
    ReproduceResult r;
    r.target = target;
    r.failure = FailureDetail{0, "unreachable", model.state(target).snapshot, std::nullopt};
    return r;
  }
  ReproduceResult last;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    last = execute_test_case(env, cases[i], model, config);
    last.test_case_index = i;
    last.test_cases_tried = i + 1;
    if (last.success()) break;
  }
  return last;
}

}  // namespace statewalk
