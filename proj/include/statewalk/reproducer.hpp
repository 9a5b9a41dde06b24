#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "statewalk/environment.hpp"
#include "statewalk/explorer.hpp"
#include "statewalk/state_model.hpp"

namespace statewalk {

enum class ReproduceOutcome { reached_exact, reached_similar, failed };

std::string_view to_string(ReproduceOutcome outcome);

struct StepRecord {
  StateId expected;
  StructureHash observed_hash;
  double similarity = 0.0;
};

struct FailureDetail {
  std::size_t step = 0;  // 1-based; 0 when nothing ran
  std::string reason;
  std::optional<ViewNode> expected;
  std::optional<ViewNode> observed;
};

struct ReproduceResult {
  ReproduceOutcome outcome = ReproduceOutcome::failed;
  StateId target;
  std::size_t steps_executed = 0;
  std::vector<StepRecord> per_step;
  std::optional<FailureDetail> failure;
  std::optional<TestCase> test_case;
  // Index of the test case this result belongs to, and how many were run.
  std::size_t test_case_index = 0;
  std::size_t test_cases_tried = 0;

  bool success() const { return outcome != ReproduceOutcome::failed; }
};

nlohmann::json to_json(const ReproduceResult& result);

/// Paths from the entry to `target`, shortest first.
std::vector<TestCase> generate_test_cases(const StateModel& model, StateId target,
                                          std::size_t max_paths = 64);

/// Restarts `env` and runs `tc`, checking the state reached after every step.
/// When the screen differs from the recorded one, the next event's locator is
/// re-resolved structurally against what is actually shown.
ReproduceResult execute_test_case(Environment& env, const TestCase& tc, const StateModel& model,
                                  const EngineConfig& config);

/// Runs the generated test cases in order until one reaches `target`.
ReproduceResult reproduce(Environment& env, const StateModel& model, StateId target,
                          const EngineConfig& config, std::size_t max_paths = 64);

}  // namespace statewalk
