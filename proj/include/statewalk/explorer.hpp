#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "statewalk/coverage.hpp"
#include "statewalk/environment.hpp"
#include "statewalk/state_model.hpp"

namespace statewalk {

enum class BacktrackStrategy {
  // Resend the target activity's intent and replay its recorded trace.
  intent,
  // Restart the app and replay a shortest model path from the entry.
  restart_replay,
};

struct EngineConfig {
  // Minimum similarity for treating an unknown screen as a recorded state.
  double similarity_threshold = 0.8;
  // Cutoff for accepting a child pair inside similarity().
  double matching_cutoff = kDefaultMatchingCutoff;
  std::chrono::milliseconds time_budget{60'000};
  // Cap on exploration events; backtracking replays are not counted.
  std::size_t max_events = 100'000;
  // Extra observations allowed while waiting for two consecutive equal hashes.
  std::size_t stabilization_retries = 2;
  BacktrackStrategy backtrack = BacktrackStrategy::intent;
  // Structural locator re-resolution and similarity acceptance during replay.
  // Off gives the exact-hash-only baseline.
  bool tolerant_replay = true;
  std::chrono::milliseconds hook_timeout{2'000};
  std::string probe_text = "test";

  /// Throws std::invalid_argument.
  void validate() const;
};

struct HookContext {
  StateId state;
  const ViewNode& snapshot;
  const std::string& activity;
};

/// Per-state analysis plug-in. operate() runs once for every newly discovered
/// state; a returned finding is passed to output().
class DetectorHook {
 public:
  virtual ~DetectorHook() = default;
  virtual std::string name() const = 0;
  virtual void input(const std::string& data) { (void)data; }
  virtual std::optional<std::string> operate(const HookContext& context) = 0;
  virtual void output(const std::string& finding) { (void)finding; }
};

/// Flags states whose snapshot contains a node with the given tag.
class TagDetector : public DetectorHook {
 public:
  explicit TagDetector(std::string tag) : tag_(std::move(tag)) {}
  std::string name() const override { return "tag:" + tag_; }
  void input(const std::string& data) override { tag_ = data; }
  std::optional<std::string> operate(const HookContext& context) override;
  void output(const std::string& finding) override { outputs.push_back(finding); }

  std::size_t invocations = 0;
  std::vector<std::string> outputs;

 private:
  std::string tag_;
};

struct Finding {
  std::string hook;
  StateId state;
  std::string message;
};

struct ExploreStats {
  std::size_t forward_events = 0;
  std::size_t backtracks = 0;
  std::size_t backtrack_fallbacks = 0;
  std::size_t backtrack_failures = 0;
  std::size_t hook_timeouts = 0;
  bool budget_exhausted = false;
  bool aborted = false;
  std::string abort_reason;
};

struct ExploreResult {
  StateModel model;
  CoverageLog coverage;
  std::vector<Finding> findings;
  ExploreStats stats;
};

using ProgressFn = std::function<void(const StateModel&, const CoverageLog&)>;

/// Depth-first exploration from the environment's current (entry) screen.
/// Environment faults end the run early with the partial model intact.
ExploreResult explore(Environment& env, const EngineConfig& config,
                      const std::vector<DetectorHook*>& hooks = {},
                      const ProgressFn& progress = {});

struct BacktrackError : std::runtime_error {
  BacktrackError(const std::string& what, ViewNode expected, ViewNode observed)
      : std::runtime_error(what), expected(std::move(expected)), observed(std::move(observed)) {}
  ViewNode expected;
  ViewNode observed;
};

struct BacktrackReport {
  bool intent_sent = false;
  std::size_t replayed_events = 0;
  bool used_fallback = false;
};

/// Drives `env` back to `target`. With the intent strategy: resend the target
/// activity's intent if the activity differs, then resume the target's replay
/// trace from the deepest recorded state matching the observation. Falls back
/// to restart and replay from the entry; throws BacktrackError if that fails.
BacktrackReport back_track(Environment& env, const StateModel& model, StateId target,
                           const EngineConfig& config);

/// Observes until two consecutive hashes agree or the retries run out.
ViewNode observe_stable(Environment& env, std::size_t retries);

/// Whether `observed` is `expected`: equal hash, or (when tolerant) a screen
/// unknown to the model whose similarity exceeds the threshold.
bool matches_state(const StateModel& model, StateId expected, const ViewNode& observed,
                   const EngineConfig& config);

}  // namespace statewalk
