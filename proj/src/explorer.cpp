#include "statewalk/explorer.hpp"

#include <future>
#include <memory>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "statewalk/errors.hpp"

namespace statewalk {

void EngineConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(similarity_threshold)) throw std::invalid_argument("similarity_threshold not in [0,1]");
  if (!unit(matching_cutoff)) throw std::invalid_argument("matching_cutoff not in [0,1]");
  if (time_budget.count() <= 0) throw std::invalid_argument("time_budget must be positive");
  if (max_events == 0) throw std::invalid_argument("max_events must be positive");
  if (hook_timeout.count() <= 0) throw std::invalid_argument("hook_timeout must be positive");
}

std::optional<std::string> TagDetector::operate(const HookContext& context) {
  ++invocations;
  std::function<bool(const ViewNode&)> has = [&](const ViewNode& n) {
    if (n.tag() == tag_) return true;
    for (const auto& c : n.children()) {
      if (has(c)) return true;
    }
    return false;
  };
  if (!has(context.snapshot)) return std::nullopt;
  return to_string(context.state) + " (" + context.activity + ") shows " + tag_;
}

ViewNode observe_stable(Environment& env, std::size_t retries) {
  ViewNode last = env.observe();
  for (std::size_t i = 0; i < retries; ++i) {
    ViewNode next = env.observe();
    const bool stable = tree_hash(next) == tree_hash(last);
    last = std::move(next);
    if (stable) break;
  }
  return last;
}

bool matches_state(const StateModel& model, StateId expected, const ViewNode& observed,
                   const EngineConfig& config) {
  const ModelState& want = model.state(expected);
  const StructureHash h = tree_hash(observed);
  if (h == want.hash) return true;
  if (!config.tolerant_replay || model.find(h)) return false;
  return similarity(want.snapshot, observed, config.matching_cutoff) > config.similarity_threshold;
}

namespace {

// Performs `event`, recorded against `source`, on the current screen `observed`.
void perform_from(Environment& env, const ViewNode& source, UiEvent event,
                  const ViewNode& observed, const EngineConfig& config) {
  if (config.tolerant_replay && tree_hash(source) != tree_hash(observed)) {
    auto resolved = resolve_locator(source, event.widget_path, observed);
    if (!resolved) {
      throw ResolutionError("cannot re-resolve " + event.label() + " on the current screen");
    }
    event.widget_path = std::move(*resolved);
  }
  env.perform(event);
}

// Replays `steps` (each a source state plus event) verifying every landing
// state; the last landing state is `target`.
bool replay_trace(Environment& env, const StateModel& model, const std::vector<TraceStep>& steps,
                  std::size_t from, StateId target, ViewNode observed, const EngineConfig& config,
                  BacktrackReport& report) {
  for (std::size_t k = from; k < steps.size(); ++k) {
    const StateId expect = k + 1 < steps.size() ? steps[k + 1].state : target;
    try {
      perform_from(env, model.state(steps[k].state).snapshot, steps[k].event, observed, config);
    } catch (const ResolutionError&) {
      return false;
    }
    ++report.replayed_events;
    observed = observe_stable(env, config.stabilization_retries);
    if (!matches_state(model, expect, observed, config)) return false;
  }
  return matches_state(model, target, observed, config);
}

// Algorithm-3 style resume: scan the trace from the deepest entry backwards.
bool resume_from_trace(Environment& env, const StateModel& model, StateId target,
                       const EngineConfig& config, BacktrackReport& report) {
  ViewNode observed = observe_stable(env, config.stabilization_retries);
  if (matches_state(model, target, observed, config)) return true;
  const auto& stack = model.state(target).ui_stack;
  const StructureHash h = tree_hash(observed);
  std::optional<std::size_t> start;
  for (std::size_t k = stack.size(); k-- > 0;) {
    if (model.state(stack[k].state).hash == h) {
      start = k;
      break;
    }
  }
  if (!start && config.tolerant_replay && !model.find(h)) {
    for (std::size_t k = stack.size(); k-- > 0;) {
      if (similarity(model.state(stack[k].state).snapshot, observed, config.matching_cutoff) >
          config.similarity_threshold) {
        start = k;
        break;
      }
    }
  }
  if (!start) return false;
  return replay_trace(env, model, stack, *start, target, std::move(observed), config, report);
}

}  // namespace

BacktrackReport back_track(Environment& env, const StateModel& model, StateId target,
                           const EngineConfig& config) {
  BacktrackReport report;
  const ModelState& goal = model.state(target);

  if (config.backtrack == BacktrackStrategy::intent && goal.intent) {
    try {
      if (env.current_activity() != goal.activity) {
        env.send_intent(*goal.intent);
        report.intent_sent = true;
      }
      if (resume_from_trace(env, model, target, config, report)) return report;
      if (!report.intent_sent) {
        env.send_intent(*goal.intent);
        report.intent_sent = true;
        if (resume_from_trace(env, model, target, config, report)) return report;
      }
    } catch (const IntentError& e) {
      spdlog::debug("intent backtrack to {} failed: {}", to_string(target), e.what());
    }
  }

  report.used_fallback = true;
  env.restart();
  auto paths = model.enumerate_paths(target, PathLimits{1, std::nullopt, 200'000});
  ViewNode observed = observe_stable(env, config.stabilization_retries);
  if (!paths.empty()) {
    std::vector<TraceStep> steps;
    StateId at{0};
    for (const auto& s : paths.front().steps) {
      steps.push_back({at, s.event});
      at = s.expected;
    }
    if (steps.empty() ? matches_state(model, target, observed, config)
                      : replay_trace(env, model, steps, 0, target, observed, config, report)) {
      return report;
    }
    observed = observe_stable(env, config.stabilization_retries);
  }
  throw BacktrackError("cannot restore " + to_string(target), goal.snapshot, std::move(observed));
}

// ---------------------------------------------------------------------------

namespace {

struct Frame {
  StateId id;
  std::vector<UiEvent> events;
  std::size_t next = 0;
};

class Session {
 public:
  Session(Environment& env, const EngineConfig& config, const std::vector<DetectorHook*>& hooks,
          const ProgressFn& progress)
      : env_(env),
        config_(config),
        hooks_(hooks),
        progress_(progress),
        start_(std::chrono::steady_clock::now()) {}

  ExploreResult run();

 private:
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }
  std::vector<UiEvent> events_for(const ViewNode& tree);
  void fire_hooks(StateId id);
  void sample();

  CountingEnvironment env_;
  const EngineConfig& config_;
  const std::vector<DetectorHook*>& hooks_;
  const ProgressFn& progress_;
  std::chrono::steady_clock::time_point start_;
  ExploreResult result_;
  std::vector<std::future<std::optional<std::string>>> late_hooks_;
};

std::vector<UiEvent> Session::events_for(const ViewNode& tree) {
  auto events = env_.actionable_widgets(tree);
  for (auto& e : events) {
    if (e.action == ActionType::type_text) e.value = config_.probe_text;
  }
  return events;
}

void Session::fire_hooks(StateId id) {
  const ModelState& st = result_.model.state(id);
  for (DetectorHook* hook : hooks_) {
    auto task = std::async(std::launch::async, [hook, id, snap = st.snapshot,
                                                activity = st.activity]() {
      return hook->operate(HookContext{id, snap, activity});
    });
    if (task.wait_for(config_.hook_timeout) != std::future_status::ready) {
      ++result_.stats.hook_timeouts;
      spdlog::warn("hook {} timed out on {}", hook->name(), to_string(id));
      late_hooks_.push_back(std::move(task));
      continue;
    }
    if (auto finding = task.get()) {
      hook->output(*finding);
      result_.findings.push_back({hook->name(), id, *finding});
    }
  }
}

void Session::sample() {
  result_.coverage.record_sample(result_.model, [this] { return elapsed_ms(); },
                                 env_.events_sent());
  if (progress_) progress_(result_.model, result_.coverage);
}

ExploreResult Session::run() {
  StateModel& model = result_.model;
  ExploreStats& stats = result_.stats;
  std::vector<Frame> frames;
  std::optional<StateId> at;
  ViewNode current;

  try {
    current = observe_stable(env_, config_.stabilization_retries);
    auto root = model.add_state(current, env_.current_activity(), {}, env_.current_intent());
    fire_hooks(root.id);
    frames.push_back({root.id, events_for(current)});
    at = root.id;
    sample();

    while (!frames.empty()) {
      if (std::chrono::milliseconds(elapsed_ms()) >= config_.time_budget ||
          stats.forward_events >= config_.max_events) {
        stats.budget_exhausted = true;
        break;
      }
      Frame& frame = frames.back();
      if (frame.next == frame.events.size()) {
        frames.pop_back();
        continue;
      }
      const StateId source = frame.id;
      if (at != source) {
        ++stats.backtracks;
        try {
          auto report = back_track(env_, model, source, config_);
          if (report.used_fallback) ++stats.backtrack_fallbacks;
        } catch (const BacktrackError& e) {
          ++stats.backtrack_failures;
          spdlog::warn("{}; abandoning its remaining events", e.what());
          frames.pop_back();
          at.reset();
          continue;
        }
        at = source;
        current = observe_stable(env_, config_.stabilization_retries);
      }
      const UiEvent event = frame.events[frame.next++];

      // Copies: add_state below may reallocate the state table.
      const ModelState& from = model.state(source);
      const std::string from_activity = from.activity;
      std::vector<TraceStep> stack = from.ui_stack;
      std::optional<IntentRecord> intent = from.intent;
      const ViewNode from_snapshot = from.snapshot;

      ++stats.forward_events;
      try {
        perform_from(env_, from_snapshot, event, current, config_);
      } catch (const ResolutionError& e) {
        spdlog::warn("skipping {} on {}: {}", event.label(), to_string(source), e.what());
        at.reset();
        sample();
        continue;
      }
      current = observe_stable(env_, config_.stabilization_retries);
      std::string activity = env_.current_activity();
      if (activity == from_activity) {
        stack.push_back({source, event});
      } else {
        stack.clear();
        intent = env_.current_intent();
      }
      auto added = model.add_state(current, std::move(activity), std::move(stack),
                                   std::move(intent));
      model.add_transition(source, event, added.id);
      at = added.id;
      if (added.is_new) {
        fire_hooks(added.id);
        frames.push_back({added.id, events_for(current)});
      }
      sample();
    }
  } catch (const std::exception& e) {
    stats.aborted = true;
    stats.abort_reason = e.what();
    spdlog::error("exploration aborted: {}", e.what());
  }
  if (!result_.coverage.empty()) sample();
  for (auto& f : late_hooks_) f.wait();
  return std::move(result_);
}

}  // namespace

ExploreResult explore(Environment& env, const EngineConfig& config,
                      const std::vector<DetectorHook*>& hooks, const ProgressFn& progress) {
  config.validate();
  Session session(env, config, hooks, progress);
  return session.run();
}

}  // namespace statewalk
