#include <gtest/gtest.h>

#include <thread>

#include "oracles.hpp"
#include "statewalk/errors.hpp"
#include "statewalk/explorer.hpp"
#include "statewalk/sim_env.hpp"

using namespace statewalk;

namespace {

SimAppSpec linear3() {
  return load_app_spec(std::string_view(R"({
    "name": "abc", "seed": 1, "entry_activity": "Main",
    "activities": [{"name": "Main", "intent_token": "Main", "screens": [
      {"id": "A", "tree": {"tag": "Main", "kind": "plain", "children": [
        {"tag": "A", "kind": "plain", "children": []}, {"tag": "Button", "kind": "plain", "children": []}]},
       "bindings": [{"path": [1], "action": "tap", "effect": "goto:B"}]},
      {"id": "B", "tree": {"tag": "Main", "kind": "plain", "children": [
        {"tag": "B", "kind": "plain", "children": []}, {"tag": "Button", "kind": "plain", "children": []}]},
       "bindings": [{"path": [1], "action": "tap", "effect": "goto:C"}]},
      {"id": "C", "tree": {"tag": "Main", "kind": "plain", "children": [
        {"tag": "C", "kind": "plain", "children": []}]}, "bindings": []}]}]})"));
}

// Drives env from a restart to `target` along the model's shortest path.
void drive_to(Environment& env, const StateModel& model, StateId target) {
  env.restart();
  const auto paths = model.enumerate_paths(target, PathLimits{1});
  for (const auto& step : paths.at(0).steps) env.perform(step.event);
}

class FaultyEnvironment final : public Environment {
 public:
  FaultyEnvironment(Environment& inner, std::size_t fail_after) : inner_(inner), left_(fail_after) {}
  ViewNode observe() override { return inner_.observe(); }
  std::string current_activity() override { return inner_.current_activity(); }
  IntentRecord current_intent() override { return inner_.current_intent(); }
  std::vector<UiEvent> actionable_widgets(const ViewNode& t) override {
    return inner_.actionable_widgets(t);
  }
  void perform(const UiEvent& e) override {
    if (left_-- == 0) throw std::runtime_error("device disconnected");
    inner_.perform(e);
  }
  void send_intent(const IntentRecord& r) override { inner_.send_intent(r); }
  void restart() override { inner_.restart(); }

 private:
  Environment& inner_;
  std::size_t left_;
};

// Flickers between two trees until observed `settle_after` times.
class FlickerEnvironment final : public Environment {
 public:
  ViewNode observe() override {
    ++calls;
    if (calls > 3) return ViewNode::node("Root", {ViewNode::leaf("Stable")});
    return ViewNode::node("Root", {ViewNode::leaf(calls % 2 ? "X" : "Y")});
  }
  std::string current_activity() override { return "Main"; }
  IntentRecord current_intent() override { return {"Main", "Main"}; }
  std::vector<UiEvent> actionable_widgets(const ViewNode&) override { return {}; }
  void perform(const UiEvent&) override {}
  void send_intent(const IntentRecord&) override {}
  void restart() override {}
  int calls = 0;
};

struct CountingHook : DetectorHook {
  std::string name() const override { return "count"; }
  std::optional<std::string> operate(const HookContext& ctx) override {
    seen.push_back(ctx.state);
    return std::nullopt;
  }
  std::vector<StateId> seen;
};

struct SlowHook : DetectorHook {
  std::string name() const override { return "slow"; }
  std::optional<std::string> operate(const HookContext&) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return std::string("late");
  }
};

}  // namespace

TEST(Explore, LinearApp) {
  SimEnvironment env(linear3());
  auto r = explore(env, EngineConfig{});
  EXPECT_EQ(r.model.state_count(), 3u);
  EXPECT_EQ(r.model.transition_count(), 2u);
  EXPECT_FALSE(r.stats.aborted);
  EXPECT_FALSE(r.stats.budget_exhausted);
  EXPECT_LT(r.coverage.samples().back().elapsed_ms, 1000);
}

TEST(Explore, TwentyScreenApp) {
  SimEnvironment env(load_corpus_app("twenty"));
  auto r = explore(env, EngineConfig{});
  EXPECT_EQ(r.model.state_count(), 20u);
  EXPECT_EQ(r.coverage.samples().back().states, 20u);
}

TEST(Explore, CycleTerminates) {
  SimEnvironment env(load_corpus_app("cycle"));
  auto r = explore(env, EngineConfig{});
  EXPECT_EQ(r.model.state_count(), 6u);
  EXPECT_EQ(r.model.transition_count(), 12u);
  EXPECT_FALSE(r.stats.budget_exhausted);
}

TEST(Explore, CompleteOnNoiselessCorpus) {
  for (const auto& name : corpus_names()) {
    SimAppSpec spec = load_corpus_app(name);
    if (!spec.noiseless()) continue;
    auto doc = oracle::read_json(corpus_dir().string() + "/" + name + ".json");
    SimEnvironment env(spec);
    auto r = explore(env, EngineConfig{});
    EXPECT_EQ(r.model.state_count(), oracle::reachable_screens(doc).size()) << name;
    EXPECT_EQ(r.stats.backtrack_failures, 0u) << name;
  }
}

TEST(Explore, TransitionsReplay) {
  for (const char* name : {"newsreader", "deep", "mall", "webview"}) {
    SimEnvironment env(load_corpus_app(name));
    auto r = explore(env, EngineConfig{});
    SimEnvironment fresh(load_corpus_app(name));
    for (const auto& t : r.model.transitions()) {
      drive_to(fresh, r.model, t.from);
      ASSERT_EQ(tree_hash(fresh.observe()), r.model.state(t.from).hash);
      fresh.perform(t.event);
      EXPECT_EQ(tree_hash(fresh.observe()), r.model.state(t.to).hash)
          << name << " " << to_string(t.from) << " " << t.event.label();
    }
  }
}

TEST(Explore, SelfLoopsRecorded) {
  SimEnvironment env(load_corpus_app("deep"));
  auto r = explore(env, EngineConfig{});
  std::size_t loops = 0;
  for (const auto& t : r.model.transitions()) loops += t.from == t.to;
  EXPECT_EQ(loops, 12u);
}

TEST(Explore, TypeTextUsesProbe) {
  SimEnvironment env(load_corpus_app("profile"));
  auto r = explore(env, EngineConfig{});
  bool typed = false;
  for (const auto& t : r.model.transitions()) {
    if (t.event.action == ActionType::type_text) {
      typed = true;
      EXPECT_EQ(t.event.value, "test");
    }
  }
  EXPECT_TRUE(typed);
}

TEST(Explore, HooksOncePerState) {
  SimEnvironment env(load_corpus_app("mall"));
  CountingHook hook;
  TagDetector never("NoSuchWidget");
  auto r = explore(env, EngineConfig{}, {&hook, &never});
  EXPECT_EQ(hook.seen.size(), r.model.state_count());
  std::set<StateId> unique(hook.seen.begin(), hook.seen.end());
  EXPECT_EQ(unique.size(), hook.seen.size());
  EXPECT_EQ(never.invocations, r.model.state_count());
  EXPECT_TRUE(r.findings.empty());
}

TEST(Explore, TagDetectorFlagsCrashScreen) {
  SimEnvironment env(load_corpus_app("crashy"));
  TagDetector hook("ErrorDialog");
  auto r = explore(env, EngineConfig{}, {&hook});
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(hook.outputs.size(), 1u);
  EXPECT_EQ(r.findings[0].hook, "tag:ErrorDialog");
}

TEST(Explore, SlowHookTimesOut) {
  SimEnvironment env(linear3());
  SlowHook hook;
  EngineConfig c;
  c.hook_timeout = std::chrono::milliseconds(10);
  auto r = explore(env, c, {&hook});
  EXPECT_EQ(r.model.state_count(), 3u);
  EXPECT_EQ(r.stats.hook_timeouts, 3u);
  EXPECT_TRUE(r.findings.empty());
}

TEST(Explore, EventBudget) {
  SimEnvironment env(load_corpus_app("mall"));
  EngineConfig c;
  c.max_events = 7;
  auto r = explore(env, c);
  EXPECT_TRUE(r.stats.budget_exhausted);
  EXPECT_EQ(r.stats.forward_events, 7u);
  EXPECT_LE(r.model.transition_count(), 7u);
}

TEST(Explore, TimeBudget) {
  SimEnvironment env(load_corpus_app("mall"));
  SlowHook slow;
  EngineConfig c;
  c.time_budget = std::chrono::milliseconds(300);
  auto start = std::chrono::steady_clock::now();
  auto r = explore(env, c, {&slow});
  auto took = std::chrono::steady_clock::now() - start;
  EXPECT_TRUE(r.stats.budget_exhausted);
  // one event plus one hook run of slack
  EXPECT_LT(took, std::chrono::milliseconds(300 + 2 * 200 + 100));
}

TEST(Explore, EnvironmentFaultKeepsPartialModel) {
  SimEnvironment sim(load_corpus_app("newsreader"));
  FaultyEnvironment env(sim, 5);
  auto r = explore(env, EngineConfig{});
  EXPECT_TRUE(r.stats.aborted);
  EXPECT_NE(r.stats.abort_reason.find("disconnected"), std::string::npos);
  EXPECT_GE(r.model.state_count(), 1u);
  // still a valid model
  StateModel back = StateModel::from_json(r.model.to_json());
  EXPECT_TRUE(equivalent(back, r.model));
}

TEST(Explore, RejectsBadConfig) {
  SimEnvironment env(linear3());
  EngineConfig c;
  c.similarity_threshold = 1.5;
  EXPECT_THROW(explore(env, c), std::invalid_argument);
  c = EngineConfig{};
  c.max_events = 0;
  EXPECT_THROW(explore(env, c), std::invalid_argument);
}

TEST(Explore, CoverageSamples) {
  SimEnvironment env(load_corpus_app("newsreader"));
  auto r = explore(env, EngineConfig{});
  const auto& s = r.coverage.samples();
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(s.front().states, 1u);
  EXPECT_EQ(s.front().transitions, 0u);
  EXPECT_EQ(s.front().events_sent, 0u);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GE(s[i].elapsed_ms, s[i - 1].elapsed_ms);
    EXPECT_GE(s[i].states, s[i - 1].states);
    EXPECT_GE(s[i].transitions, s[i - 1].transitions);
    EXPECT_GE(s[i].events_sent, s[i - 1].events_sent);
  }
  EXPECT_EQ(s.back().states, r.model.state_count());
  EXPECT_EQ(s.back().transitions, r.model.transition_count());
}

TEST(ObserveStable, WaitsForTwoEqualObservations) {
  FlickerEnvironment env;
  ViewNode t = observe_stable(env, 2);
  EXPECT_EQ(env.calls, 3);
  EXPECT_EQ(t.children()[0].tag(), "X");
  FlickerEnvironment env2;
  t = observe_stable(env2, 5);
  EXPECT_EQ(t.children()[0].tag(), "Stable");
  EXPECT_EQ(env2.calls, 5);
}

TEST(BackTrack, StateJustLeft) {
  SimAppSpec spec = load_corpus_app("newsreader");
  SimEnvironment sim(spec);
  auto r = explore(sim, EngineConfig{});
  for (const auto& t : r.model.transitions()) {
    if (t.from == t.to) continue;
    drive_to(sim, r.model, t.from);
    sim.perform(t.event);
    CountingEnvironment env(sim);
    auto report = back_track(env, r.model, t.from, EngineConfig{});
    EXPECT_EQ(tree_hash(sim.observe()), r.model.state(t.from).hash);
    EXPECT_FALSE(report.used_fallback);
    EXPECT_LE(env.intents, 1u);
    EXPECT_EQ(env.restarts, 0u);
    // the replay from the intent entry point is the state's own trace
    EXPECT_LE(report.replayed_events, r.model.state(t.from).ui_stack.size());
  }
}

TEST(BackTrack, OneIntentOneEvent) {
  // leaving a screen one tap below its activity entry costs at most 1 + 1
  SimEnvironment sim(load_corpus_app("deep"));
  auto r = explore(sim, EngineConfig{});
  std::size_t checked = 0;
  for (const auto& t : r.model.transitions()) {
    if (t.from == t.to || r.model.state(t.from).ui_stack.size() != 1) continue;
    drive_to(sim, r.model, t.from);
    sim.perform(t.event);
    CountingEnvironment env(sim);
    back_track(env, r.model, t.from, EngineConfig{});
    EXPECT_LE(env.intents, 1u);
    EXPECT_LE(env.performs, 1u);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(BackTrack, AcrossActivities) {
  SimEnvironment sim(load_corpus_app("mall"));
  EngineConfig config;
  auto r = explore(sim, config);
  for (const auto& s : r.model.states()) {
    sim.restart();
    back_track(sim, r.model, s.id, config);
    EXPECT_GE(similarity(s.snapshot, sim.observe()), config.similarity_threshold);
  }
}

TEST(BackTrack, CorruptedIntentFallsBack) {
  SimEnvironment sim(load_corpus_app("newsreader"));
  auto r = explore(sim, EngineConfig{});
  // rebuild the model with a broken token on every state
  auto doc = r.model.to_json();
  for (auto& st : doc["states"]) {
    if (!st["intent"].is_null()) st["intent"]["payload"] = "no-such-token";
  }
  StateModel broken = StateModel::from_json(doc);
  for (const auto& s : broken.states()) {
    drive_to(sim, broken, {broken.state_count() - 1});
    if (sim.current_activity() == s.activity) continue;
    auto report = back_track(sim, broken, s.id, EngineConfig{});
    EXPECT_TRUE(report.used_fallback);
    EXPECT_EQ(tree_hash(sim.observe()), s.hash);
  }
}

TEST(BackTrack, FailureCarriesBothTrees) {
  SimEnvironment sim(load_corpus_app("newsreader"));
  auto r = explore(sim, EngineConfig{});
  // same model, different app: nothing can be restored
  SimEnvironment other(load_corpus_app("cycle"));
  try {
    back_track(other, r.model, {3}, EngineConfig{});
    FAIL();
  } catch (const BacktrackError& e) {
    EXPECT_EQ(tree_hash(e.expected), r.model.state({3}).hash);
    EXPECT_EQ(tree_hash(e.observed), tree_hash(other.observe()));
  }
}

TEST(MatchesState, KnownOtherStateNeverAccepted) {
  SimEnvironment sim(load_corpus_app("newsreader"));
  EngineConfig loose;
  loose.similarity_threshold = 0.0;
  auto r = explore(sim, loose);
  for (const auto& a : r.model.states()) {
    for (const auto& b : r.model.states()) {
      EXPECT_EQ(matches_state(r.model, a.id, b.snapshot, loose), a.id == b.id);
    }
  }
}
