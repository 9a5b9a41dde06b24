#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "statewalk/errors.hpp"
#include "statewalk/state_model.hpp"

using namespace statewalk;

namespace {

ViewNode screen(const std::string& name) {
  return ViewNode::node("Activity", {ViewNode::leaf(name), ViewNode::leaf("Button")});
}

UiEvent tap(std::size_t i) { return UiEvent{ActionType::tap, {i}, std::nullopt}; }

StateModel chain_model(std::size_t n) {
  StateModel m;
  for (std::size_t i = 0; i < n; ++i) m.add_state(screen("S" + std::to_string(i)), "Main");
  return m;
}

StateModel diamond() {
  StateModel m = chain_model(4);
  m.add_transition({0}, tap(0), {1});
  m.add_transition({0}, tap(1), {2});
  m.add_transition({1}, tap(0), {3});
  m.add_transition({2}, tap(0), {3});
  return m;
}

StateModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t edges) {
  StateModel m = chain_model(n);
  for (std::size_t e = 0; e < edges; ++e) {
    m.add_transition({rng() % n}, tap(rng() % 3), {rng() % n});
  }
  return m;
}

}  // namespace

TEST(AddState, FirstIsEntry) {
  StateModel m;
  auto r = m.add_state(screen("A"), "Main");
  EXPECT_EQ(r.id, StateId{0});
  EXPECT_TRUE(r.is_new);
  EXPECT_EQ(m.entry(), StateId{0});
}

TEST(AddState, PermutedSnapshotIsSameState) {
  StateModel m;
  m.add_state(ViewNode::node("Root", {ViewNode::leaf("A"), ViewNode::leaf("B")}), "Main");
  auto r = m.add_state(ViewNode::node("Root", {ViewNode::leaf("B"), ViewNode::leaf("A")}), "Main");
  EXPECT_EQ(r.id, StateId{0});
  EXPECT_FALSE(r.is_new);
}

TEST(AddState, DenseOrdinals) {
  StateModel m = chain_model(3);
  auto r = m.add_state(screen("new"), "Main");
  EXPECT_EQ(r.id, StateId{3});
  EXPECT_TRUE(r.is_new);
  for (std::size_t i = 0; i < m.state_count(); ++i) {
    EXPECT_EQ(m.states()[i].id.ordinal, i);
    EXPECT_EQ(m.find(tree_hash(m.states()[i].snapshot)), StateId{i});
  }
}

TEST(AddTransition, StoreIdempotentOverwrite) {
  StateModel m = chain_model(3);
  EXPECT_EQ(m.add_transition({0}, tap(0), {1}), TransitionUpdate::added);
  EXPECT_EQ(m.target_of({0}, tap(0)), StateId{1});
  EXPECT_EQ(m.add_transition({0}, tap(0), {1}), TransitionUpdate::unchanged);
  EXPECT_EQ(m.nondeterminism_warnings(), 0u);
  EXPECT_EQ(m.add_transition({0}, tap(0), {2}), TransitionUpdate::overwritten);
  EXPECT_EQ(m.nondeterminism_warnings(), 1u);
  EXPECT_EQ(m.target_of({0}, tap(0)), StateId{2});
  EXPECT_EQ(m.transition_count(), 1u);
  EXPECT_THROW(m.add_transition({0}, tap(0), {9}), ModelError);
  EXPECT_THROW(m.add_transition({9}, tap(0), {0}), ModelError);
}

TEST(AddTransition, TerminalStatesAndEvents) {
  StateModel m = diamond();
  EXPECT_EQ(m.terminal_states(), std::vector<StateId>{StateId{3}});
  EXPECT_EQ(m.event_universe().size(), 2u);
}

TEST(EnumeratePaths, EntryTarget) {
  StateModel m = diamond();
  auto paths = m.enumerate_paths({0});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].length(), 0u);
}

TEST(EnumeratePaths, Diamond) {
  StateModel m = diamond();
  auto paths = m.enumerate_paths({3}, PathLimits{10});
  auto want = oracle::all_simple_paths(m, {3});
  ASSERT_EQ(paths.size(), 2u);
  ASSERT_EQ(want.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    ASSERT_EQ(paths[i].length(), 2u);
    EXPECT_EQ(paths[i].steps[0].expected.ordinal, want[i].states[1]);
    EXPECT_EQ(paths[i].steps[1].expected, StateId{3});
  }
  EXPECT_EQ(paths[0].steps[0].expected, StateId{1});
}

TEST(EnumeratePaths, Disconnected) {
  StateModel m = diamond();
  m.add_state(screen("island"), "Main");
  EXPECT_TRUE(m.enumerate_paths({4}).empty());
  EXPECT_THROW(m.enumerate_paths({99}), ModelError);
}

TEST(EnumeratePaths, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 2 + rng() % 7;
    StateModel m = random_model(rng, n, rng() % (3 * n));
    for (std::size_t t = 0; t < n; ++t) {
      auto want = oracle::all_simple_paths(m, {t});
      auto got = m.enumerate_paths({t}, PathLimits{1000});
      ASSERT_EQ(got.size(), want.size()) << "round " << round << " target " << t;
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].length() + 1, want[i].states.size());
        for (std::size_t k = 0; k < got[i].length(); ++k) {
          ASSERT_EQ(got[i].steps[k].expected.ordinal, want[i].states[k + 1]);
          ASSERT_EQ(got[i].steps[k].event, want[i].events[k]);
        }
        EXPECT_EQ(got[i].target, StateId{t});
      }
    }
  }
}

TEST(EnumeratePaths, ShortestFirstAndCapped) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 3 + rng() % 10;
    StateModel m = random_model(rng, n, 3 * n);
    auto dist = oracle::bfs_distances(m, {0});
    for (std::size_t t = 0; t < n; ++t) {
      auto got = m.enumerate_paths({t}, PathLimits{5});
      EXPECT_LE(got.size(), 5u);
      if (!dist.count(t)) {
        EXPECT_TRUE(got.empty());
        continue;
      }
      ASSERT_FALSE(got.empty());
      EXPECT_EQ(got[0].length(), dist[t]);
      for (std::size_t i = 1; i < got.size(); ++i) EXPECT_LE(got[i - 1].length(), got[i].length());
    }
  }
}

TEST(Export, EmptyModel) {
  StateModel m;
  auto g = m.export_graph();
  EXPECT_TRUE(g["nodes"].empty());
  EXPECT_TRUE(g["edges"].empty());
}

TEST(Export, TwoStatesOneEdge) {
  StateModel m = chain_model(2);
  m.add_transition({0}, tap(0), {1});
  auto g = m.export_graph();
  ASSERT_EQ(g["nodes"].size(), 2u);
  ASSERT_EQ(g["edges"].size(), 1u);
  EXPECT_EQ(g["edges"][0]["label"], "tap@[0]");
  EXPECT_EQ(g["nodes"][1]["snapshot_ref"], "snapshots/S1.json");
  const std::string dot = m.export_dot();
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("S0 -> S1"), std::string::npos);
}

TEST(Export, GraphRoundTrip) {
  std::mt19937_64 rng(8);
  StateModel m = random_model(rng, 6, 12);
  auto g = m.export_graph();
  StateModel back = StateModel::import_graph(g, [&](const std::string& ref) {
    for (const auto& s : m.states()) {
      if (StateModel::snapshot_ref(s.id) == ref) return s.snapshot;
    }
    throw std::runtime_error("no snapshot " + ref);
  });
  EXPECT_TRUE(equivalent(m, back));
}

TEST(Export, ModelJsonRoundTrip) {
  std::mt19937_64 rng(9);
  StateModel m = random_model(rng, 7, 15);
  TraceStep step{{0}, tap(1)};
  m.add_state(screen("traced"), "Other", {step}, IntentRecord{"Other", "other"});
  StateModel back = StateModel::from_json(m.to_json());
  EXPECT_TRUE(equivalent(m, back));
  EXPECT_EQ(back.to_json().dump(), m.to_json().dump());
  EXPECT_EQ(back.state({7}).ui_stack, std::vector<TraceStep>{step});
}

TEST(Invariants, HashToStateInjective) {
  oracle::TreeGen gen(21);
  StateModel m;
  for (int i = 0; i < 2000; ++i) m.add_state(gen.tree(6), "Main");
  std::set<std::uint64_t> hashes;
  for (const auto& s : m.states()) {
    EXPECT_TRUE(hashes.insert(s.hash.value).second);
    EXPECT_EQ(s.hash, tree_hash(s.snapshot));
  }
}
