#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "statewalk/events.hpp"
#include "statewalk/ui_tree.hpp"

namespace statewalk {

/// Discovery-order state number; 0 is the entry state.
struct StateId {
  std::size_t ordinal = 0;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

inline std::string to_string(StateId id) { return "S" + std::to_string(id.ordinal); }

/// One recorded hop of a replay trace: from `state`, perform `event`.
struct TraceStep {
  StateId state;
  UiEvent event;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct ModelState {
  StateId id;
  StructureHash hash;
  ViewNode snapshot;
  std::string activity;
  std::optional<IntentRecord> intent;
  // Trace from the activity's intent entry point to this state.
  std::vector<TraceStep> ui_stack;
};

struct Transition {
  StateId from;
  UiEvent event;
  StateId to;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct TestStep {
  UiEvent event;
  StateId expected;
  friend bool operator==(const TestStep&, const TestStep&) = default;
};

/// Ordered event sequence from the entry state, with the state expected after
/// every step. The last expected state is the target.
struct TestCase {
  StateId target;
  std::vector<TestStep> steps;

  std::size_t length() const { return steps.size(); }
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

nlohmann::json to_json(const TestCase& tc);

struct PathLimits {
  std::size_t max_paths = 64;
  // Defaults to twice the state count.
  std::optional<std::size_t> max_length;
  // Upper bound on partial paths kept per BFS level.
  std::size_t frontier_cap = 200'000;
};

enum class TransitionUpdate { added, unchanged, overwritten };

/// The app's finite-state machine: states keyed by structure hash, a partial
/// transition function over (state, event), and the entry state 0. Terminal
/// states are derived as those without outgoing transitions.
class StateModel {
 public:
  struct AddResult {
    StateId id;
    bool is_new = false;
  };

  AddResult add_state(ViewNode snapshot, std::string activity,
                      std::vector<TraceStep> ui_stack = {},
                      std::optional<IntentRecord> intent = std::nullopt);

  /// Records δ(from, event) = to. A different `to` for a known (from, event)
  /// replaces the old target and counts as a nondeterminism warning.
  /// Throws ModelError for unknown ids.
  TransitionUpdate add_transition(StateId from, const UiEvent& event, StateId to);

  bool empty() const { return states_.empty(); }
  std::size_t state_count() const { return states_.size(); }
  std::size_t transition_count() const { return delta_.size(); }
  bool contains(StateId id) const { return id.ordinal < states_.size(); }
  const std::vector<ModelState>& states() const { return states_; }
  const ModelState& state(StateId id) const;
  std::optional<StateId> find(StructureHash hash) const;
  std::optional<StateId> entry() const;

  std::optional<StateId> target_of(StateId from, const UiEvent& event) const;
  /// Sorted by (from, event).
  std::vector<Transition> transitions() const;
  std::vector<Transition> outgoing(StateId from) const;
  std::vector<StateId> terminal_states() const;
  std::set<UiEvent> event_universe() const;
  std::size_t nondeterminism_warnings() const { return warnings_; }

  /// Up to `limits.max_paths` simple paths from the entry to `target`, sorted
  /// by length and then by visited state sequence. Each hop uses the smallest
  /// event among parallel transitions. Unreachable targets give an empty list.
  std::vector<TestCase> enumerate_paths(StateId target, const PathLimits& limits = {}) const;

  /// Full document including snapshots and replay metadata (model.json).
  nlohmann::json to_json() const;
  static StateModel from_json(const nlohmann::json& doc);

  /// {nodes: [{id, activity, hash, snapshot_ref}], edges: [{from, to, event}], entry}.
  nlohmann::json export_graph() const;
  std::string export_dot() const;

  using SnapshotLoader = std::function<ViewNode(const std::string& snapshot_ref)>;
  static StateModel import_graph(const nlohmann::json& graph, const SnapshotLoader& load);

  static std::string snapshot_ref(StateId id);

 private:
  void require(StateId id, const char* what) const;

  std::vector<ModelState> states_;
  std::unordered_map<std::uint64_t, std::size_t> by_hash_;
  std::map<std::pair<StateId, UiEvent>, StateId> delta_;
  std::size_t warnings_ = 0;
};

/// Same ids, hashes, activities and transitions.
bool equivalent(const StateModel& a, const StateModel& b);

}  // namespace statewalk
