#include "statewalk/state_model.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "statewalk/errors.hpp"

namespace statewalk {

nlohmann::json to_json(const TestCase& tc) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : tc.steps) {
    steps.push_back({{"event", to_json(s.event)}, {"expected", s.expected.ordinal}});
  }
  return {{"target", tc.target.ordinal}, {"length", tc.length()}, {"steps", steps}};
}

void StateModel::require(StateId id, const char* what) const {
  if (!contains(id)) {
    throw ModelError(std::string(what) + ": unknown state " + statewalk::to_string(id));
  }
}

StateModel::AddResult StateModel::add_state(ViewNode snapshot, std::string activity,
                                             std::vector<TraceStep> ui_stack,
                                             std::optional<IntentRecord> intent) {
  const StructureHash h = tree_hash(snapshot);
  if (auto it = by_hash_.find(h.value); it != by_hash_.end()) {
    return {StateId{it->second}, false};
  }
  StateId id{states_.size()};
  by_hash_.emplace(h.value, id.ordinal);
  states_.push_back(ModelState{id, h, std::move(snapshot), std::move(activity), std::move(intent),
                               std::move(ui_stack)});
  return {id, true};
}

TransitionUpdate StateModel::add_transition(StateId from, const UiEvent& event, StateId to) {
  require(from, "add_transition");
  require(to, "add_transition");
  auto key = std::make_pair(from, event);
  auto it = delta_.find(key);
  if (it == delta_.end()) {
    delta_.emplace(std::move(key), to);
    return TransitionUpdate::added;
  }
  if (it->second == to) return TransitionUpdate::unchanged;
  ++warnings_;
  spdlog::warn("nondeterministic transition: {} --{}--> {} replaces {}", statewalk::to_string(from),
               event.label(), statewalk::to_string(to), statewalk::to_string(it->second));
  it->second = to;
  return TransitionUpdate::overwritten;
}

const ModelState& StateModel::state(StateId id) const {
  require(id, "state");
  return states_[id.ordinal];
}

std::optional<StateId> StateModel::find(StructureHash hash) const {
  auto it = by_hash_.find(hash.value);
  if (it == by_hash_.end()) return std::nullopt;
  return StateId{it->second};
}

std::optional<StateId> StateModel::entry() const {
  if (states_.empty()) return std::nullopt;
  return StateId{0};
}

std::optional<StateId> StateModel::target_of(StateId from, const UiEvent& event) const {
  auto it = delta_.find({from, event});
  if (it == delta_.end()) return std::nullopt;
  return it->second;
}

std::vector<Transition> StateModel::transitions() const {
  std::vector<Transition> out;
  out.reserve(delta_.size());
  for (const auto& [key, to] : delta_) out.push_back({key.first, key.second, to});
  return out;
}

std::vector<Transition> StateModel::outgoing(StateId from) const {
  std::vector<Transition> out;
  for (auto it = delta_.lower_bound({from, UiEvent{ActionType::tap, {}, std::nullopt}});
       it != delta_.end() && it->first.first == from; ++it) {
    out.push_back({from, it->first.second, it->second});
  }
  return out;
}

std::vector<StateId> StateModel::terminal_states() const {
  std::vector<bool> has_out(states_.size(), false);
  for (const auto& [key, to] : delta_) has_out[key.first.ordinal] = true;
  std::vector<StateId> out;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!has_out[i]) out.push_back(StateId{i});
  }
  return out;
}

std::set<UiEvent> StateModel::event_universe() const {
  std::set<UiEvent> out;
  for (const auto& [key, to] : delta_) out.insert(key.second);
  return out;
}

std::vector<TestCase> StateModel::enumerate_paths(StateId target, const PathLimits& limits) const {
  require(target, "enumerate_paths");
  const std::size_t n = states_.size();
  const std::size_t max_length = limits.max_length.value_or(2 * n);
  if (limits.max_paths == 0) return {};
  if (target.ordinal == 0) return {TestCase{target, {}}};

  // Adjacency without self-loops; smallest event per (from, to).
  std::vector<std::map<std::size_t, const UiEvent*>> next(n);
  std::vector<std::vector<std::size_t>> prev(n);
  for (const auto& [key, to] : delta_) {
    const std::size_t u = key.first.ordinal, v = to.ordinal;
    if (u == v) continue;
    auto [it, inserted] = next[u].emplace(v, &key.second);
    if (inserted) {
      prev[v].push_back(u);
    } else if (key.second < *it->second) {
      it->second = &key.second;
    }
  }

  // Distance to target bounds how far a partial path can still go.
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> to_target(n, kInf);
  std::deque<std::size_t> queue{target.ordinal};
  to_target[target.ordinal] = 0;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : prev[v]) {
      if (to_target[u] == kInf) {
        to_target[u] = to_target[v] + 1;
        queue.push_back(u);
      }
    }
  }
  if (to_target[0] == kInf || to_target[0] > max_length) return {};

  std::vector<TestCase> found;
  auto make_case = [&](const std::vector<std::size_t>& path) {
    TestCase tc{target, {}};
    for (std::size_t i = 1; i < path.size(); ++i) {
      tc.steps.push_back({*next[path[i - 1]].at(path[i]), StateId{path[i]}});
    }
    return tc;
  };

  // Level-synchronous BFS over simple paths. Extending a lexicographically
  // sorted frontier in ascending neighbor order keeps each level sorted.
  std::vector<std::vector<std::size_t>> frontier{{0}};
  for (std::size_t len = 1; len <= max_length && !frontier.empty(); ++len) {
    std::vector<std::vector<std::size_t>> level;
    for (const auto& path : frontier) {
      for (const auto& [v, event] : next[path.back()]) {
        if (to_target[v] == kInf || len + to_target[v] > max_length) continue;
        if (std::find(path.begin(), path.end(), v) != path.end()) continue;
        if (v == target.ordinal) {
          auto done = path;
          done.push_back(v);
          found.push_back(make_case(done));
          if (found.size() == limits.max_paths) return found;
          continue;
        }
        if (level.size() >= limits.frontier_cap) continue;
        auto grown = path;
        grown.push_back(v);
        level.push_back(std::move(grown));
      }
    }
    frontier = std::move(level);
  }
  return found;
}

// ---------------------------------------------------------------------------
// Serialization

std::string StateModel::snapshot_ref(StateId id) {
  return "snapshots/S" + std::to_string(id.ordinal) + ".json";
}

nlohmann::json StateModel::to_json() const {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : states_) {
    nlohmann::json stack = nlohmann::json::array();
    for (const auto& step : s.ui_stack) {
      stack.push_back({{"state", step.state.ordinal}, {"event", statewalk::to_json(step.event)}});
    }
    nlohmann::json js{{"id", s.id.ordinal},
                      {"hash", s.hash.hex()},
                      {"activity", s.activity},
                      {"ui_stack", stack},
                      {"snapshot", statewalk::to_json(s.snapshot)}};
    if (s.intent) js["intent"] = statewalk::to_json(*s.intent);
    states.push_back(std::move(js));
  }
  nlohmann::json transitions = nlohmann::json::array();
  for (const auto& t : this->transitions()) {
    transitions.push_back(
        {{"from", t.from.ordinal}, {"to", t.to.ordinal}, {"event", statewalk::to_json(t.event)}});
  }
  nlohmann::json doc{{"states", states}, {"transitions", transitions}};
  doc["entry"] = states_.empty() ? nlohmann::json(nullptr) : nlohmann::json(0);
  return doc;
}

StateModel StateModel::from_json(const nlohmann::json& doc) {
  StateModel m;
  try {
    const auto& states = doc.at("states");
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto& js = states[i];
      if (js.at("id").get<std::size_t>() != i) {
        throw SpecError("model.states[" + std::to_string(i) + "].id: ids must be dense");
      }
      std::vector<TraceStep> stack;
      for (const auto& step : js.at("ui_stack")) {
        stack.push_back({StateId{step.at("state").get<std::size_t>()},
                         ui_event_from_json(step.at("event"))});
      }
      std::optional<IntentRecord> intent;
      if (js.contains("intent")) intent = intent_from_json(js["intent"]);
      ViewNode snap = view_node_from_json(js.at("snapshot"),
                                          "model.states[" + std::to_string(i) + "].snapshot");
      auto [id, is_new] = m.add_state(std::move(snap), js.at("activity").get<std::string>(),
                                      std::move(stack), std::move(intent));
      if (!is_new) throw SpecError("model: duplicate state hash at state " + std::to_string(i));
      if (m.states_[id.ordinal].hash.hex() != js.at("hash").get<std::string>()) {
        throw SpecError("model.states[" + std::to_string(i) + "].hash: does not match snapshot");
      }
    }
    for (const auto& jt : doc.at("transitions")) {
      m.add_transition(StateId{jt.at("from").get<std::size_t>()}, ui_event_from_json(jt.at("event")),
                       StateId{jt.at("to").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("model document: ") + e.what());
  } catch (const ModelError& e) {
    throw SpecError(std::string("model document: ") + e.what());
  }
  return m;
}

nlohmann::json StateModel::export_graph() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& s : states_) {
    nodes.push_back({{"id", s.id.ordinal},
                     {"activity", s.activity},
                     {"hash", s.hash.hex()},
                     {"snapshot_ref", snapshot_ref(s.id)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& t : transitions()) {
    edges.push_back({{"from", t.from.ordinal},
                     {"to", t.to.ordinal},
                     {"label", t.event.label()},
                     {"event", statewalk::to_json(t.event)}});
  }
  nlohmann::json doc{{"nodes", nodes}, {"edges", edges}};
  doc["entry"] = states_.empty() ? nlohmann::json(nullptr) : nlohmann::json(0);
  return doc;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string StateModel::export_dot() const {
  std::ostringstream out;
  out << "digraph model {\n";
  for (const auto& s : states_) {
    out << "  S" << s.id.ordinal << " [label=\"S" << s.id.ordinal << "\\n"
        << dot_escape(s.activity) << "\"];\n";
  }
  for (const auto& t : transitions()) {
    out << "  S" << t.from.ordinal << " -> S" << t.to.ordinal << " [label=\""
        << dot_escape(t.event.label()) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

StateModel StateModel::import_graph(const nlohmann::json& graph, const SnapshotLoader& load) {
  StateModel m;
  try {
    const auto& nodes = graph.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& node = nodes[i];
      if (node.at("id").get<std::size_t>() != i) {
        throw SpecError("graph.nodes[" + std::to_string(i) + "].id: ids must be dense");
      }
      auto [id, is_new] = m.add_state(load(node.at("snapshot_ref").get<std::string>()),
                                      node.at("activity").get<std::string>());
      if (!is_new || m.states_[id.ordinal].hash.hex() != node.at("hash").get<std::string>()) {
        throw SpecError("graph.nodes[" + std::to_string(i) + "]: snapshot does not match hash");
      }
    }
    for (const auto& e : graph.at("edges")) {
      m.add_transition(StateId{e.at("from").get<std::size_t>()}, ui_event_from_json(e.at("event")),
                       StateId{e.at("to").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("graph document: ") + e.what());
  } catch (const ModelError& e) {
    throw SpecError(std::string("graph document: ") + e.what());
  }
  return m;
}

bool equivalent(const StateModel& a, const StateModel& b) {
  if (a.state_count() != b.state_count()) return false;
  for (std::size_t i = 0; i < a.state_count(); ++i) {
    const auto& x = a.states()[i];
    const auto& y = b.states()[i];
    if (x.hash != y.hash || x.activity != y.activity) return false;
  }
  return a.transitions() == b.transitions();
}

}  // namespace statewalk
