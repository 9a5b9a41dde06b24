#include "statewalk/sim_env.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "statewalk/errors.hpp"

#ifndef STATEWALK_CORPUS_DIR
#define STATEWALK_CORPUS_DIR "corpus"
#endif

namespace statewalk {

using nlohmann::json;

Effect Effect::parse(std::string_view text) {
  if (text == "noop") return {Kind::noop, {}};
  if (text == "back") return {Kind::back, {}};
  constexpr std::string_view prefix = "goto:";
  if (text.substr(0, prefix.size()) == prefix && text.size() > prefix.size()) {
    return {Kind::go_to, std::string(text.substr(prefix.size()))};
  }
  throw SpecError("bad effect '" + std::string(text) + "'");
}

std::string Effect::str() const {
  switch (kind) {
    case Kind::go_to: return "goto:" + screen;
    case Kind::noop: return "noop";
    case Kind::back: return "back";
  }
  return "noop";
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::insert_decoration: return "insert_decoration";
    case NoiseKind::permute_children: return "permute_children";
    case NoiseKind::duplicate_list_row: return "duplicate_list_row";
  }
  return "insert_decoration";
}

namespace {

NoiseKind noise_kind_from_string(std::string_view text) {
  if (text == "insert_decoration") return NoiseKind::insert_decoration;
  if (text == "permute_children") return NoiseKind::permute_children;
  if (text == "duplicate_list_row") return NoiseKind::duplicate_list_row;
  throw SpecError("unknown noise kind '" + std::string(text) + "'");
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw SpecError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw SpecError(where + "." + name + ": missing");
  return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) throw SpecError(where + "." + name + ": expected a string");
  return v.get<std::string>();
}

const json& array_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_array()) throw SpecError(where + "." + name + ": expected an array");
  return v;
}

WidgetPath path_field(const json& obj, const char* name, const std::string& where) {
  const json& v = array_field(obj, name, where);
  WidgetPath out;
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) {
      throw SpecError(where + "." + name + ": expected non-negative integers");
    }
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

bool passes_through_web(const ViewNode& root, const WidgetPath& path) {
  const ViewNode* cur = &root;
  for (std::size_t idx : path) {
    if (cur->kind() == NodeKind::web_container) return true;
    cur = &cur->children()[idx];
  }
  return false;
}

}  // namespace

std::size_t SimAppSpec::screen_count() const {
  std::size_t n = 0;
  for (const auto& a : activities) n += a.screens.size();
  return n;
}

const ScreenSpec* SimAppSpec::find_screen(std::string_view id) const {
  for (const auto& a : activities) {
    for (const auto& s : a.screens) {
      if (s.id == id) return &s;
    }
  }
  return nullptr;
}

const ActivitySpec* SimAppSpec::find_activity(std::string_view activity) const {
  for (const auto& a : activities) {
    if (a.name == activity) return &a;
  }
  return nullptr;
}

const ActivitySpec& SimAppSpec::activity_of(std::string_view screen_id) const {
  for (const auto& a : activities) {
    for (const auto& s : a.screens) {
      if (s.id == screen_id) return a;
    }
  }
  throw SpecError("unknown screen " + std::string(screen_id));
}

bool SimAppSpec::noiseless() const {
  return std::all_of(noise_rules.begin(), noise_rules.end(),
                     [](const NoiseRule& r) { return r.probability <= 0.0; });
}

SimAppSpec load_app_spec(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("app spec: invalid JSON: ") + e.what());
  }
  return load_app_spec_json(doc);
}

SimAppSpec load_app_spec_json(const json& doc) {
  SimAppSpec spec;
  spec.name = string_field(doc, "name", "app");
  const json& seed = field(doc, "seed", "app");
  if (!seed.is_number_unsigned()) throw SpecError("app.seed: expected a non-negative integer");
  spec.seed = seed.get<std::uint64_t>();
  spec.entry_activity = string_field(doc, "entry_activity", "app");

  const json& acts = array_field(doc, "activities", "app");
  if (acts.empty()) throw SpecError("app.activities: at least one activity required");
  std::set<std::string> screen_ids, activity_names, tokens;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string where = "app.activities[" + std::to_string(i) + "]";
    ActivitySpec act;
    act.name = string_field(acts[i], "name", where);
    act.intent_token = string_field(acts[i], "intent_token", where);
    if (!activity_names.insert(act.name).second) {
      throw SpecError(where + ".name: duplicate activity " + act.name);
    }
    if (!tokens.insert(act.intent_token).second) {
      throw SpecError(where + ".intent_token: duplicate token " + act.intent_token);
    }
    const json& screens = array_field(acts[i], "screens", where);
    if (screens.empty()) throw SpecError(where + ".screens: at least one screen required");
    for (std::size_t k = 0; k < screens.size(); ++k) {
      const std::string sw = where + ".screens[" + std::to_string(k) + "]";
      ScreenSpec screen;
      screen.id = string_field(screens[k], "id", sw);
      if (!screen_ids.insert(screen.id).second) {
        throw SpecError(sw + ".id: duplicate screen " + screen.id);
      }
      screen.tree = view_node_from_json(field(screens[k], "tree", sw), sw + ".tree");
      std::set<std::pair<WidgetPath, ActionType>> seen;
      const json& binds = array_field(screens[k], "bindings", sw);
      for (std::size_t b = 0; b < binds.size(); ++b) {
        const std::string bw = sw + ".bindings[" + std::to_string(b) + "]";
        Binding bind;
        bind.path = path_field(binds[b], "path", bw);
        try {
          bind.action = action_from_string(string_field(binds[b], "action", bw));
          bind.effect = Effect::parse(string_field(binds[b], "effect", bw));
        } catch (const SpecError& e) {
          throw SpecError(bw + ": " + e.what());
        }
        if (bind.action == ActionType::go_back) {
          throw SpecError(bw + ".action: go_back is not a widget action");
        }
        if (binds[b].contains("works_times")) {
          if (!binds[b]["works_times"].is_number_unsigned()) {
            throw SpecError(bw + ".works_times: expected a non-negative integer");
          }
          bind.works_times = binds[b]["works_times"].get<std::size_t>();
        }
        if (!screen.tree.find(bind.path) || passes_through_web(screen.tree, bind.path)) {
          throw SpecError(bw + ".path: " + path_to_string(bind.path) + " does not resolve in " +
                          screen.id);
        }
        if (!seen.insert({bind.path, bind.action}).second) {
          throw SpecError(bw + ": duplicate binding for " + path_to_string(bind.path));
        }
        screen.bindings.push_back(std::move(bind));
      }
      act.screens.push_back(std::move(screen));
    }
    spec.activities.push_back(std::move(act));
  }

  if (doc.contains("noise_rules")) {
    const json& rules = array_field(doc, "noise_rules", "app");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string where = "app.noise_rules[" + std::to_string(i) + "]";
      NoiseRule rule;
      try {
        rule.kind = noise_kind_from_string(string_field(rules[i], "kind", where));
      } catch (const SpecError& e) {
        throw SpecError(where + ".kind: " + e.what());
      }
      const json& p = field(rules[i], "probability", where);
      if (!p.is_number() || p.get<double>() < 0.0 || p.get<double>() > 1.0) {
        throw SpecError(where + ".probability: expected a number in [0, 1]");
      }
      rule.probability = p.get<double>();
      rule.target_path = path_field(rules[i], "target_path", where);
      spec.noise_rules.push_back(std::move(rule));
    }
  }

  if (!spec.find_activity(spec.entry_activity)) {
    throw SpecError("app.entry_activity: unknown activity " + spec.entry_activity);
  }
  for (const auto& act : spec.activities) {
    for (const auto& screen : act.screens) {
      for (const auto& bind : screen.bindings) {
        if (bind.effect.kind == Effect::Kind::go_to && !spec.find_screen(bind.effect.screen)) {
          throw SpecError("unknown screen " + bind.effect.screen + " (bound in screen " +
                          screen.id + ")");
        }
      }
    }
  }
  return spec;
}

SimAppSpec load_app_spec_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SpecError("cannot open app spec " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_app_spec(buf.str());
}

SpecTotals spec_totals(const SimAppSpec& spec) {
  const std::string& entry = spec.find_activity(spec.entry_activity)->screens.front().id;
  std::set<std::string> seen{entry};
  std::deque<std::string> queue{entry};
  SpecTotals totals;
  while (!queue.empty()) {
    const ScreenSpec* s = spec.find_screen(queue.front());
    queue.pop_front();
    ++totals.reachable_screens;
    totals.reachable_transitions += s->bindings.size();
    for (const auto& b : s->bindings) {
      if (b.effect.kind != Effect::Kind::go_to || b.works_times == std::size_t{0}) continue;
      if (seen.insert(b.effect.screen).second) queue.push_back(b.effect.screen);
    }
  }
  return totals;
}

std::filesystem::path corpus_dir() {
  if (const char* env = std::getenv("STATEWALK_CORPUS"); env && *env) return env;
  return STATEWALK_CORPUS_DIR;
}

std::vector<std::string> corpus_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir(), ec)) {
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

SimAppSpec load_corpus_app(std::string_view name) {
  auto file = corpus_dir() / (std::string(name) + ".json");
  if (!std::filesystem::exists(file)) {
    throw SpecError("unknown corpus app '" + std::string(name) + "'");
  }
  return load_app_spec_file(file);
}

SimAppSpec load_app_source(std::string_view source) {
  constexpr std::string_view scheme = "corpus:";
  if (source.substr(0, scheme.size()) == scheme) {
    return load_corpus_app(source.substr(scheme.size()));
  }
  return load_app_spec_file(std::filesystem::path(std::string(source)));
}

// ---------------------------------------------------------------------------
// SimEnvironment

SimEnvironment::SimEnvironment(SimAppSpec spec) : spec_(std::move(spec)) { restart(); }

void SimEnvironment::restart() {
  rng_.seed(spec_.seed);
  back_stack_.clear();
  show(spec_.find_activity(spec_.entry_activity)->screens.front().id);
  refresh_observation();
}

void SimEnvironment::show(const std::string& screen_id) {
  const ScreenSpec* s = spec_.find_screen(screen_id);
  screen_ = screen_id;
  rendered_ = s->tree;
  // Mirror of the template recording where each rendered node came from.
  std::function<Origin(const ViewNode&, WidgetPath&)> build = [&](const ViewNode& n,
                                                                  WidgetPath& at) {
    Origin o{at, {}};
    if (n.kind() == NodeKind::web_container) return o;
    for (std::size_t i = 0; i < n.children().size(); ++i) {
      at.push_back(i);
      o.kids.push_back(build(n.children()[i], at));
      at.pop_back();
    }
    return o;
  };
  WidgetPath at;
  origin_ = build(rendered_, at);
}

double SimEnvironment::draw_unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::size_t SimEnvironment::draw_index(std::size_t bound) {
  return static_cast<std::size_t>(rng_() % bound);
}

void SimEnvironment::apply_noise() {
  for (const auto& rule : spec_.noise_rules) {
    const double u = draw_unit();
    if (!(u < rule.probability)) continue;
    const ViewNode* target = rendered_.find(rule.target_path);
    if (!target || target->kind() == NodeKind::web_container) continue;
    Origin* origin = &origin_;
    for (std::size_t idx : rule.target_path) origin = &origin->kids[idx];

    switch (rule.kind) {
      case NoiseKind::insert_decoration: {
        rendered_.modify_at(rule.target_path, [](ViewNode& n) {
          n.insert_child(0, ViewNode::leaf(std::string(kDecorationTag)));
        });
        origin->kids.insert(origin->kids.begin(), Origin{});
        break;
      }
      case NoiseKind::permute_children: {
        const std::size_t n = target->children().size();
        if (n < 2) continue;
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[draw_index(i + 1)]);
        rendered_.modify_at(rule.target_path, [&](ViewNode& node) {
          std::vector<ViewNode> kids;
          for (std::size_t i : order) kids.push_back(node.children()[i]);
          node.set_children(std::move(kids));
        });
        std::vector<Origin> kids;
        for (std::size_t i : order) kids.push_back(origin->kids[i]);
        origin->kids = std::move(kids);
        break;
      }
      case NoiseKind::duplicate_list_row: {
        const std::size_t n = target->children().size();
        if (target->kind() != NodeKind::list_container || n == 0) continue;
        const std::size_t row = draw_index(n);
        rendered_.modify_at(rule.target_path, [&](ViewNode& node) {
          node.insert_child(row + 1, node.children()[row]);
        });
        origin->kids.insert(origin->kids.begin() + static_cast<std::ptrdiff_t>(row) + 1,
                            origin->kids[row]);
        break;
      }
    }
    ++noise_fired_;
  }
}

void SimEnvironment::refresh_observation() {
  std::vector<PathMapping> mapping;
  observed_ = canonicalize(rendered_, &mapping);
  canonical_to_template_.clear();
  for (const auto& m : mapping) {
    const Origin* o = &origin_;
    bool ok = true;
    for (std::size_t idx : m.source) {
      if (idx >= o->kids.size()) {
        ok = false;
        break;
      }
      o = &o->kids[idx];
    }
    if (ok && o->template_path) canonical_to_template_.emplace(m.canonical, *o->template_path);
  }
}

ViewNode SimEnvironment::observe() { return observed_; }

std::string SimEnvironment::current_activity() { return spec_.activity_of(screen_).name; }

IntentRecord SimEnvironment::current_intent() {
  const auto& act = spec_.activity_of(screen_);
  return {act.name, act.intent_token};
}

const Binding* SimEnvironment::binding_for(const WidgetPath& template_path, ActionType action,
                                           std::size_t* index) const {
  const ScreenSpec* s = spec_.find_screen(screen_);
  for (std::size_t i = 0; i < s->bindings.size(); ++i) {
    if (s->bindings[i].path == template_path && s->bindings[i].action == action) {
      if (index) *index = i;
      return &s->bindings[i];
    }
  }
  return nullptr;
}

std::vector<UiEvent> SimEnvironment::actionable_widgets(const ViewNode& tree) {
  std::vector<UiEvent> out;
  const ScreenSpec* s = spec_.find_screen(screen_);
  WidgetPath at;
  std::function<void(const ViewNode&)> walk = [&](const ViewNode& n) {
    if (auto it = canonical_to_template_.find(at); it != canonical_to_template_.end()) {
      std::vector<ActionType> actions;
      for (const auto& b : s->bindings) {
        if (b.path == it->second) actions.push_back(b.action);
      }
      std::sort(actions.begin(), actions.end());
      for (ActionType a : actions) out.push_back(UiEvent{a, at, std::nullopt});
    }
    if (n.kind() == NodeKind::web_container) return;
    for (std::size_t i = 0; i < n.children().size(); ++i) {
      at.push_back(i);
      walk(n.children()[i]);
      at.pop_back();
    }
  };
  walk(tree);
  return out;
}

void SimEnvironment::perform(const UiEvent& event) {
  if (event.action == ActionType::go_back) {
    if (!back_stack_.empty()) {
      std::string to = back_stack_.back();
      back_stack_.pop_back();
      show(to);
    } else {
      show(screen_);
    }
    apply_noise();
    refresh_observation();
    return;
  }
  if (!observed_.find(event.widget_path)) {
    throw ResolutionError("widget " + path_to_string(event.widget_path) +
                          " does not resolve on screen " + screen_);
  }
  std::string next = screen_;
  if (auto it = canonical_to_template_.find(event.widget_path);
      it != canonical_to_template_.end()) {
    std::size_t index = 0;
    if (const Binding* b = binding_for(it->second, event.action, &index)) {
      std::size_t& used = activations_[{screen_, index}];
      if (!b->works_times || used < *b->works_times) {
        ++used;
        if (b->effect.kind == Effect::Kind::go_to) {
          if (spec_.activity_of(b->effect.screen).name != spec_.activity_of(screen_).name) {
            back_stack_.push_back(screen_);
          }
          next = b->effect.screen;
        } else if (b->effect.kind == Effect::Kind::back && !back_stack_.empty()) {
          next = back_stack_.back();
          back_stack_.pop_back();
        }
      }
    }
  }
  show(next);
  apply_noise();
  refresh_observation();
}

void SimEnvironment::send_intent(const IntentRecord& record) {
  for (const auto& act : spec_.activities) {
    if (act.intent_token == record.payload) {
      back_stack_.clear();
      show(act.screens.front().id);
      refresh_observation();
      return;
    }
  }
  throw IntentError("unknown intent token '" + record.payload + "'");
}

}  // namespace statewalk
