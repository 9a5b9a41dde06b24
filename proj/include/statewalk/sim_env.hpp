#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "statewalk/environment.hpp"

namespace statewalk {

struct Effect {
  enum class Kind { go_to, noop, back };
  Kind kind = Kind::noop;
  std::string screen;  // go_to only

  /// "goto:<screen>", "noop" or "back".
  static Effect parse(std::string_view text);
  std::string str() const;
};

struct Binding {
  WidgetPath path;  // template (authoring) order
  ActionType action = ActionType::tap;
  Effect effect;
  // The effect applies this many times per environment instance, then the
  // widget goes dead. Unlimited when absent.
  std::optional<std::size_t> works_times;
};

struct ScreenSpec {
  std::string id;
  ViewNode tree;
  std::vector<Binding> bindings;
};

struct ActivitySpec {
  std::string name;
  std::string intent_token;
  std::vector<ScreenSpec> screens;  // the first one is where intents land
};

enum class NoiseKind { insert_decoration, permute_children, duplicate_list_row };

std::string_view to_string(NoiseKind kind);

struct NoiseRule {
  NoiseKind kind = NoiseKind::insert_decoration;
  double probability = 0.0;
  WidgetPath target_path;  // template order; rules skip screens where it does not resolve
};

/// Tag of the leaf inserted by insert_decoration noise.
inline constexpr std::string_view kDecorationTag = "NotificationBanner";

struct SimAppSpec {
  std::string name;
  std::uint64_t seed = 0;
  std::string entry_activity;
  std::vector<ActivitySpec> activities;
  std::vector<NoiseRule> noise_rules;

  std::size_t screen_count() const;
  const ScreenSpec* find_screen(std::string_view id) const;
  const ActivitySpec* find_activity(std::string_view name) const;
  const ActivitySpec& activity_of(std::string_view screen_id) const;
  /// True when no noise rule can fire.
  bool noiseless() const;
};

/// Parses and validates the JSON app-spec document. Throws SpecError naming
/// the offending field or the dangling screen reference.
SimAppSpec load_app_spec(std::string_view document);
SimAppSpec load_app_spec_json(const nlohmann::json& document);
SimAppSpec load_app_spec_file(const std::filesystem::path& file);

struct SpecTotals {
  std::size_t reachable_screens = 0;
  std::size_t reachable_transitions = 0;
};

/// Ground truth from the spec graph: screens reachable from the entry via
/// goto effects, and the bindings declared on them.
SpecTotals spec_totals(const SimAppSpec& spec);

/// Directory of bundled app specs; STATEWALK_CORPUS overrides the built-in one.
std::filesystem::path corpus_dir();
std::vector<std::string> corpus_names();
SimAppSpec load_corpus_app(std::string_view name);
/// "corpus:<name>" or a file path.
SimAppSpec load_app_source(std::string_view source);

/// Deterministic simulated app. Starts on the entry activity's first screen.
///
/// Each perform() re-renders the destination screen from its template and then
/// applies the noise rules in order, one draw per rule from a generator seeded
/// with the spec seed on construction and restart(). Intents and restarts
/// render clean screens.
class SimEnvironment final : public Environment {
 public:
  explicit SimEnvironment(SimAppSpec spec);

  ViewNode observe() override;
  std::string current_activity() override;
  IntentRecord current_intent() override;
  std::vector<UiEvent> actionable_widgets(const ViewNode& tree) override;
  void perform(const UiEvent& event) override;
  void send_intent(const IntentRecord& record) override;
  void restart() override;

  const SimAppSpec& spec() const { return spec_; }
  const std::string& current_screen() const { return screen_; }
  std::size_t noise_fired() const { return noise_fired_; }

 private:
  struct Origin {
    std::optional<WidgetPath> template_path;
    std::vector<Origin> kids;
  };

  void show(const std::string& screen_id);
  void apply_noise();
  void refresh_observation();
  double draw_unit();
  std::size_t draw_index(std::size_t bound);
  const Binding* binding_for(const WidgetPath& template_path, ActionType action,
                             std::size_t* index) const;

  SimAppSpec spec_;
  std::mt19937_64 rng_;
  std::string screen_;
  std::vector<std::string> back_stack_;
  ViewNode rendered_;
  Origin origin_;
  ViewNode observed_;
  std::map<WidgetPath, WidgetPath> canonical_to_template_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> activations_;
  std::size_t noise_fired_ = 0;
};

}  // namespace statewalk
