#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "statewalk/ui_tree.hpp"

namespace statewalk {

enum class ActionType { tap, long_tap, scroll, type_text, go_back };

std::string_view to_string(ActionType action);
ActionType action_from_string(std::string_view text);

/// An executable action: what to do, where, and an optional text payload.
struct UiEvent {
  ActionType action = ActionType::tap;
  WidgetPath widget_path;
  std::optional<std::string> value;

  /// "tap@[0]", "type_text@[1,2]=test".
  std::string label() const;

  friend auto operator<=>(const UiEvent&, const UiEvent&) = default;
  friend bool operator==(const UiEvent&, const UiEvent&) = default;
};

/// Launch token for jumping straight to an activity's entry screen.
struct IntentRecord {
  std::string activity;
  std::string payload;

  friend bool operator==(const IntentRecord&, const IntentRecord&) = default;
};

nlohmann::json to_json(const UiEvent& event);
UiEvent ui_event_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const IntentRecord& intent);
IntentRecord intent_from_json(const nlohmann::json& doc);

}  // namespace statewalk
