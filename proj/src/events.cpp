#include "statewalk/events.hpp"

#include "statewalk/errors.hpp"

namespace statewalk {

std::string_view to_string(ActionType action) {
  switch (action) {
    case ActionType::tap: return "tap";
    case ActionType::long_tap: return "long_tap";
    case ActionType::scroll: return "scroll";
    case ActionType::type_text: return "type_text";
    case ActionType::go_back: return "go_back";
  }
  return "tap";
}

ActionType action_from_string(std::string_view text) {
  if (text == "tap") return ActionType::tap;
  if (text == "long_tap") return ActionType::long_tap;
  if (text == "scroll") return ActionType::scroll;
  if (text == "type_text") return ActionType::type_text;
  if (text == "go_back") return ActionType::go_back;
  throw SpecError("unknown action '" + std::string(text) + "'");
}

std::string UiEvent::label() const {
  std::string out(to_string(action));
  out += '@';
  out += path_to_string(widget_path);
  if (value) {
    out += '=';
    out += *value;
  }
  return out;
}

nlohmann::json to_json(const UiEvent& event) {
  nlohmann::json j;
  j["action"] = std::string(to_string(event.action));
  j["path"] = event.widget_path;
  if (event.value) j["value"] = *event.value;
  return j;
}

UiEvent ui_event_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("action") || !doc.contains("path")) {
    throw SpecError("event: expected {action, path}");
  }
  UiEvent e;
  e.action = action_from_string(doc.at("action").get<std::string>());
  e.widget_path = doc.at("path").get<WidgetPath>();
  if (doc.contains("value")) e.value = doc.at("value").get<std::string>();
  return e;
}

nlohmann::json to_json(const IntentRecord& intent) {
  return {{"activity", intent.activity}, {"payload", intent.payload}};
}

IntentRecord intent_from_json(const nlohmann::json& doc) {
  return {doc.at("activity").get<std::string>(), doc.at("payload").get<std::string>()};
}

}  // namespace statewalk
