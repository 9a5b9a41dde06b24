#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "statewalk/events.hpp"
#include "statewalk/ui_tree.hpp"

namespace statewalk {

/// Contract between the engine and an app under test. One exploration or
/// reproduction session owns an instance; implementations need not be
/// thread-safe.
///
/// observe() is stable: with no intervening perform/send_intent/restart two
/// calls return hash-equal trees. Returned trees are canonical, so widget
/// paths index the hash-sorted child order.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual ViewNode observe() = 0;
  virtual std::string current_activity() = 0;
  /// Launch record of the activity currently on top, as captured at runtime.
  virtual IntentRecord current_intent() = 0;
  /// Executable events for `tree` in depth-first canonical order.
  virtual std::vector<UiEvent> actionable_widgets(const ViewNode& tree) = 0;
  /// Throws ResolutionError when the locator does not resolve.
  virtual void perform(const UiEvent& event) = 0;
  /// Throws IntentError for unknown payloads.
  virtual void send_intent(const IntentRecord& record) = 0;
  virtual void restart() = 0;
};

/// Decorator counting everything sent to the wrapped environment.
class CountingEnvironment final : public Environment {
 public:
  explicit CountingEnvironment(Environment& inner) : inner_(inner) {}

  ViewNode observe() override {
    ++observes;
    return inner_.observe();
  }
  std::string current_activity() override { return inner_.current_activity(); }
  IntentRecord current_intent() override { return inner_.current_intent(); }
  std::vector<UiEvent> actionable_widgets(const ViewNode& tree) override {
    return inner_.actionable_widgets(tree);
  }
  void perform(const UiEvent& event) override {
    ++performs;
    inner_.perform(event);
  }
  void send_intent(const IntentRecord& record) override {
    ++intents;
    inner_.send_intent(record);
  }
  void restart() override {
    ++restarts;
    inner_.restart();
  }

  /// Performs, intents and restarts.
  std::size_t events_sent() const { return performs + intents + restarts; }

  std::size_t observes = 0;
  std::size_t performs = 0;
  std::size_t intents = 0;
  std::size_t restarts = 0;

 private:
  Environment& inner_;
};

}  // namespace statewalk
