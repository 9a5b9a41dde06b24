#pragma once

#include <stdexcept>
#include <string>

namespace statewalk {

struct MarkupParseError : std::runtime_error {
  MarkupParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position(position) {}
  std::size_t position;
};

// Invalid app-spec, model or tree document.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A widget locator that does not resolve against the live UI tree.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace statewalk
