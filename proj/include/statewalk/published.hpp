#pragma once

#include <memory>
#include <mutex>
#include <utility>

namespace statewalk {

/// Single-writer value cell handing out immutable snapshots. Readers keep
/// whatever version they loaded while the writer publishes newer ones.
template <class T>
class Published {
 public:
  Published() : current_(std::make_shared<const T>()) {}
  explicit Published(T initial) : current_(std::make_shared<const T>(std::move(initial))) {}

  void publish(T value) {
    auto next = std::make_shared<const T>(std::move(value));
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

  std::shared_ptr<const T> read() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const T> current_;
};

}  // namespace statewalk
