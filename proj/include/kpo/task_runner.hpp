#pragma once

#include <cstddef>
#include <functional>

namespace kpo {

// Executes `count` independent tasks. Implementations may run them in any
// order and concurrently; callers write results into pre-sized slots so the
// assembled output never depends on completion order.
class TaskRunner {
 public:
  virtual ~TaskRunner() = default;
  virtual void run(std::size_t count, const std::function<void(std::size_t)>& task) = 0;
};

class SequentialRunner final : public TaskRunner {
 public:
  void run(std::size_t count, const std::function<void(std::size_t)>& task) override {
    for (std::size_t i = 0; i < count; ++i) task(i);
  }
};

}  // namespace kpo
