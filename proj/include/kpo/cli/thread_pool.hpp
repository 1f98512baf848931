#pragma once

#include <cstddef>

#include "kpo/task_runner.hpp"

namespace kpo::cli {

// Runs tasks on up to `threads` worker threads pulling indices from a shared
// counter. The first exception thrown by a task is rethrown after all
// workers have joined.
class ThreadPoolRunner final : public TaskRunner {
 public:
  explicit ThreadPoolRunner(std::size_t threads);
  void run(std::size_t count, const std::function<void(std::size_t)>& task) override;

 private:
  std::size_t threads_;
};

}  // namespace kpo::cli
