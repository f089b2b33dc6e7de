#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrf {

/// Execution capability handed to the solvers: a fixed degree of
/// parallelism. Work is split into contiguous static blocks so the
/// assignment of indices to threads never affects results.
class Executor {
 public:
  explicit Executor(unsigned jobs = 1) : jobs_(std::max(1u, jobs)) {}

  unsigned jobs() const { return jobs_; }

  template <class Fn>
  void for_each_index(std::size_t n, Fn&& fn) const {
    const std::size_t workers = std::min<std::size_t>(jobs_, n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      threads.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  unsigned jobs_;
};

}  // namespace lrf
