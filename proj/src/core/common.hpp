// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aet {

/// Default number of ordered torque classes (60 cNm ... 5 cNm).
inline constexpr int kDefaultNumClasses = 7;

/// Error categories. Values match the `aet_status` codes of the C API.
enum class ErrorCode : int {
  invalid_argument = 1,
  io = 2,
  format = 3,
  validation = 4,
  numeric = 5,
  internal = 6,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

/// Number of workers used when the caller passes jobs == 0.
std::size_t default_jobs();

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Work is split into
/// contiguous chunks; the first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  if (jobs == 0) jobs = default_jobs();
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (std::size_t w = 0; w < jobs; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// splitmix64 finalizer; derives independent seeds from (seed, stream id).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// FNV-1a hash of a string, used to derive per-name seeds.
std::uint64_t hash_name(const std::string& name);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace aet
