#pragma once

// Decoding and oracle checking over many independent inputs. Each has an
// OpenMP version and a serial reference that must agree exactly.

#include <exception>
#include <span>
#include <vector>

#include "l2s/dep/oracle_check.hpp"
#include "l2s/search.hpp"

namespace l2s {

template <SearchTask T>
std::vector<typename T::Output> decode_all_serial(const T& task, std::span<const typename T::Instance> xs,
                                                  const PolicyModel& model, const SearchOptions& options = {}) {
  std::vector<typename T::Output> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(decode(task, x, model, options).output);
  return out;
}

template <SearchTask T>
std::vector<typename T::Output> decode_all(const T& task, std::span<const typename T::Instance> xs,
                                           const PolicyModel& model, const SearchOptions& options = {}) {
  std::vector<typename T::Output> out(xs.size());
  std::vector<std::exception_ptr> errors(xs.size());
  const auto n = static_cast<long>(xs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = decode(task, xs[static_cast<std::size_t>(i)], model, options).output;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace dep {

OracleCheckReport check_oracle_serial(std::span<const std::vector<int>> trees);
OracleCheckReport check_oracle(std::span<const std::vector<int>> trees);

}  // namespace dep
}  // namespace l2s
