#pragma once

// Exhaustive verification of the dynamic oracle against the minimum
// completion loss found by searching every action sequence.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "l2s/dep/oracle.hpp"

namespace l2s::dep {

// Minimum number of further wrong heads reachable from a configuration.
// Future arcs depend only on the stack and buffer front, so results are
// memoized on that pair.
class CompletionSearch {
 public:
  explicit CompletionSearch(std::vector<int> gold_heads);

  int min_future_loss(const Configuration& c);
  // Unlabeled loss incurred by the transition itself plus the best
  // completion after it, minus the best completion overall. Invalid
  // transitions are empty.
  std::array<std::optional<int>, 3> regrets(const Configuration& c);

 private:
  int search(std::vector<std::uint32_t>& stack, std::uint32_t front);

  std::vector<int> gold_;
  std::uint32_t n_;
  std::map<std::pair<std::vector<std::uint32_t>, std::uint32_t>, int> memo_;
};

// Uniformly random head assignment, rejected until it is a projective tree
// (several Root children allowed).
std::vector<int> random_projective_tree(std::uint32_t words, std::mt19937_64& rng);

struct OracleCheckReport {
  std::size_t trees = 0;
  std::size_t configurations = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> failures;  // first few, human readable

  bool ok() const noexcept { return mismatches == 0; }
  void merge(const OracleCheckReport& other);
};

// Checks every configuration reachable from the initial state of one tree:
// full cost vectors equal brute-force regrets, the short-circuit action has
// zero regret, and oracle_action follows the stated tie-break.
OracleCheckReport check_oracle_on_tree(std::span<const int> gold_heads);

// `cases` random projective trees with 1..max_len words.
std::vector<std::vector<int>> oracle_check_cases(std::uint32_t max_len, std::size_t cases, std::uint64_t seed);

}  // namespace l2s::dep
