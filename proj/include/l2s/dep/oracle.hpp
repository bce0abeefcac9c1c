#pragma once

#include <array>
#include <optional>
#include <span>

#include "l2s/dep/transition.hpp"

namespace l2s::dep {

inline constexpr int kInvalidCost = 100;

enum class OracleMode : std::uint8_t {
  // Return as soon as Shift (w_p's gold head is s1) or ReduceLeft (s1's gold
  // head is w_p) is known to be free; the other entries stay unevaluated.
  ShortCircuit,
  // Always count the lost gold arcs of every valid transition.
  Full,
};

// Per-transition count of gold arcs made unreachable, indexed by action id.
// Invalid transitions hold kInvalidCost; unevaluated entries are empty.
struct ActionCosts {
  std::array<std::optional<int>, 3> cost;
  std::optional<Transition> short_circuit;

  std::optional<int> operator[](Transition t) const noexcept { return cost[action_id(t)]; }
  bool valid(Transition t) const noexcept { return cost[action_id(t)] && *cost[action_id(t)] != kInvalidCost; }
};

// Dynamic oracle for the arc-hybrid system. gold_heads[0] is ignored.
ActionCosts oracle_costs(const Configuration& c, std::span<const int> gold_heads,
                         OracleMode mode = OracleMode::ShortCircuit);

// Lowest-cost evaluated transition; ties go to the later transition in
// Shift, ReduceRight, ReduceLeft order.
Transition best_action(const ActionCosts& costs);

Transition oracle_action(const Configuration& c, std::span<const int> gold_heads);

// Per word: 2 if the head is wrong, else 1 if labeled and the label is
// wrong, else 0. Unlabeled mode counts wrong heads.
int sentence_loss(std::span<const int> heads, std::span<const int> labels, std::span<const int> gold_heads,
                  std::span<const int> gold_labels, bool labeled);

}  // namespace l2s::dep
