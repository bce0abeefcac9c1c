#include "l2s/dep/oracle.hpp"

#include <string>

#include "l2s/errors.hpp"

namespace l2s::dep {

ActionCosts oracle_costs(const Configuration& c, std::span<const int> g, OracleMode mode) {
  if (c.terminal()) throw ContractError("oracle queried on a terminal configuration");
  if (g.size() != c.words() + 1) throw ContractError("gold head vector does not match the sentence length");

  const auto& stack = c.stack();
  const auto s1 = stack.back();
  const auto p = c.buffer_front();
  const auto n = c.words();
  // Root has no gold head.
  auto gold_head = [&](std::uint32_t pos) { return pos == kRoot ? kNoHead : g[pos]; };
  const int ip = static_cast<int>(p);
  const int is1 = static_cast<int>(s1);

  ActionCosts out;
  const bool shift_ok = c.is_valid(Transition::Shift);
  const bool left_ok = c.is_valid(Transition::ReduceLeft);
  const bool right_ok = c.is_valid(Transition::ReduceRight);

  if (mode == OracleMode::ShortCircuit) {
    if (shift_ok && gold_head(p) == is1) {
      out.cost[action_id(Transition::Shift)] = 0;
      out.short_circuit = Transition::Shift;
      return out;
    }
    if (left_ok && gold_head(s1) == ip) {
      out.cost[action_id(Transition::ReduceLeft)] = 0;
      out.short_circuit = Transition::ReduceLeft;
      return out;
    }
  }

  int shift = 0, left = 0, right = 0;
  if (shift_ok) {
    // w_p can no longer take a head or dependent among the items under s1.
    for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
      const int si = static_cast<int>(stack[i]);
      if (gold_head(stack[i]) == ip || gold_head(p) == si) ++shift;
    }
    if (gold_head(s1) == ip) ++shift;
  }
  if (left_ok) {
    // s1 leaves: arcs to later buffer words, w_p's head s1, s1's head s2.
    for (std::uint32_t i = p + 1; i <= n; ++i)
      if (gold_head(i) == is1 || gold_head(s1) == static_cast<int>(i)) ++left;
    if (gold_head(p) == is1) ++left;
    if (stack.size() >= 2 && gold_head(s1) == static_cast<int>(stack[stack.size() - 2])) ++left;
  }
  if (right_ok) {
    if (gold_head(s1) >= ip) ++right;
    for (std::uint32_t i = p; i <= n; ++i)
      if (gold_head(i) == is1) ++right;
  }

  out.cost[action_id(Transition::Shift)] = shift_ok ? shift : kInvalidCost;
  out.cost[action_id(Transition::ReduceLeft)] = left_ok ? left : kInvalidCost;
  out.cost[action_id(Transition::ReduceRight)] = right_ok ? right : kInvalidCost;
  return out;
}

Transition best_action(const ActionCosts& costs) {
  std::optional<Transition> best;
  int best_cost = 0;
  for (Transition t : kTransitions) {
    const auto c = costs[t];
    if (!c || *c == kInvalidCost) continue;
    if (!best || *c <= best_cost) {
      best = t;
      best_cost = *c;
    }
  }
  if (!best) throw ContractError("no valid transition to choose from");
  return *best;
}

Transition oracle_action(const Configuration& c, std::span<const int> gold_heads) {
  return best_action(oracle_costs(c, gold_heads, OracleMode::ShortCircuit));
}

int sentence_loss(std::span<const int> heads, std::span<const int> labels, std::span<const int> gold_heads,
                  std::span<const int> gold_labels, bool labeled) {
  if (heads.size() != gold_heads.size()) throw ContractError("predicted and gold trees differ in length");
  if (labeled && (labels.size() != heads.size() || gold_labels.size() != heads.size()))
    throw ContractError("label vectors do not match the sentence length");
  int loss = 0;
  for (std::size_t w = 1; w < heads.size(); ++w) {
    if (heads[w] == kNoHead) throw ContractError("word " + std::to_string(w) + " has no head in the predicted tree");
    if (heads[w] != gold_heads[w])
      loss += labeled ? 2 : 1;
    else if (labeled && labels[w] != gold_labels[w])
      loss += 1;
  }
  return loss;
}

}  // namespace l2s::dep
