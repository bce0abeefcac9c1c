#include "l2s/dep/transition.hpp"

#include <algorithm>
#include <string>

#include "l2s/errors.hpp"

namespace l2s::dep {

std::string_view to_string(Transition t) noexcept {
  switch (t) {
    case Transition::Shift: return "Shift";
    case Transition::ReduceRight: return "ReduceRight";
    case Transition::ReduceLeft: return "ReduceLeft";
  }
  return "?";
}

Configuration::Configuration(std::uint32_t words)
    : n_(words),
      stack_{kRoot},
      front_(1),
      heads_(words + 1, kNoHead),
      labels_(words + 1, kNoLabel),
      left_count_(words + 1, 0),
      right_count_(words + 1, 0),
      leftmost_(words + 1, 0),
      leftmost2_(words + 1, 0),
      rightmost_(words + 1, 0),
      rightmost2_(words + 1, 0) {}

int Configuration::stack_top(std::size_t k) const noexcept {
  if (k == 0 || k > stack_.size()) return -1;
  return static_cast<int>(stack_[stack_.size() - k]);
}

bool Configuration::is_valid(Transition t) const noexcept {
  switch (t) {
    case Transition::Shift: return !buffer_empty();
    case Transition::ReduceLeft: return !buffer_empty() && stack_.size() > 1;
    case Transition::ReduceRight: return stack_.size() > 1;
  }
  return false;
}

void Configuration::attach(std::uint32_t head, std::uint32_t dep, int label) {
  heads_[dep] = static_cast<int>(head);
  labels_[dep] = label;
  if (dep < head) {
    // Left children arrive right to left, so the newest is the leftmost.
    leftmost2_[head] = leftmost_[head];
    leftmost_[head] = dep;
    ++left_count_[head];
  } else {
    rightmost2_[head] = rightmost_[head];
    rightmost_[head] = dep;
    ++right_count_[head];
  }
}

void Configuration::apply(Transition t, int label) {
  if (!is_valid(t)) {
    throw ContractError(std::string(to_string(t)) + " is not valid with stack size " + std::to_string(stack_.size()) +
                        " and buffer size " + std::to_string(buffer_size()));
  }
  switch (t) {
    case Transition::Shift:
      stack_.push_back(front_);
      ++front_;
      break;
    case Transition::ReduceLeft: {
      const std::uint32_t top = stack_.back();
      stack_.pop_back();
      attach(front_, top, label);
      break;
    }
    case Transition::ReduceRight: {
      const std::uint32_t top = stack_.back();
      stack_.pop_back();
      attach(stack_.back(), top, label);
      break;
    }
  }
}

bool Configuration::bookkeeping_consistent() const {
  for (std::uint32_t h = 0; h <= n_; ++h) {
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t d = 1; d <= n_; ++d) {
      if (heads_[d] != static_cast<int>(h)) continue;
      (d < h ? left : right).push_back(d);
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end(), std::greater<>());
    auto nth = [](const std::vector<std::uint32_t>& v, std::size_t i) { return i < v.size() ? v[i] : 0u; };
    if (left_count_[h] != left.size() || right_count_[h] != right.size()) return false;
    if (leftmost_[h] != nth(left, 0) || leftmost2_[h] != nth(left, 1)) return false;
    if (rightmost_[h] != nth(right, 0) || rightmost2_[h] != nth(right, 1)) return false;
  }
  return true;
}

std::vector<Action> valid_actions(const Configuration& c) {
  if (c.terminal()) throw ContractError("no actions are valid in a terminal configuration");
  std::vector<Action> out;
  for (Transition t : kTransitions)
    if (c.is_valid(t)) out.push_back(action_id(t));
  return out;
}

}  // namespace l2s::dep
