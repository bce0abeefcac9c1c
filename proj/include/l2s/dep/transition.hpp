#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "l2s/learner.hpp"

namespace l2s::dep {

// Arc-hybrid transitions. Ids double as action ids for the action predictor;
// the order is also the oracle's tie-break enumeration order.
enum class Transition : Action { Shift = 0, ReduceRight = 1, ReduceLeft = 2 };

inline constexpr std::array<Transition, 3> kTransitions = {Transition::Shift, Transition::ReduceRight,
                                                           Transition::ReduceLeft};
inline constexpr std::uint32_t kRoot = 0;
inline constexpr int kNoHead = -1;
inline constexpr int kNoLabel = -1;

std::string_view to_string(Transition t) noexcept;
constexpr Action action_id(Transition t) noexcept { return static_cast<Action>(t); }

// Parser state: stack with Root at the bottom, buffer front position, arcs
// and per-word child bookkeeping. Positions are 1-based; 0 is Root.
class Configuration {
 public:
  explicit Configuration(std::uint32_t words);

  std::uint32_t words() const noexcept { return n_; }
  const std::vector<std::uint32_t>& stack() const noexcept { return stack_; }
  // k-th stack element from the top (k = 1 is s1); -1 when absent.
  int stack_top(std::size_t k) const noexcept;
  // Position of w_p; words() + 1 when the buffer is empty.
  std::uint32_t buffer_front() const noexcept { return front_; }
  std::uint32_t buffer_size() const noexcept { return n_ + 1 - front_; }
  bool buffer_empty() const noexcept { return front_ > n_; }
  bool terminal() const noexcept { return buffer_empty() && stack_.size() == 1; }

  int head(std::uint32_t pos) const { return heads_.at(pos); }
  int label(std::uint32_t pos) const { return labels_.at(pos); }
  const std::vector<int>& heads() const noexcept { return heads_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::uint32_t left_children(std::uint32_t pos) const { return left_count_.at(pos); }
  std::uint32_t right_children(std::uint32_t pos) const { return right_count_.at(pos); }
  // k = 1 leftmost, k = 2 second leftmost; 0 when absent.
  std::uint32_t leftmost(std::uint32_t pos, int k) const { return k == 1 ? leftmost_.at(pos) : leftmost2_.at(pos); }
  std::uint32_t rightmost(std::uint32_t pos, int k) const { return k == 1 ? rightmost_.at(pos) : rightmost2_.at(pos); }

  bool is_valid(Transition t) const noexcept;
  // Throws ContractError for an invalid transition.
  void apply(Transition t, int label = kNoLabel);

  // Recomputes child bookkeeping from the arcs and compares.
  bool bookkeeping_consistent() const;

  // 2 * |B| + |S|, strictly decreased by every transition.
  std::uint32_t progress_measure() const noexcept { return 2 * buffer_size() + static_cast<std::uint32_t>(stack_.size()); }

 private:
  void attach(std::uint32_t head, std::uint32_t dep, int label);

  std::uint32_t n_;
  std::vector<std::uint32_t> stack_;
  std::uint32_t front_;
  std::vector<int> heads_;
  std::vector<int> labels_;
  std::vector<std::uint32_t> left_count_, right_count_;
  std::vector<std::uint32_t> leftmost_, leftmost2_, rightmost_, rightmost2_;
};

// Valid transitions in enumeration order. Throws for terminal configurations.
std::vector<Action> valid_actions(const Configuration& c);

}  // namespace l2s::dep
