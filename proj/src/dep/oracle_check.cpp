#include "l2s/dep/oracle_check.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "l2s/conll.hpp"
#include "l2s/errors.hpp"

namespace l2s::dep {
namespace {

constexpr std::size_t kMaxReportedFailures = 10;

bool is_tree(std::span<const int> heads) {
  const auto n = heads.size() - 1;
  for (std::size_t d = 1; d <= n; ++d) {
    std::size_t steps = 0;
    int cur = static_cast<int>(d);
    while (cur != 0) {
      cur = heads[static_cast<std::size_t>(cur)];
      if (++steps > n) return false;
    }
  }
  return true;
}

std::string describe(const Configuration& c, std::span<const int> gold) {
  std::ostringstream os;
  os << "gold=[";
  for (std::size_t i = 1; i < gold.size(); ++i) os << (i > 1 ? " " : "") << gold[i];
  os << "] stack=[";
  for (std::size_t i = 0; i < c.stack().size(); ++i) os << (i ? " " : "") << c.stack()[i];
  os << "] front=" << c.buffer_front();
  return os.str();
}

}  // namespace

CompletionSearch::CompletionSearch(std::vector<int> gold_heads)
    : gold_(std::move(gold_heads)), n_(static_cast<std::uint32_t>(gold_.size() - 1)) {}

int CompletionSearch::search(std::vector<std::uint32_t>& stack, std::uint32_t front) {
  if (front > n_ && stack.size() == 1) return 0;
  auto key = std::make_pair(stack, front);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  int best = std::numeric_limits<int>::max();
  if (front <= n_) {
    stack.push_back(front);
    best = std::min(best, search(stack, front + 1));
    stack.pop_back();
  }
  if (stack.size() > 1) {
    const std::uint32_t top = stack.back();
    stack.pop_back();
    if (front <= n_) {
      const int wrong = gold_[top] != static_cast<int>(front);
      best = std::min(best, wrong + search(stack, front));
    }
    const int wrong = gold_[top] != static_cast<int>(stack.back());
    best = std::min(best, wrong + search(stack, front));
    stack.push_back(top);
  }
  memo_.emplace(std::move(key), best);
  return best;
}

int CompletionSearch::min_future_loss(const Configuration& c) {
  auto stack = c.stack();
  return search(stack, c.buffer_front());
}

std::array<std::optional<int>, 3> CompletionSearch::regrets(const Configuration& c) {
  std::array<std::optional<int>, 3> out;
  const int base = min_future_loss(c);
  for (Transition t : kTransitions) {
    if (!c.is_valid(t)) continue;
    Configuration next = c;
    int wrong = 0;
    const auto s1 = c.stack().back();
    if (t == Transition::ReduceLeft) wrong = gold_[s1] != static_cast<int>(c.buffer_front());
    if (t == Transition::ReduceRight) wrong = gold_[s1] != static_cast<int>(c.stack()[c.stack().size() - 2]);
    next.apply(t);
    out[action_id(t)] = wrong + min_future_loss(next) - base;
  }
  return out;
}

std::vector<int> random_projective_tree(std::uint32_t words, std::mt19937_64& rng) {
  if (words == 0) throw ContractError("a tree needs at least one word");
  std::vector<int> heads(words + 1, kNoHead);
  while (true) {
    for (std::uint32_t d = 1; d <= words; ++d) {
      std::uint32_t h = static_cast<std::uint32_t>(rng() % words);  // 0..words-1, skip self
      if (h >= d) ++h;
      heads[d] = static_cast<int>(h);
    }
    if (is_tree(heads) && conll::is_projective(heads)) return heads;
  }
}

void OracleCheckReport::merge(const OracleCheckReport& other) {
  trees += other.trees;
  configurations += other.configurations;
  mismatches += other.mismatches;
  for (const auto& f : other.failures)
    if (failures.size() < kMaxReportedFailures) failures.push_back(f);
}

OracleCheckReport check_oracle_on_tree(std::span<const int> gold_heads) {
  OracleCheckReport report;
  report.trees = 1;
  const auto n = static_cast<std::uint32_t>(gold_heads.size() - 1);
  CompletionSearch search(std::vector<int>(gold_heads.begin(), gold_heads.end()));

  auto fail = [&](const Configuration& c, const std::string& what) {
    ++report.mismatches;
    if (report.failures.size() < kMaxReportedFailures) report.failures.push_back(describe(c, gold_heads) + ": " + what);
  };

  // Depth-first over every reachable (stack, front) pair.
  std::set<std::pair<std::vector<std::uint32_t>, std::uint32_t>> seen;
  std::vector<Configuration> todo{Configuration(n)};
  while (!todo.empty()) {
    Configuration c = std::move(todo.back());
    todo.pop_back();
    if (c.terminal()) continue;
    if (!seen.emplace(c.stack(), c.buffer_front()).second) continue;
    ++report.configurations;

    const auto regret = search.regrets(c);
    const ActionCosts full = oracle_costs(c, gold_heads, OracleMode::Full);
    for (Transition t : kTransitions) {
      const auto expect = regret[action_id(t)];
      const auto got = full[t];
      if (!expect) {
        if (got != kInvalidCost) fail(c, std::string(to_string(t)) + " invalid but not marked so");
      } else if (got != expect) {
        fail(c, std::string(to_string(t)) + " cost " + (got ? std::to_string(*got) : "none") + ", brute force " +
                    std::to_string(*expect));
      }
    }

    const ActionCosts quick = oracle_costs(c, gold_heads, OracleMode::ShortCircuit);
    const Transition chosen = oracle_action(c, gold_heads);
    if (regret[action_id(chosen)] != 0) fail(c, "oracle action " + std::string(to_string(chosen)) + " is not optimal");
    if (quick.short_circuit) {
      if (chosen != *quick.short_circuit) fail(c, "oracle action ignores its short circuit");
    } else if (chosen != best_action(full)) {
      fail(c, "oracle action does not follow the tie-break toward later transitions");
    }

    for (Transition t : kTransitions) {
      if (!c.is_valid(t)) continue;
      Configuration next = c;
      next.apply(t);
      todo.push_back(std::move(next));
    }
  }
  return report;
}

std::vector<std::vector<int>> oracle_check_cases(std::uint32_t max_len, std::size_t cases, std::uint64_t seed) {
  if (max_len == 0) throw ConfigError("max length must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> out;
  out.reserve(cases);
  for (std::size_t i = 0; i < cases; ++i) {
    const auto len = static_cast<std::uint32_t>(1 + rng() % max_len);
    out.push_back(random_projective_tree(len, rng));
  }
  return out;
}

}  // namespace l2s::dep
