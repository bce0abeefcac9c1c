#pragma once

// Task-agnostic learning-to-search engine.
//
// A task supplies `run(Session&, const Instance&) -> Output`, which issues
// predict calls and declares its loss once at the end. The engine replays
// that program under different policies: a rollin trajectory, then one-step
// deviations at each recorded step completed by a rollout policy. The
// resulting losses become cost-sensitive examples for the learner.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l2s/errors.hpp"
#include "l2s/features.hpp"
#include "l2s/learner.hpp"

namespace l2s {

enum class PolicyKind : std::uint8_t { Reference = 0, Learned = 1, Mixture = 2 };

std::string_view to_string(PolicyKind kind) noexcept;
PolicyKind parse_policy_kind(std::string_view name);

// Mixture schedule. With `reference_decays` (the default) the reference
// policy is used with probability (1 - alpha)^round; otherwise with
// 1 - (1 - alpha)^round.
struct PolicySchedule {
  PolicyKind rollin = PolicyKind::Mixture;
  PolicyKind rollout = PolicyKind::Reference;
  double alpha = 1e-5;
  std::uint64_t round = 0;
  bool reference_decays = true;

  double reference_probability() const noexcept;
  // Probability the given policy kind acts as the reference this round.
  double reference_probability(PolicyKind kind) const noexcept;
};

struct PredictRequest {
  // May be null when the session does not want features.
  const FeatureVector* features = nullptr;
  Action reference = 0;
  std::span<const Action> allowed;
  std::uint32_t role = 0;
  // Optional, parallel to `allowed`: loss of each action when the rest of
  // the trajectory follows an optimal reference policy.
  std::span<const float> oracle_costs;
};

// Decoder-facing handle for one execution of a task.
class Session {
 public:
  virtual ~Session() = default;
  // Whether the next predict call will look at its features.
  virtual bool wants_features() const = 0;
  virtual Action predict(const PredictRequest& request) = 0;
  virtual void declare_loss(double loss) = 0;
};

template <class T>
concept SearchTask = requires(const T& task, Session& session, const typename T::Instance& instance) {
  typename T::Output;
  { task.run(session, instance) } -> std::convertible_to<typename T::Output>;
};

struct SearchOptions {
  // Previous predicted actions appended as features (0 disables).
  std::uint32_t history_length = 1;
  // Deviate at every k-th rollin step.
  std::uint32_t deviation_stride = 1;
  // Use task-provided oracle costs instead of re-running the decoder when
  // the rollout is the reference policy.
  bool use_oracle_costs = false;
};

enum class Actor : std::uint8_t { Reference, Learned };

// One predict call captured on a recorded trajectory.
struct StepRecord {
  FeatureVector features;
  std::vector<Action> allowed;
  std::vector<float> oracle_costs;
  Action reference = 0;
  Action chosen = 0;
  std::uint32_t role = 0;
};

template <class Output>
struct Trajectory {
  std::vector<Action> actions;
  double loss = 0.0;
  Output output{};
};

// How to act during one execution: forced prefix, optional forced action at
// position prefix.size(), then `actor` until the end.
struct RunPlan {
  Actor actor = Actor::Reference;
  const PolicyModel* model = nullptr;
  std::span<const Action> prefix;
  std::optional<Action> forced;
  std::vector<StepRecord>* record = nullptr;
  SearchOptions options;
};

// Appends the previous `length` actions as history features.
void add_history_features(FeatureVector& fv, std::span<const Action> history, std::uint32_t length);

namespace detail {

class TrajectorySession final : public Session {
 public:
  explicit TrajectorySession(const RunPlan& plan) : plan_(plan) {
    if (plan_.actor == Actor::Learned && plan_.model == nullptr)
      throw ConfigError("learned policy requested without a model");
  }

  bool wants_features() const override { return plan_.record != nullptr || step_actor() == Source::Learned; }

  Action predict(const PredictRequest& req) override {
    if (loss_declared_) throw ContractError("predict called after the loss was declared");
    if (req.allowed.empty()) throw ContractError("predict called with an empty allowed-action set");
    if (std::find(req.allowed.begin(), req.allowed.end(), req.reference) == req.allowed.end())
      throw ContractError("reference action " + std::to_string(req.reference) + " is not allowed at step " +
                          std::to_string(actions_.size()));
    if (!req.oracle_costs.empty() && req.oracle_costs.size() != req.allowed.size())
      throw ContractError("oracle costs must be parallel to the allowed actions");

    const Source src = step_actor();
    const bool need_features = plan_.record != nullptr || src == Source::Learned;
    if (need_features && req.features == nullptr)
      throw ContractError("features required at step " + std::to_string(actions_.size()) + " but not supplied");

    FeatureVector conditioned;
    if (need_features) {
      conditioned = *req.features;
      add_history_features(conditioned, actions_, plan_.options.history_length);
    }

    Action chosen = req.reference;
    switch (src) {
      case Source::Prefix:
        chosen = plan_.prefix[actions_.size()];
        break;
      case Source::Forced:
        chosen = *plan_.forced;
        break;
      case Source::Learned:
        chosen = plan_.model->predict(req.role, conditioned, req.allowed);
        break;
      case Source::Reference:
        chosen = req.reference;
        break;
    }
    if (std::find(req.allowed.begin(), req.allowed.end(), chosen) == req.allowed.end())
      throw ContractError("replayed action " + std::to_string(chosen) + " is not allowed at step " +
                          std::to_string(actions_.size()));

    if (plan_.record != nullptr) {
      StepRecord rec;
      rec.features = std::move(conditioned);
      rec.allowed.assign(req.allowed.begin(), req.allowed.end());
      rec.oracle_costs.assign(req.oracle_costs.begin(), req.oracle_costs.end());
      rec.reference = req.reference;
      rec.chosen = chosen;
      rec.role = req.role;
      plan_.record->push_back(std::move(rec));
    }
    actions_.push_back(chosen);
    return chosen;
  }

  void declare_loss(double loss) override {
    if (loss_declared_) throw ContractError("loss declared more than once");
    if (!(loss >= 0.0) || !std::isfinite(loss)) throw ContractError("declared loss must be finite and non-negative");
    loss_ = loss;
    loss_declared_ = true;
  }

  bool loss_declared() const noexcept { return loss_declared_; }
  double loss() const noexcept { return loss_; }
  std::vector<Action> take_actions() { return std::move(actions_); }

 private:
  enum class Source { Prefix, Forced, Reference, Learned };

  Source step_actor() const noexcept {
    const std::size_t t = actions_.size();
    if (t < plan_.prefix.size()) return Source::Prefix;
    if (t == plan_.prefix.size() && plan_.forced) return Source::Forced;
    return plan_.actor == Actor::Learned ? Source::Learned : Source::Reference;
  }

  const RunPlan& plan_;
  std::vector<Action> actions_;
  double loss_ = 0.0;
  bool loss_declared_ = false;
};

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

template <SearchTask T>
Trajectory<typename T::Output> run_trajectory(const T& task, const typename T::Instance& instance,
                                              const RunPlan& plan) {
  detail::TrajectorySession session(plan);
  Trajectory<typename T::Output> result;
  result.output = task.run(session, instance);
  if (!session.loss_declared()) throw ContractError("decoder finished without declaring a loss");
  result.loss = session.loss();
  result.actions = session.take_actions();
  if (plan.forced && result.actions.size() <= plan.prefix.size())
    throw ContractError("decoder stopped before the forced deviation step");
  return result;
}

// Draws which policy acts for one trajectory.
inline Actor draw_actor(PolicyKind kind, double p_reference, std::mt19937_64& rng) {
  switch (kind) {
    case PolicyKind::Reference: return Actor::Reference;
    case PolicyKind::Learned: return Actor::Learned;
    case PolicyKind::Mixture: return detail::uniform01(rng) < p_reference ? Actor::Reference : Actor::Learned;
  }
  return Actor::Reference;
}

struct RolloutPolicy {
  PolicyKind kind = PolicyKind::Reference;
  double reference_probability = 1.0;
  const PolicyModel* model = nullptr;
};

// One-step deviations at every `deviation_stride`-th rollin step, over every
// allowed action, each completed by the rollout policy. Costs are the
// rollout losses shifted so the best action costs 0.
template <SearchTask T>
std::vector<CostSensitiveExample> collect_deviations(const T& task, const typename T::Instance& instance,
                                                     const Trajectory<typename T::Output>& rollin,
                                                     const std::vector<StepRecord>& steps,
                                                     const RolloutPolicy& rollout, const SearchOptions& options,
                                                     std::mt19937_64& rng) {
  if (steps.size() != rollin.actions.size())
    throw ContractError("rollin record does not match the rollin trajectory");
  const std::uint32_t stride = std::max<std::uint32_t>(1, options.deviation_stride);
  std::vector<CostSensitiveExample> out;
  std::vector<double> losses;
  for (std::size_t t = 0; t < steps.size(); t += stride) {
    const StepRecord& step = steps[t];
    losses.assign(step.allowed.size(), 0.0);
    for (std::size_t i = 0; i < step.allowed.size(); ++i) {
      const Actor actor = draw_actor(rollout.kind, rollout.reference_probability, rng);
      if (actor == Actor::Reference && options.use_oracle_costs && !step.oracle_costs.empty()) {
        losses[i] = step.oracle_costs[i];
        continue;
      }
      RunPlan plan;
      plan.actor = actor;
      plan.model = rollout.model;
      plan.prefix = std::span<const Action>(rollin.actions).first(t);
      plan.forced = step.allowed[i];
      plan.options = options;
      losses[i] = run_trajectory(task, instance, plan).loss;
    }
    const double best = *std::min_element(losses.begin(), losses.end());
    CostSensitiveExample ex;
    ex.features = step.features;
    ex.role = step.role;
    for (std::size_t i = 0; i < step.allowed.size(); ++i)
      ex.costs.emplace_back(step.allowed[i], static_cast<float>(losses[i] - best));
    out.push_back(std::move(ex));
  }
  return out;
}

struct PassStats {
  std::size_t pass = 0;
  std::size_t instances = 0;
  std::size_t examples = 0;
  double average_loss = 0.0;
  std::uint64_t round = 0;
  double reference_probability = 0.0;
};

struct TrainOptions {
  std::size_t passes = 1;
  std::uint64_t seed = 0;
  SearchOptions search;
  std::function<void(const PassStats&)> on_pass;
};

// Online training: per instance, draw the rollin policy from the schedule,
// run it, collect deviations, update the learner, advance the round counter.
template <SearchTask T>
void train(const T& task, std::span<const typename T::Instance> data, PolicySchedule& schedule,
           PolicyModel& model, const TrainOptions& options) {
  if (data.empty()) throw ConfigError("training set is empty");
  if (options.passes == 0) throw ConfigError("number of passes must be at least 1");
  if (!(schedule.alpha > 0.0 && schedule.alpha < 1.0)) throw ConfigError("mixture rate alpha must lie in (0, 1)");
  std::mt19937_64 rng(options.seed);
  for (std::size_t pass = 0; pass < options.passes; ++pass) {
    PassStats stats;
    stats.pass = pass + 1;
    double loss_sum = 0.0;
    for (const auto& instance : data) {
      const Actor rollin_actor = draw_actor(schedule.rollin, schedule.reference_probability(schedule.rollin), rng);
      std::vector<StepRecord> steps;
      RunPlan plan;
      plan.actor = rollin_actor;
      plan.model = &model;
      plan.record = &steps;
      plan.options = options.search;
      const auto rollin = run_trajectory(task, instance, plan);
      loss_sum += rollin.loss;

      RolloutPolicy rollout{schedule.rollout, schedule.reference_probability(schedule.rollout), &model};
      auto examples = collect_deviations(task, instance, rollin, steps, rollout, options.search, rng);
      for (const auto& ex : examples) model.update(ex);
      stats.examples += examples.size();
      ++stats.instances;
      ++schedule.round;
    }
    stats.average_loss = loss_sum / static_cast<double>(data.size());
    stats.round = schedule.round;
    stats.reference_probability = schedule.reference_probability();
    if (options.on_pass) options.on_pass(stats);
  }
}

// Greedy decoding with the learned policy only.
template <SearchTask T>
Trajectory<typename T::Output> decode(const T& task, const typename T::Instance& instance, const PolicyModel& model,
                                      const SearchOptions& options = {}) {
  RunPlan plan;
  plan.actor = Actor::Learned;
  plan.model = &model;
  plan.options = options;
  return run_trajectory(task, instance, plan);
}

}  // namespace l2s
