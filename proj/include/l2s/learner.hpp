#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "l2s/features.hpp"

namespace l2s {

using Action = std::uint32_t;

enum class LearnerKind : std::uint8_t { Sgd = 0, SgdPlus = 1, Nn = 2, NnFtrl = 3, Multiclass = 4 };

std::string_view to_string(LearnerKind kind) noexcept;
LearnerKind parse_learner_kind(std::string_view name);

struct FtrlParams {
  float alpha = 0.1f;
  float beta = 1.0f;
  float l1 = 0.0f;
  float l2 = 0.0f;

  friend bool operator==(const FtrlParams&, const FtrlParams&) = default;
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::NnFtrl;
  std::uint32_t bits = kDefaultBits;
  std::uint32_t hidden = 5;
  float learning_rate = 0.5f;
  FtrlParams ftrl;
  std::uint64_t seed = 0;

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

struct CostSensitiveExample {
  FeatureVector features;
  std::vector<std::pair<Action, float>> costs;
  std::uint32_t role = 0;
};

// Weights and optimizer state for one predictor role. Linear learners use
// `weights` (stride = classes); network learners use `weights` for the input
// layer (stride = hidden) and `output` for the per-class output layer.
// `state_a`/`state_b` mirror the shape of `weights`, `out_state_a`/`out_state_b`
// mirror `output`: accumulated squared gradients and normalization scales for
// SGD+, FTRL z and n accumulators for the FTRL-trained networks.
struct RoleHead {
  std::uint32_t classes = 0;
  std::vector<float> weights;
  std::vector<float> state_a;
  std::vector<float> state_b;
  std::vector<float> output;
  std::vector<float> out_state_a;
  std::vector<float> out_state_b;
  double examples_seen = 0.0;
  double norm_sum = 0.0;
  float label_max = 0.0f;  // largest cost seen; squared-loss predictions are clipped to [0, label_max]

  friend bool operator==(const RoleHead&, const RoleHead&) = default;
};

// Cost-sensitive multiclass policy: one regressed cost per action, argmin wins.
class PolicyModel {
 public:
  PolicyModel(LearnerConfig config, std::vector<std::uint32_t> classes_per_role, InteractionSpec interactions);

  const LearnerConfig& config() const noexcept { return config_; }
  const InteractionSpec& interactions() const noexcept { return interactions_; }
  std::size_t roles() const noexcept { return heads_.size(); }
  std::uint32_t classes(std::uint32_t role) const;
  const RoleHead& head(std::uint32_t role) const;

  // Regressed cost per class (negated logit for the multiclass learner).
  void scores(std::uint32_t role, const FeatureVector& x, std::vector<float>& out) const;

  // argmin over `allowed` of the predicted cost; ties go to the smallest id.
  Action predict(std::uint32_t role, const FeatureVector& x, std::span<const Action> allowed) const;

  void update(const CostSensitiveExample& example);

  // Task-level settings stored alongside the weights (labels, feature set, ...).
  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  void save(std::ostream& os) const;
  static PolicyModel load(std::istream& is);
  std::string serialize() const;
  static PolicyModel deserialize(std::string_view bytes);

  friend bool operator==(const PolicyModel&, const PolicyModel&) = default;

 private:
  PolicyModel() = default;
  RoleHead& mutable_head(std::uint32_t role);
  void linear_scores(const RoleHead& h, std::span<const Feature> x, std::vector<float>& out) const;
  void network_scores(const RoleHead& h, std::span<const Feature> x, std::vector<float>& out) const;
  void update_sgd(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex);
  void update_sgd_plus(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex);
  void update_network(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex);

  LearnerConfig config_;
  InteractionSpec interactions_;
  std::vector<RoleHead> heads_;
  std::map<std::string, std::string> metadata_;
};

// FTRL-Proximal weight implied by accumulators (z, n).
float ftrl_weight(float z, float n, const FtrlParams& p) noexcept;

}  // namespace l2s
