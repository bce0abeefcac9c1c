#include "l2s/search.hpp"

namespace l2s {

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::Reference: return "reference";
    case PolicyKind::Learned: return "learned";
    case PolicyKind::Mixture: return "mixture";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::Reference, PolicyKind::Learned, PolicyKind::Mixture})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown policy '" + std::string(name) + "' (expected reference, learned, mixture)");
}

double PolicySchedule::reference_probability() const noexcept {
  const double decay = std::pow(1.0 - alpha, static_cast<double>(round));
  return reference_decays ? decay : 1.0 - decay;
}

double PolicySchedule::reference_probability(PolicyKind kind) const noexcept {
  switch (kind) {
    case PolicyKind::Reference: return 1.0;
    case PolicyKind::Learned: return 0.0;
    case PolicyKind::Mixture: return reference_probability();
  }
  return 1.0;
}

void add_history_features(FeatureVector& fv, std::span<const Action> history, std::uint32_t length) {
  for (std::uint32_t k = 1; k <= length; ++k) {
    // Action ids are shifted by one so "no previous action" is 0.
    const std::uint64_t prev = history.size() >= k ? std::uint64_t{history[history.size() - k]} + 1 : 0;
    fv.add_feature(kHistoryNamespace, (std::uint64_t{k} << 32) | prev);
  }
}

}  // namespace l2s
