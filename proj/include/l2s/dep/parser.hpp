#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "l2s/conll.hpp"
#include "l2s/dep/oracle.hpp"
#include "l2s/dep/transition.hpp"
#include "l2s/features.hpp"
#include "l2s/learner.hpp"
#include "l2s/search.hpp"

namespace l2s::dep {

enum class FeatureSet : std::uint8_t { Unigram, Bigram, Full };

std::string_view to_string(FeatureSet fs) noexcept;
FeatureSet parse_feature_set(std::string_view name);

// Stack/buffer/children context slots, one namespace each ('B'..'N').
enum class Slot : std::uint8_t {
  S1, S2, S3,            // stack top three
  B1, B2, B3,            // buffer front three
  S1L1, S1L2, S1R1, S1R2,  // leftmost/rightmost children of s1
  B1L1, B1L2,            // leftmost children of b1
  S2L1,                  // leftmost child of s2
};
inline constexpr std::size_t kSlotCount = 13;
inline constexpr NamespaceId kValueNamespace = 'd';

constexpr NamespaceId slot_namespace(Slot s) noexcept { return static_cast<NamespaceId>('B' + static_cast<int>(s)); }

// Bigram (pairs) and trigram (triples) templates over the slot namespaces.
InteractionSpec interactions_for(FeatureSet fs);

// Arc labels seen in training. One reserved root label marks arcs from Root;
// labels attaching a word to Root are restricted to those seen on Root arcs,
// every other arc may take any label except the reserved one.
class LabelSet {
 public:
  LabelSet() = default;
  static LabelSet build(std::span<const conll::Sentence> sentences);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::optional<int> id(std::string_view name) const;
  int root_label() const noexcept { return root_label_; }
  std::span<const Action> root_attachments() const noexcept { return root_allowed_; }
  std::span<const Action> other_attachments() const noexcept { return other_allowed_; }

  void store(std::map<std::string, std::string>& metadata) const;
  static LabelSet load(const std::map<std::string, std::string>& metadata);

  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.names_ == b.names_ && a.root_label_ == b.root_label_ && a.root_allowed_ == b.root_allowed_;
  }

 private:
  void finalize();

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  int root_label_ = 0;
  std::vector<Action> root_allowed_;
  std::vector<Action> other_allowed_;
};

struct ParserConfig {
  bool labeled = true;
  conll::PosColumn pos_column = conll::PosColumn::Fine;
  FeatureSet feature_set = FeatureSet::Full;
  std::uint32_t bits = kDefaultBits;
  // Pass oracle costs with every predict so the engine can skip rollouts.
  bool provide_oracle_costs = true;
};

struct ParseInstance {
  std::uint32_t words = 0;
  std::vector<std::uint64_t> word_ids;  // index 0 is Root
  std::vector<std::uint64_t> pos_ids;
  std::vector<int> gold_heads;   // empty when unannotated
  std::vector<int> gold_labels;  // kNoLabel for labels unknown to the LabelSet
  bool projective = true;

  bool has_gold() const noexcept { return !gold_heads.empty(); }
};

struct ParseOutput {
  std::vector<int> heads;   // index 0 unused
  std::vector<int> labels;  // kNoLabel in unlabeled mode
};

// The arc-hybrid parser as a search task.
class ParserTask {
 public:
  using Instance = ParseInstance;
  using Output = ParseOutput;

  ParserTask(ParserConfig config, LabelSet labels);

  const ParserConfig& config() const noexcept { return config_; }
  const LabelSet& labels() const noexcept { return labels_; }

  Instance prepare(const conll::Sentence& sentence) const;
  Output run(Session& session, const Instance& instance) const;

  void extract_features(const Configuration& c, const Instance& x, FeatureVector& out) const;

  // Action classes per predictor role: parse actions, then labels after
  // ReduceRight and after ReduceLeft.
  std::vector<std::uint32_t> classes_per_role() const;
  PolicyModel make_model(const LearnerConfig& learner) const;
  // Settings stored in the model file so decoding can rebuild the task.
  void store(std::map<std::string, std::string>& metadata) const;
  static ParserTask load(const PolicyModel& model);

  // Copy of the sentence with predicted heads and labels filled in.
  conll::Sentence annotate(const conll::Sentence& sentence, const Output& output) const;

 private:
  ParserConfig config_;
  LabelSet labels_;
};

}  // namespace l2s::dep
