#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l2s/hash.hpp"

namespace l2s {

using NamespaceId = unsigned char;

inline constexpr NamespaceId kConstantNamespace = 128;
inline constexpr NamespaceId kHistoryNamespace = 'p';
inline constexpr std::uint32_t kDefaultBits = 18;

struct Feature {
  std::uint32_t index = 0;
  float value = 1.0f;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Namespace pairs and triples whose cross products become extra features.
struct InteractionSpec {
  std::vector<std::array<NamespaceId, 2>> pairs;
  std::vector<std::array<NamespaceId, 3>> triples;

  // Parses whitespace-separated two/three-letter groups, e.g. "BC BE", "EFG".
  static InteractionSpec parse(std::string_view pairs, std::string_view triples);
  std::string pairs_string() const;
  std::string triples_string() const;

  friend bool operator==(const InteractionSpec&, const InteractionSpec&) = default;
};

// Per-namespace salt mixed into every raw-id hash of that namespace.
std::uint32_t namespace_salt(NamespaceId ns) noexcept;

// Hashed sparse feature vector partitioned into namespaces.
class FeatureVector {
 public:
  explicit FeatureVector(std::uint32_t bits = kDefaultBits);

  std::uint32_t bits() const noexcept { return bits_; }
  std::uint32_t mask() const noexcept { return mask_; }

  void add_feature(NamespaceId ns, std::string_view raw, float value = 1.0f);
  void add_feature(NamespaceId ns, std::uint64_t raw_id, float value = 1.0f);
  void add_constant();

  std::span<const Feature> features(NamespaceId ns) const noexcept;
  const std::vector<NamespaceId>& namespaces() const noexcept { return ids_; }

  std::size_t unigram_count() const noexcept { return count_; }
  double sum_sq() const noexcept { return sum_sq_; }
  // Unigrams plus every feature the interactions would generate.
  std::size_t total_count(const InteractionSpec& spec) const noexcept;

  // Visits every generated interaction feature (pairs first, then triples).
  template <class Fn>
  void for_each_interaction(const InteractionSpec& spec, Fn&& fn) const;

  // Unigrams followed by interactions, materialized.
  void expand(const InteractionSpec& spec, std::vector<Feature>& out) const;

  void clear() noexcept;

  // Audit mode keeps the raw id of every feature for dump(). Clears the vector.
  void enable_audit() {
    clear();
    audit_ = true;
  }
  // One "namespace<TAB>raw<TAB>index<TAB>value" line per unigram feature.
  void dump(std::ostream& os) const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
    return a.bits_ == b.bits_ && a.ids_ == b.ids_ && a.blocks_ == b.blocks_;
  }

 private:
  std::vector<Feature>& block(NamespaceId ns);
  void push(NamespaceId ns, std::uint32_t hash, float value, std::string raw);

  std::uint32_t bits_;
  std::uint32_t mask_;
  std::vector<NamespaceId> ids_;
  std::vector<std::vector<Feature>> blocks_;
  std::size_t count_ = 0;
  double sum_sq_ = 0.0;
  bool audit_ = false;
  std::vector<std::vector<std::string>> raw_;
};

template <class Fn>
void FeatureVector::for_each_interaction(const InteractionSpec& spec, Fn&& fn) const {
  for (const auto& [a, b] : spec.pairs) {
    const auto fa = features(a);
    const auto fb = features(b);
    for (const Feature& x : fa)
      for (const Feature& y : fb)
        fn(Feature{combine_index(x.index, y.index) & mask_, x.value * y.value});
  }
  for (const auto& [a, b, c] : spec.triples) {
    const auto fa = features(a);
    const auto fb = features(b);
    const auto fc = features(c);
    for (const Feature& x : fa)
      for (const Feature& y : fb) {
        const std::uint32_t xy = combine_index(x.index, y.index);
        for (const Feature& z : fc)
          fn(Feature{combine_index(xy, z.index) & mask_, x.value * y.value * z.value});
      }
  }
}

}  // namespace l2s
