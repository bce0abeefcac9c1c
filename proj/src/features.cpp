#include "l2s/features.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>

#include "l2s/errors.hpp"

namespace l2s {
namespace {

std::string namespace_name(NamespaceId ns) {
  if (ns == kConstantNamespace) return "const";
  if (std::isprint(ns)) return std::string(1, static_cast<char>(ns));
  return "#" + std::to_string(ns);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

InteractionSpec InteractionSpec::parse(std::string_view pairs, std::string_view triples) {
  InteractionSpec spec;
  for (const auto& p : split_ws(pairs)) {
    if (p.size() != 2) throw ConfigError("interaction pair must name two namespaces: '" + p + "'");
    spec.pairs.push_back({static_cast<NamespaceId>(p[0]), static_cast<NamespaceId>(p[1])});
  }
  for (const auto& t : split_ws(triples)) {
    if (t.size() != 3) throw ConfigError("interaction triple must name three namespaces: '" + t + "'");
    spec.triples.push_back(
        {static_cast<NamespaceId>(t[0]), static_cast<NamespaceId>(t[1]), static_cast<NamespaceId>(t[2])});
  }
  return spec;
}

std::string InteractionSpec::pairs_string() const {
  std::string out;
  for (const auto& [a, b] : pairs) {
    if (!out.empty()) out += ' ';
    out += static_cast<char>(a);
    out += static_cast<char>(b);
  }
  return out;
}

std::string InteractionSpec::triples_string() const {
  std::string out;
  for (const auto& [a, b, c] : triples) {
    if (!out.empty()) out += ' ';
    out += static_cast<char>(a);
    out += static_cast<char>(b);
    out += static_cast<char>(c);
  }
  return out;
}

std::uint32_t namespace_salt(NamespaceId ns) noexcept {
  const std::byte b{ns};
  return murmur3_32(std::span<const std::byte>(&b, 1), 0);
}

FeatureVector::FeatureVector(std::uint32_t bits) : bits_(bits), mask_(0) {
  if (bits == 0 || bits > 30) throw ConfigError("hash bit-width must be in [1, 30], got " + std::to_string(bits));
  mask_ = (1u << bits) - 1u;
}

std::vector<Feature>& FeatureVector::block(NamespaceId ns) {
  auto it = std::find(ids_.begin(), ids_.end(), ns);
  if (it != ids_.end()) return blocks_[static_cast<std::size_t>(it - ids_.begin())];
  ids_.push_back(ns);
  blocks_.emplace_back();
  if (audit_) raw_.emplace_back();
  return blocks_.back();
}

void FeatureVector::push(NamespaceId ns, std::uint32_t hash, float value, std::string raw) {
  auto& b = block(ns);
  b.push_back(Feature{hash & mask_, value});
  if (audit_) {
    auto pos = static_cast<std::size_t>(std::find(ids_.begin(), ids_.end(), ns) - ids_.begin());
    raw_[pos].push_back(std::move(raw));
  }
  ++count_;
  sum_sq_ += static_cast<double>(value) * value;
}

void FeatureVector::add_feature(NamespaceId ns, std::string_view raw, float value) {
  push(ns, murmur3_32(raw, namespace_salt(ns)), value, audit_ ? std::string(raw) : std::string());
}

void FeatureVector::add_feature(NamespaceId ns, std::uint64_t raw_id, float value) {
  push(ns, murmur3_32(raw_id, namespace_salt(ns)), value, audit_ ? std::to_string(raw_id) : std::string());
}

void FeatureVector::add_constant() { add_feature(kConstantNamespace, std::string_view("constant")); }

std::span<const Feature> FeatureVector::features(NamespaceId ns) const noexcept {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == ns) return blocks_[i];
  return {};
}

std::size_t FeatureVector::total_count(const InteractionSpec& spec) const noexcept {
  std::size_t n = count_;
  for (const auto& [a, b] : spec.pairs) n += features(a).size() * features(b).size();
  for (const auto& [a, b, c] : spec.triples) n += features(a).size() * features(b).size() * features(c).size();
  return n;
}

void FeatureVector::expand(const InteractionSpec& spec, std::vector<Feature>& out) const {
  out.clear();
  out.reserve(total_count(spec));
  for (const auto& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  for_each_interaction(spec, [&](const Feature& f) { out.push_back(f); });
}

void FeatureVector::clear() noexcept {
  ids_.clear();
  blocks_.clear();
  raw_.clear();
  count_ = 0;
  sum_sq_ = 0.0;
}

void FeatureVector::dump(std::ostream& os) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    for (std::size_t k = 0; k < blocks_[i].size(); ++k)
      os << namespace_name(ids_[i]) << '\t' << (audit_ ? raw_[i][k] : std::string("?")) << '\t'
         << blocks_[i][k].index << '\t' << blocks_[i][k].value << '\n';
}

}  // namespace l2s
