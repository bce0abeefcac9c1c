#pragma once

// Left-to-right sequence labeling as a search task, with Hamming loss.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "l2s/features.hpp"
#include "l2s/learner.hpp"
#include "l2s/search.hpp"

namespace l2s::tag {

struct TaggedToken {
  std::string form;
  std::string tag;  // "_" or empty when unknown
};
using TaggedSentence = std::vector<TaggedToken>;

// One "token<TAB>tag" (or "token tag") per line, blank line between
// sequences. A line with a single column is a token with no tag.
std::vector<TaggedSentence> read_tagged(std::istream& in);
std::vector<TaggedSentence> read_tagged_file(const std::filesystem::path& path);
void write_tagged(std::ostream& out, std::span<const TaggedSentence> sequences);

class TagSet {
 public:
  static TagSet build(std::span<const TaggedSentence> data);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(Action id) const { return names_.at(id); }
  std::optional<Action> id(std::string_view name) const;

  void store(std::map<std::string, std::string>& metadata) const;
  static TagSet load(const std::map<std::string, std::string>& metadata);

  friend bool operator==(const TagSet& a, const TagSet& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Action> index_;
};

struct TagInstance {
  std::vector<std::uint64_t> token_ids;
  std::vector<int> gold;  // empty when untagged; -1 for tags outside the TagSet
  bool has_gold() const noexcept { return !gold.empty(); }
};

struct TagOutput {
  std::vector<Action> tags;
};

std::size_t hamming_loss(std::span<const Action> predicted, std::span<const int> gold);

class TaggerTask {
 public:
  using Instance = TagInstance;
  using Output = TagOutput;

  TaggerTask(TagSet tags, std::uint32_t bits = kDefaultBits);

  const TagSet& tags() const noexcept { return tags_; }

  Instance prepare(const TaggedSentence& sentence) const;
  Output run(Session& session, const Instance& x) const;

  PolicyModel make_model(const LearnerConfig& learner) const;
  static TaggerTask load(const PolicyModel& model);
  TaggedSentence annotate(const TaggedSentence& sentence, const Output& output) const;

 private:
  TagSet tags_;
  std::vector<Action> all_;
  std::uint32_t bits_;
};

}  // namespace l2s::tag
