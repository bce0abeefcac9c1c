#include "l2s/tagger.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "l2s/errors.hpp"
#include "l2s/hash.hpp"

namespace l2s::tag {
namespace {

constexpr NamespaceId kTokenNamespace = 'w';
constexpr NamespaceId kPreviousTagNamespace = 't';

bool untagged(const std::string& tag) { return tag.empty() || tag == "_"; }

}  // namespace

std::vector<TaggedSentence> read_tagged(std::istream& in) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string f; fields >> f;) cols.push_back(f);
    if (cols.empty()) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (cols.size() > 2) throw ParseError(lineno, "expected 'token tag', found " + std::to_string(cols.size()) + " columns");
    cur.push_back({cols[0], cols.size() == 2 ? cols[1] : "_"});
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TaggedSentence> read_tagged_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return read_tagged(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path.string());
  }
}

void write_tagged(std::ostream& out, std::span<const TaggedSentence> sequences) {
  for (const auto& s : sequences) {
    for (const auto& t : s) out << t.form << '\t' << (t.tag.empty() ? "_" : t.tag) << '\n';
    out << '\n';
  }
}

TagSet TagSet::build(std::span<const TaggedSentence> data) {
  std::set<std::string> names;
  for (const auto& s : data)
    for (const auto& t : s)
      if (!untagged(t.tag)) names.insert(t.tag);
  TagSet set;
  for (const auto& n : names) {
    set.index_[n] = static_cast<Action>(set.names_.size());
    set.names_.push_back(n);
  }
  return set;
}

std::optional<Action> TagSet::id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TagSet::store(std::map<std::string, std::string>& metadata) const {
  std::string joined;
  for (std::size_t i = 0; i < names_.size(); ++i) joined += (i ? "\n" : "") + names_[i];
  metadata["task"] = "tag";
  metadata["tags"] = joined;
}

TagSet TagSet::load(const std::map<std::string, std::string>& metadata) {
  auto task = metadata.find("task");
  auto tags = metadata.find("tags");
  if (task == metadata.end() || task->second != "tag" || tags == metadata.end())
    throw LoadError("model was not trained for tagging");
  TagSet set;
  std::istringstream in(tags->second);
  for (std::string n; std::getline(in, n);) {
    set.index_[n] = static_cast<Action>(set.names_.size());
    set.names_.push_back(n);
  }
  return set;
}

std::size_t hamming_loss(std::span<const Action> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw ContractError("predicted and gold sequences differ in length");
  std::size_t loss = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) loss += static_cast<int>(predicted[i]) != gold[i];
  return loss;
}

TaggerTask::TaggerTask(TagSet tags, std::uint32_t bits) : tags_(std::move(tags)), bits_(bits) {
  if (tags_.size() == 0) throw ConfigError("tagging needs at least one tag");
  for (Action a = 0; a < tags_.size(); ++a) all_.push_back(a);
}

TagInstance TaggerTask::prepare(const TaggedSentence& sentence) const {
  if (sentence.empty()) throw ContractError("cannot tag an empty sequence");
  TagInstance x;
  const bool gold = std::all_of(sentence.begin(), sentence.end(), [](const auto& t) { return !untagged(t.tag); });
  for (const auto& t : sentence) {
    x.token_ids.push_back(murmur3_32(t.form, 0));
    if (gold) x.gold.push_back(tags_.id(t.tag) ? static_cast<int>(*tags_.id(t.tag)) : -1);
  }
  return x;
}

TagOutput TaggerTask::run(Session& session, const TagInstance& x) const {
  if (x.token_ids.empty()) throw ContractError("cannot tag an empty sequence");
  TagOutput out;
  FeatureVector fv(bits_);
  std::vector<float> costs(all_.size());
  for (std::size_t n = 0; n < x.token_ids.size(); ++n) {
    PredictRequest req;
    if (session.wants_features()) {
      fv.clear();
      fv.add_constant();
      fv.add_feature(kTokenNamespace, x.token_ids[n]);
      fv.add_feature(kPreviousTagNamespace, n == 0 ? 0 : std::uint64_t{out.tags.back()} + 1);
      req.features = &fv;
    }
    const int gold = x.has_gold() ? x.gold[n] : -1;
    req.reference = gold >= 0 ? static_cast<Action>(gold) : 0;
    req.allowed = all_;
    if (x.has_gold()) {
      for (std::size_t a = 0; a < all_.size(); ++a) costs[a] = static_cast<int>(a) != gold ? 1.0f : 0.0f;
      req.oracle_costs = costs;
    }
    out.tags.push_back(session.predict(req));
  }
  session.declare_loss(x.has_gold() ? static_cast<double>(hamming_loss(out.tags, x.gold)) : 0.0);
  return out;
}

PolicyModel TaggerTask::make_model(const LearnerConfig& learner) const {
  if (learner.bits != bits_) throw ConfigError("learner and tagger disagree on hash bits");
  PolicyModel model(learner, {static_cast<std::uint32_t>(tags_.size())}, {});
  tags_.store(model.metadata());
  return model;
}

TaggerTask TaggerTask::load(const PolicyModel& model) {
  TaggerTask task(TagSet::load(model.metadata()), model.config().bits);
  if (model.roles() != 1 || model.classes(0) != task.tags_.size()) throw LoadError("model does not match its tag set");
  return task;
}

TaggedSentence TaggerTask::annotate(const TaggedSentence& sentence, const TagOutput& output) const {
  TaggedSentence out = sentence;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].tag = tags_.name(output.tags[i]);
  return out;
}

}  // namespace l2s::tag
