#include "l2s/dep/parser.hpp"

#include <algorithm>
#include <sstream>

#include "l2s/errors.hpp"
#include "l2s/hash.hpp"

namespace l2s::dep {
namespace {

// Raw feature ids: kind in the high word, value in the low word.
enum : std::uint64_t {
  kWordId = 1,
  kPosId = 2,
  kLabelId = 3,
  kEmptyId = 4,
  kRootId = 5,
  kDistance = 10,
  kLeftValency = 11,
  kRightValency = 12,
  kBufferValency = 13,
  kChildLabel = 14,  // 14..19, one per child slot
};
constexpr std::uint64_t raw(std::uint64_t kind, std::uint64_t value) { return (kind << 32) | (value & 0xffffffffu); }
constexpr std::uint64_t kNone = 0xffff;
constexpr std::uint32_t kCap = 5;

constexpr std::uint64_t kRootWord = raw(kRootId, 1);
constexpr std::uint64_t kRootPos = raw(kRootId, 2);

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

const std::string& require(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw LoadError("model metadata lacks '" + key + "'");
  return it->second;
}

}  // namespace

std::string_view to_string(FeatureSet fs) noexcept {
  switch (fs) {
    case FeatureSet::Unigram: return "uni";
    case FeatureSet::Bigram: return "uni+bi";
    case FeatureSet::Full: return "full";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view name) {
  for (auto fs : {FeatureSet::Unigram, FeatureSet::Bigram, FeatureSet::Full})
    if (to_string(fs) == name) return fs;
  throw ConfigError("unknown feature set '" + std::string(name) + "' (expected uni, uni+bi, full)");
}

InteractionSpec interactions_for(FeatureSet fs) {
  // B..N are the slots in Slot order, d the value namespace.
  constexpr std::string_view pairs = "BC BE BB CC DD EE FF GG EF BH BJ EL dB dC dD dE dF dG dd";
  constexpr std::string_view triples = "EFG BEF BCE BCD BEL ELM BHI BCC BJE BHE BJK BEH BEN BEJ";
  switch (fs) {
    case FeatureSet::Unigram: return {};
    case FeatureSet::Bigram: return InteractionSpec::parse(pairs, "");
    case FeatureSet::Full: return InteractionSpec::parse(pairs, triples);
  }
  return {};
}

LabelSet LabelSet::build(std::span<const conll::Sentence> sentences) {
  std::map<std::string, std::size_t> all;
  std::map<std::string, std::size_t> on_root;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) {
      if (t.head == conll::kNoHead) continue;
      ++all[t.deprel];
      if (t.head == 0) ++on_root[t.deprel];
    }
  LabelSet set;
  for (const auto& [name, count] : all) {
    set.index_[name] = static_cast<int>(set.names_.size());
    set.names_.push_back(name);
  }
  std::size_t best = 0;
  for (const auto& [name, count] : on_root) {
    const Action id = static_cast<Action>(set.index_.at(name));
    set.root_allowed_.push_back(id);
    if (count > best) {
      best = count;
      set.root_label_ = static_cast<int>(id);
    }
  }
  set.finalize();
  return set;
}

void LabelSet::finalize() {
  index_.clear();
  for (std::size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = static_cast<int>(i);
  std::sort(root_allowed_.begin(), root_allowed_.end());
  if (root_allowed_.empty() && !names_.empty()) root_allowed_.push_back(static_cast<Action>(root_label_));
  other_allowed_.clear();
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (static_cast<int>(i) != root_label_) other_allowed_.push_back(static_cast<Action>(i));
  if (other_allowed_.empty())
    for (std::size_t i = 0; i < names_.size(); ++i) other_allowed_.push_back(static_cast<Action>(i));
}

std::optional<int> LabelSet::id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void LabelSet::store(std::map<std::string, std::string>& metadata) const {
  metadata["labels"] = join(names_, '\n');
  metadata["root_label"] = std::to_string(root_label_);
  std::vector<std::string> ids;
  for (Action a : root_allowed_) ids.push_back(std::to_string(a));
  metadata["root_labels"] = join(ids, ' ');
}

LabelSet LabelSet::load(const std::map<std::string, std::string>& metadata) {
  LabelSet set;
  const std::string& names = require(metadata, "labels");
  if (!names.empty()) {
    std::istringstream in(names);
    for (std::string line; std::getline(in, line);) set.names_.push_back(line);
  }
  set.root_label_ = std::stoi(require(metadata, "root_label"));
  std::istringstream ids(require(metadata, "root_labels"));
  for (Action a; ids >> a;) {
    if (a >= set.names_.size()) throw LoadError("root label id out of range");
    set.root_allowed_.push_back(a);
  }
  if (!set.names_.empty() && (set.root_label_ < 0 || static_cast<std::size_t>(set.root_label_) >= set.names_.size()))
    throw LoadError("root label id out of range");
  set.finalize();
  return set;
}

ParserTask::ParserTask(ParserConfig config, LabelSet labels) : config_(config), labels_(std::move(labels)) {
  if (config_.labeled && labels_.size() == 0) throw ConfigError("labeled parsing needs at least one arc label");
}

ParseInstance ParserTask::prepare(const conll::Sentence& sentence) const {
  if (sentence.tokens.empty()) throw ContractError("cannot parse an empty sentence");
  ParseInstance x;
  x.words = static_cast<std::uint32_t>(sentence.size());
  x.word_ids.push_back(kRootWord);
  x.pos_ids.push_back(kRootPos);
  for (const auto& t : sentence.tokens) {
    x.word_ids.push_back(raw(kWordId, murmur3_32(t.form, 0)));
    x.pos_ids.push_back(raw(kPosId, murmur3_32(t.pos(config_.pos_column), 0)));
  }
  if (sentence.has_gold_heads()) {
    x.gold_heads = sentence.heads();
    x.gold_labels.assign(x.words + 1, kNoLabel);
    for (std::size_t i = 0; i < sentence.size(); ++i)
      x.gold_labels[i + 1] = labels_.id(sentence.tokens[i].deprel).value_or(kNoLabel);
    x.projective = conll::is_projective(x.gold_heads);
  }
  return x;
}

void ParserTask::extract_features(const Configuration& c, const Instance& x, FeatureVector& fv) const {
  fv.clear();
  fv.add_constant();

  const auto n = c.words();
  const auto p = c.buffer_front();
  const int s1 = c.stack_top(1);
  const int s2 = c.stack_top(2);
  auto buffer = [&](std::uint32_t k) { return p + k <= n ? static_cast<int>(p + k) : -1; };
  auto child = [](std::uint32_t pos) { return pos == 0 ? -1 : static_cast<int>(pos); };

  std::array<int, kSlotCount> slot{};
  slot[0] = s1;
  slot[1] = s2;
  slot[2] = c.stack_top(3);
  slot[3] = buffer(0);
  slot[4] = buffer(1);
  slot[5] = buffer(2);
  slot[6] = s1 >= 0 ? child(c.leftmost(static_cast<std::uint32_t>(s1), 1)) : -1;
  slot[7] = s1 >= 0 ? child(c.leftmost(static_cast<std::uint32_t>(s1), 2)) : -1;
  slot[8] = s1 >= 0 ? child(c.rightmost(static_cast<std::uint32_t>(s1), 1)) : -1;
  slot[9] = s1 >= 0 ? child(c.rightmost(static_cast<std::uint32_t>(s1), 2)) : -1;
  slot[10] = p <= n ? child(c.leftmost(p, 1)) : -1;
  slot[11] = p <= n ? child(c.leftmost(p, 2)) : -1;
  slot[12] = s2 >= 0 ? child(c.leftmost(static_cast<std::uint32_t>(s2), 1)) : -1;

  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const NamespaceId ns = slot_namespace(static_cast<Slot>(i));
    const bool child_slot = i >= 6;
    const int pos = slot[i];
    if (pos < 0) {
      fv.add_feature(ns, raw(kEmptyId, kWordId));
      fv.add_feature(ns, raw(kEmptyId, kPosId));
      if (child_slot) fv.add_feature(ns, raw(kEmptyId, kLabelId));
      continue;
    }
    const auto u = static_cast<std::size_t>(pos);
    fv.add_feature(ns, x.word_ids[u]);
    fv.add_feature(ns, x.pos_ids[u]);
    if (child_slot) fv.add_feature(ns, raw(kLabelId, static_cast<std::uint64_t>(c.label(u) + 1)));
  }

  const auto us1 = static_cast<std::uint32_t>(s1);
  fv.add_feature(kValueNamespace, raw(kDistance, p <= n ? std::min<std::uint32_t>(kCap, p - us1) : kNone));
  fv.add_feature(kValueNamespace, raw(kLeftValency, std::min(kCap, c.left_children(us1))));
  fv.add_feature(kValueNamespace, raw(kRightValency, std::min(kCap, c.right_children(us1))));
  fv.add_feature(kValueNamespace, raw(kBufferValency, p <= n ? std::min(kCap, c.left_children(p)) : kNone));
  for (std::size_t k = 0; k < 6; ++k) {
    const int pos = slot[6 + k];
    const std::uint64_t v = pos < 0 ? kNone : static_cast<std::uint64_t>(c.label(static_cast<std::uint32_t>(pos)) + 1);
    fv.add_feature(kValueNamespace, raw(kChildLabel + k, v));
  }
}

ParseOutput ParserTask::run(Session& session, const Instance& x) const {
  if (x.words == 0) throw ContractError("cannot parse an empty sentence");
  const bool gold = x.has_gold();
  const int arc_weight = config_.labeled ? 2 : 1;
  Configuration c(x.words);
  FeatureVector fv(config_.bits);
  std::vector<float> costs;

  while (!c.terminal()) {
    const auto before = c.progress_measure();
    const std::vector<Action> valid = valid_actions(c);
    bool have_features = false;
    auto features = [&]() -> const FeatureVector* {
      if (!session.wants_features()) return nullptr;
      if (!have_features) {
        extract_features(c, x, fv);
        have_features = true;
      }
      return &fv;
    };

    Action reference = valid.front();
    costs.clear();
    if (gold) {
      reference = action_id(oracle_action(c, x.gold_heads));
      if (config_.provide_oracle_costs) {
        const ActionCosts full = oracle_costs(c, x.gold_heads, OracleMode::Full);
        for (Action a : valid) costs.push_back(static_cast<float>(arc_weight * *full.cost[a]));
      }
    }
    PredictRequest req;
    req.features = features();
    req.reference = reference;
    req.allowed = valid;
    req.role = 0;
    req.oracle_costs = costs;
    const auto t = static_cast<Transition>(session.predict(req));

    int label = kNoLabel;
    if (config_.labeled && t != Transition::Shift) {
      const auto s1 = c.stack().back();
      const std::uint32_t head =
          t == Transition::ReduceRight ? c.stack()[c.stack().size() - 2] : c.buffer_front();
      const auto allowed =
          (t == Transition::ReduceRight && head == kRoot) ? labels_.root_attachments() : labels_.other_attachments();
      const int gold_label = gold ? x.gold_labels[s1] : kNoLabel;
      const bool head_correct = gold && x.gold_heads[s1] == static_cast<int>(head);
      const bool gold_allowed =
          gold_label != kNoLabel &&
          std::find(allowed.begin(), allowed.end(), static_cast<Action>(gold_label)) != allowed.end();

      costs.clear();
      if (gold && config_.provide_oracle_costs)
        for (Action l : allowed) costs.push_back(head_correct && static_cast<int>(l) != gold_label ? 1.0f : 0.0f);
      PredictRequest lreq;
      lreq.features = features();
      lreq.reference = gold_allowed ? static_cast<Action>(gold_label) : allowed.front();
      lreq.allowed = allowed;
      lreq.role = t == Transition::ReduceRight ? 1 : 2;
      lreq.oracle_costs = costs;
      label = static_cast<int>(session.predict(lreq));
    }
    c.apply(t, label);
    if (c.progress_measure() >= before) throw ContractError("transition did not make progress");
  }

  ParseOutput out{c.heads(), c.labels()};
  session.declare_loss(gold ? sentence_loss(out.heads, out.labels, x.gold_heads, x.gold_labels, config_.labeled) : 0.0);
  return out;
}

std::vector<std::uint32_t> ParserTask::classes_per_role() const {
  if (!config_.labeled) return {3};
  const auto l = static_cast<std::uint32_t>(labels_.size());
  return {3, l, l};
}

PolicyModel ParserTask::make_model(const LearnerConfig& learner) const {
  if (learner.bits != config_.bits) throw ConfigError("learner and parser disagree on hash bits");
  PolicyModel model(learner, classes_per_role(), interactions_for(config_.feature_set));
  store(model.metadata());
  return model;
}

void ParserTask::store(std::map<std::string, std::string>& metadata) const {
  metadata["task"] = "dep";
  metadata["labeled"] = config_.labeled ? "1" : "0";
  metadata["pos_column"] = config_.pos_column == conll::PosColumn::Coarse ? "cpostag" : "postag";
  metadata["feature_set"] = std::string(to_string(config_.feature_set));
  labels_.store(metadata);
}

ParserTask ParserTask::load(const PolicyModel& model) {
  const auto& m = model.metadata();
  if (require(m, "task") != "dep") throw LoadError("model was not trained for dependency parsing");
  ParserConfig cfg;
  cfg.labeled = require(m, "labeled") == "1";
  cfg.pos_column = require(m, "pos_column") == "cpostag" ? conll::PosColumn::Coarse : conll::PosColumn::Fine;
  try {
    cfg.feature_set = parse_feature_set(require(m, "feature_set"));
  } catch (const ConfigError& e) {
    throw LoadError(e.what());
  }
  cfg.bits = model.config().bits;
  if (!(model.interactions() == interactions_for(cfg.feature_set)))
    throw LoadError("model interactions do not match its feature set");
  ParserTask task(cfg, LabelSet::load(m));
  if (task.classes_per_role().size() != model.roles()) throw LoadError("model role count does not match the parser");
  for (std::uint32_t r = 0; r < model.roles(); ++r)
    if (model.classes(r) != task.classes_per_role()[r]) throw LoadError("model class count does not match labels");
  return task;
}

conll::Sentence ParserTask::annotate(const conll::Sentence& sentence, const ParseOutput& output) const {
  conll::Sentence out = sentence;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    out.tokens[i].head = output.heads[i + 1];
    const int l = output.labels[i + 1];
    out.tokens[i].deprel = (config_.labeled && l != kNoLabel) ? labels_.name(l) : "_";
  }
  return out;
}

}  // namespace l2s::dep
