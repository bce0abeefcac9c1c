#include "l2s/dep/pipeline.hpp"

#include <string>

#include "l2s/batch.hpp"
#include "l2s/errors.hpp"

namespace l2s::dep {

TrainedParser train_parser(std::span<const conll::Sentence> data, const ParserConfig& parser, LearnerConfig learner,
                           const TrainSettings& settings) {
  std::vector<conll::Sentence> kept;
  std::size_t skipped = 0;
  for (const auto& s : data) {
    if (!s.has_gold_heads()) throw ConfigError("training sentence at line " + std::to_string(s.first_line) + " lacks heads");
    if (conll::is_projective(s.heads()))
      kept.push_back(s);
    else
      ++skipped;
  }
  if (kept.empty()) throw ConfigError("no projective training sentences");

  learner.bits = parser.bits;
  ParserTask task(parser, LabelSet::build(kept));
  PolicyModel model = task.make_model(learner);
  model.metadata()["history"] = std::to_string(settings.search.history_length);

  std::vector<ParseInstance> xs;
  xs.reserve(kept.size());
  for (const auto& s : kept) xs.push_back(task.prepare(s));

  PolicySchedule schedule = settings.schedule;
  TrainOptions options;
  options.passes = settings.passes;
  options.seed = settings.seed;
  options.search = settings.search;
  options.on_pass = settings.on_pass;
  train(task, std::span<const ParseInstance>(xs), schedule, model, options);
  return {std::move(task), std::move(model), kept.size(), skipped};
}

std::uint32_t stored_history_length(const PolicyModel& model) {
  auto it = model.metadata().find("history");
  if (it == model.metadata().end()) return 1;
  try {
    return static_cast<std::uint32_t>(std::stoul(it->second));
  } catch (const std::exception&) {
    throw LoadError("bad history length in model: " + it->second);
  }
}

std::vector<conll::Sentence> parse_all(const ParserTask& task, const PolicyModel& model,
                                       std::span<const conll::Sentence> sentences, bool parallel) {
  std::vector<ParseInstance> xs;
  xs.reserve(sentences.size());
  for (const auto& s : sentences) {
    // Parsing ignores gold annotation; the reference action is never consulted.
    conll::Sentence bare = s;
    for (auto& t : bare.tokens) t.head = conll::kNoHead;
    xs.push_back(task.prepare(bare));
  }
  SearchOptions options;
  options.history_length = stored_history_length(model);
  const std::span<const ParseInstance> view(xs);
  const auto outputs = parallel ? decode_all(task, view, model, options) : decode_all_serial(task, view, model, options);
  std::vector<conll::Sentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back(task.annotate(sentences[i], outputs[i]));
  return out;
}

}  // namespace l2s::dep
