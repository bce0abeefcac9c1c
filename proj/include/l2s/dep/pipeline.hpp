#pragma once

// Train and parse whole treebanks with the arc-hybrid parser.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "l2s/conll.hpp"
#include "l2s/dep/parser.hpp"
#include "l2s/learner.hpp"
#include "l2s/search.hpp"

namespace l2s::dep {

struct TrainSettings {
  std::size_t passes = 5;
  PolicySchedule schedule;
  SearchOptions search{.history_length = 1, .deviation_stride = 1, .use_oracle_costs = true};
  std::uint64_t seed = 0;
  std::function<void(const PassStats&)> on_pass;
};

struct TrainedParser {
  ParserTask task;
  PolicyModel model;
  std::size_t used = 0;                  // sentences trained on
  std::size_t skipped_nonprojective = 0;
};

// Builds the label set, drops non-projective trees and trains online in
// input order. The history length is stored in the model.
TrainedParser train_parser(std::span<const conll::Sentence> data, const ParserConfig& parser,
                           LearnerConfig learner, const TrainSettings& settings);

// History length recorded by train_parser (1 when absent).
std::uint32_t stored_history_length(const PolicyModel& model);

// Greedy parses, decoded in parallel. Sentences come back annotated.
std::vector<conll::Sentence> parse_all(const ParserTask& task, const PolicyModel& model,
                                       std::span<const conll::Sentence> sentences, bool parallel = true);

}  // namespace l2s::dep
