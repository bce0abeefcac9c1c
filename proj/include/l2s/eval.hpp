#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "l2s/conll.hpp"

namespace l2s::eval {

struct ScoreReport {
  double uas = 0.0;
  double las = 0.0;
  std::size_t total = 0;
  std::size_t scored = 0;
  std::size_t excluded = 0;  // punctuation tokens left out
  std::size_t correct_heads = 0;
  std::size_t correct_labeled = 0;
  std::size_t sentences = 0;
  std::size_t exact_sentences = 0;  // every scored head correct
  double exact_match = 0.0;
};

// Attachment scores of predicted trees against gold trees. Punctuation is
// decided from the gold surface form. Scores are 0 when nothing is scored.
ScoreReport score(std::span<const conll::Sentence> predicted, std::span<const conll::Sentence> gold,
                  bool exclude_punct = true);

// key=value lines, full precision.
void write_key_values(std::ostream& os, const ScoreReport& report);
// Percentages with two decimals.
void write_table(std::ostream& os, const ScoreReport& report);

// Each word attached to its right neighbour, the last word to Root.
conll::Sentence right_neighbor_baseline(const conll::Sentence& sentence);

}  // namespace l2s::eval
