#include "l2s/eval.hpp"

#include <iomanip>
#include <limits>
#include <ostream>

#include "l2s/errors.hpp"

namespace l2s::eval {

ScoreReport score(std::span<const conll::Sentence> predicted, std::span<const conll::Sentence> gold,
                  bool exclude_punct) {
  if (predicted.size() != gold.size())
    throw ContractError("predicted and gold files hold " + std::to_string(predicted.size()) + " and " +
                        std::to_string(gold.size()) + " sentences");
  ScoreReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& p = predicted[s].tokens;
    const auto& g = gold[s].tokens;
    if (p.size() != g.size())
      throw ContractError("sentence " + std::to_string(s + 1) + " differs in length between predicted and gold");
    bool exact = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ++r.total;
      if (exclude_punct && conll::flag_punctuation(g[i].form)) {
        ++r.excluded;
        continue;
      }
      ++r.scored;
      if (p[i].head == g[i].head) {
        ++r.correct_heads;
        if (p[i].deprel == g[i].deprel) ++r.correct_labeled;
      } else {
        exact = false;
      }
    }
    ++r.sentences;
    r.exact_sentences += exact;
  }
  if (r.scored > 0) {
    r.uas = static_cast<double>(r.correct_heads) / static_cast<double>(r.scored);
    r.las = static_cast<double>(r.correct_labeled) / static_cast<double>(r.scored);
  }
  if (r.sentences > 0) r.exact_match = static_cast<double>(r.exact_sentences) / static_cast<double>(r.sentences);
  return r;
}

void write_key_values(std::ostream& os, const ScoreReport& r) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "uas=" << r.uas << '\n'
     << "las=" << r.las << '\n'
     << "exact_match=" << r.exact_match << '\n'
     << "tokens_total=" << r.total << '\n'
     << "tokens_scored=" << r.scored << '\n'
     << "tokens_excluded=" << r.excluded << '\n'
     << "correct_heads=" << r.correct_heads << '\n'
     << "correct_labeled=" << r.correct_labeled << '\n'
     << "sentences=" << r.sentences << '\n';
  os.precision(old);
}

void write_table(std::ostream& os, const ScoreReport& r) {
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(2);
  os << "  UAS          " << std::setw(7) << 100.0 * r.uas << " %\n"
     << "  LAS          " << std::setw(7) << 100.0 * r.las << " %\n"
     << "  exact match  " << std::setw(7) << 100.0 * r.exact_match << " %\n"
     << "  tokens       " << r.scored << " scored, " << r.excluded << " punctuation excluded, " << r.total
     << " total\n";
  os.flags(flags);
}

conll::Sentence right_neighbor_baseline(const conll::Sentence& sentence) {
  conll::Sentence out = sentence;
  const auto n = out.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.tokens[i].head = i + 1 < n ? static_cast<int>(i + 2) : 0;
    out.tokens[i].deprel = "_";
  }
  return out;
}

}  // namespace l2s::eval
