#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace l2s::conll {

inline constexpr int kNoHead = -1;

enum class PosColumn : std::uint8_t { Coarse, Fine };

// One CoNLL-X token line: ID FORM LEMMA CPOSTAG POSTAG FEATS HEAD DEPREL PHEAD PDEPREL.
struct Token {
  std::uint32_t position = 0;  // 1-based
  std::string form;
  std::string lemma = "_";
  std::string cpostag = "_";
  std::string postag = "_";
  std::string feats = "_";
  int head = kNoHead;  // 0 = Root, kNoHead when the column is "_"
  std::string deprel = "_";
  std::string phead = "_";
  std::string pdeprel = "_";
  bool punct = false;

  const std::string& pos(PosColumn column) const noexcept { return column == PosColumn::Coarse ? cpostag : postag; }
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t first_line = 0;

  std::size_t size() const noexcept { return tokens.size(); }
  // heads()[0] is kNoHead for Root; heads()[i] is the head of token i.
  std::vector<int> heads() const;
  bool has_gold_heads() const noexcept;
};

struct ReadOptions {
  // Accept "_" in the HEAD column (input to be parsed).
  bool allow_missing_heads = false;
};

std::vector<Sentence> read_conll(std::istream& in, const ReadOptions& options = {});
std::vector<Sentence> read_conll_file(const std::filesystem::path& path, const ReadOptions& options = {});

void write_conll(std::ostream& out, std::span<const Sentence> sentences);
void write_conll_file(const std::filesystem::path& path, std::span<const Sentence> sentences);

// True iff no two arcs (including arcs from Root at position 0) cross.
// heads[0] is ignored; heads[i] in [0, n] for tokens 1..n.
bool is_projective(std::span<const int> heads);

// True iff every code point of the UTF-8 form is Unicode punctuation (category P).
bool flag_punctuation(std::string_view form);

}  // namespace l2s::conll
