// Seeded generator for a small English-like projective treebank.
//
// Prepositional phrases after a verb and its object attach either to the
// verb or to the object noun. For "near" and "from" the choice depends on
// the (noun, preposition) pair; for "with" and "on" it is the XOR of a
// (verb, preposition) bit and a (noun, preposition) bit, so only a feature
// conjoining verb, noun and preposition resolves it.

#include <CLI11.hpp>

#include <array>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

struct Word {
  std::string form, cpos, pos;
  int head = 0;  // 1-based, 0 = Root
  std::string rel;
};

const std::vector<std::string> kDet = {"the", "a", "this", "every"};
const std::vector<std::string> kAdj = {"big", "small", "red", "old", "new", "happy"};
const std::vector<std::string> kNoun = {"dog", "cat", "man", "woman", "farmer", "teacher", "ball", "book",
                                        "apple", "letter", "box", "key"};
const std::vector<std::string> kProper = {"John", "Mary", "Anna", "Paris"};
const std::vector<std::string> kPronoun = {"he", "she", "they", "it"};
const std::vector<std::string> kVerb = {"sees", "eats", "finds", "takes", "wants", "likes", "buys", "opens"};
const std::vector<std::string> kModal = {"can", "will", "must"};
const std::vector<std::string> kAdverb = {"quickly", "often", "today"};
const std::vector<std::string> kConj = {"and", "but"};
const std::vector<std::string> kPrep = {"near", "from", "with", "on"};

class Grammar {
 public:
  explicit Grammar(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    for (auto& row : verb_bit_)
      for (auto& b : row) b = g() & 1;
    for (auto& row : noun_bit_)
      for (auto& b : row) b = g() & 1;
  }

  // True when the PP headed by `prep` attaches to the object noun.
  bool noun_attach(std::size_t verb, std::size_t noun, std::size_t prep) const {
    if (prep < 2) return noun_bit_[noun][prep];
    return verb_bit_[verb][prep] != noun_bit_[noun][prep];
  }

 private:
  std::array<std::array<bool, 4>, 8> verb_bit_{};
  std::array<std::array<bool, 4>, 12> noun_bit_{};
};

class Generator {
 public:
  Generator(const Grammar& g, std::uint64_t seed) : grammar_(g), rng_(seed) {}

  std::vector<Word> sentence() {
    words_.clear();
    const int root = clause(0);
    words_[idx(root)].head = 0;
    words_[idx(root)].rel = "ROOT";
    if (coin(0.25)) {
      add(",", "PUNCT", ",", root, "punct");
      add(pick(kConj), "CONJ", "CC", root, "cc");
      const int second = clause(1);
      words_[idx(second)].head = root;
      words_[idx(second)].rel = "conj";
    }
    add(".", "PUNCT", ".", root, "punct");
    return words_;
  }

 private:
  static std::size_t idx(int pos) { return static_cast<std::size_t>(pos - 1); }

  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  const std::string& pick(const std::vector<std::string>& v) { return v[index(v.size())]; }

  int add(const std::string& form, const std::string& cpos, const std::string& pos, int head, const std::string& rel) {
    words_.push_back({form, cpos, pos, head, rel});
    return static_cast<int>(words_.size());
  }
  void attach(int dep, int head, const std::string& rel) {
    words_[idx(dep)].head = head;
    words_[idx(dep)].rel = rel;
  }

  // Common-noun phrase; returns the noun position and its lexical index.
  std::pair<int, std::size_t> common_np() {
    std::vector<int> pre;
    if (coin(0.85)) pre.push_back(add(pick(kDet), "DET", "DT", -1, "det"));
    for (int k = coin(0.35) + coin(0.1); k > 0; --k) pre.push_back(add(pick(kAdj), "ADJ", "JJ", -1, "amod"));
    const std::size_t lex = index(kNoun.size());
    const int n = add(kNoun[lex], "NOUN", "NN", -1, "");
    for (int p : pre) words_[idx(p)].head = n;
    return {n, lex};
  }

  int np(bool allow_pp) {
    if (coin(0.15)) return add(pick(kPronoun), "PRON", "PRP", -1, "");
    if (coin(0.15)) return add(pick(kProper), "PROPN", "NNP", -1, "");
    const int n = common_np().first;
    if (allow_pp && coin(0.2)) pp(n);
    return n;
  }

  int pp(int head) {
    const int p = add(pick(kPrep), "ADP", "IN", head, "prep");
    const int obj = np(false);
    attach(obj, p, "pobj");
    return p;
  }

  // Returns the verb position; its own head is set by the caller.
  int clause(int depth) {
    const int subj = np(true);
    const int aux = coin(0.3) ? add(pick(kModal), "AUX", "MD", -1, "aux") : 0;
    const int pre_adv = coin(0.1) ? add(pick(kAdverb), "ADV", "RB", -1, "advmod") : 0;
    const std::size_t verb_lex = index(kVerb.size());
    const int v = add(kVerb[verb_lex], "VERB", "VBZ", -1, "");
    attach(subj, v, "nsubj");
    if (aux) attach(aux, v, "aux");
    if (pre_adv) attach(pre_adv, v, "advmod");

    if (depth == 0 && coin(0.15)) {
      const int mark = add("that", "SCONJ", "IN", -1, "mark");
      const int inner = clause(1);
      attach(mark, inner, "mark");
      attach(inner, v, "ccomp");
      return v;
    }
    if (coin(0.6)) {
      const auto [obj, noun_lex] = common_np();
      attach(obj, v, "dobj");
      const std::size_t prep = index(kPrep.size());
      const int p = add(kPrep[prep], "ADP", "IN", -1, "prep");
      attach(p, grammar_.noun_attach(verb_lex, noun_lex, prep) ? obj : v, "prep");
      attach(np(false), p, "pobj");
    } else if (coin(0.8)) {
      attach(np(true), v, "dobj");
    }
    if (coin(0.2)) add(pick(kAdverb), "ADV", "RB", v, "advmod");
    return v;
  }

  const Grammar& grammar_;
  std::mt19937_64 rng_;
  std::vector<Word> words_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic projective treebank"};
  std::size_t count = 2000;
  std::uint64_t seed = 1;
  std::uint64_t grammar_seed = 7;
  std::string out_path;
  std::string format = "conll";
  app.add_option("-n,--sentences", count, "Number of sentences");
  app.add_option("--seed", seed, "Sentence sampling seed");
  app.add_option("--grammar-seed", grammar_seed, "Seed of the attachment tables");
  app.add_option("-o,--out", out_path, "Output file (stdout when omitted)");
  app.add_option("--format", format, "conll or tagged")->check(CLI::IsMember({"conll", "tagged"}));
  CLI11_PARSE(app, argc, argv);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "cannot write " << out_path << '\n';
      return 1;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  const Grammar grammar(grammar_seed);
  Generator gen(grammar, seed);
  for (std::size_t s = 0; s < count; ++s) {
    const auto words = gen.sentence();
    for (std::size_t i = 0; i < words.size(); ++i) {
      const Word& w = words[i];
      if (format == "tagged")
        out << w.form << '\t' << w.pos << '\n';
      else
        out << i + 1 << '\t' << w.form << '\t' << w.form << '\t' << w.cpos << '\t' << w.pos << "\t_\t" << w.head
            << '\t' << w.rel << "\t_\t_\n";
    }
    out << '\n';
  }
  return 0;
}
