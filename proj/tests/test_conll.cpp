#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "l2s/conll.hpp"
#include "l2s/errors.hpp"
#include "test_util.hpp"

using namespace l2s;
using namespace l2s::conll;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t error_line(const std::string& text, ReadOptions opts = {}) {
  std::istringstream in(text);
  try {
    read_conll(in, opts);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

// Every word strictly between a head and its dependent descends from the head.
bool projective_by_dominance(const std::vector<int>& h) {
  const int n = static_cast<int>(h.size()) - 1;
  auto dominates = [&](int anc, int w) {
    for (int cur = w, steps = 0; cur != -1 && steps <= n + 1; cur = cur == 0 ? -1 : h[static_cast<std::size_t>(cur)], ++steps)
      if (cur == anc) return true;
    return false;
  };
  for (int d = 1; d <= n; ++d) {
    const int hd = h[static_cast<std::size_t>(d)];
    for (int w = std::min(hd, d) + 1; w < std::max(hd, d); ++w)
      if (!dominates(hd, w)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("conll") {

TEST_CASE("two-token block") {
  std::istringstream in("1\tDogs\tdog\tNOUN\tNNS\t_\t2\tnsubj\t_\t_\n2\tbark\tbark\tVERB\tVBP\t_\t0\tROOT\t_\t_\n");
  const auto s = read_conll(in);
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].size() == 2);
  CHECK(s[0].tokens[0].form == "Dogs");
  CHECK(s[0].tokens[0].head == 2);
  CHECK(s[0].tokens[0].deprel == "nsubj");
  CHECK(s[0].tokens[0].pos(PosColumn::Coarse) == "NOUN");
  CHECK(s[0].tokens[0].pos(PosColumn::Fine) == "NNS");
  CHECK(s[0].tokens[1].head == 0);
  CHECK(s[0].heads() == std::vector<int>{-1, 2, 0});
  CHECK(s[0].first_line == 1);
}

TEST_CASE("malformed input names the offending line") {
  const std::string good = "1\ta\ta\tX\tX\t_\t0\tROOT\t_\t_\n";
  CHECK(error_line(good + "\n1\tb\tb\tX\tX\t_\t7\tdep\t_\t_\n") == 3);
  CHECK(error_line(good + "2\tb\tb\tX\tX\t_\t1\n") == 2);
  CHECK(error_line(good + "3\tb\tb\tX\tX\t_\t1\tdep\t_\t_\n") == 2);
  CHECK(error_line(good + "1\tb\tb\tX\tX\t_\t1\tdep\t_\t_\n") == 2);
  CHECK(error_line(good + "2\tb\tb\tX\tX\t_\tx\tdep\t_\t_\n") == 2);
  CHECK(error_line(good + "2\tb\tb\tX\tX\t_\t2\tdep\t_\t_\n") == 2);
  CHECK(error_line(good + "2\tb\tb\tX\tX\t_\t-1\tdep\t_\t_\n") == 2);
  CHECK(error_line("\n\n" + good + "2\tb\tb\tX\tX\t_\t_\tdep\t_\t_\n") == 4);
  ReadOptions lax;
  lax.allow_missing_heads = true;
  CHECK(error_line(good + "2\tb\tb\tX\tX\t_\t_\tdep\t_\t_\n", lax) == 0);
  std::istringstream in(good + "2\tb\tb\tX\tX\t_\t9\tdep\t_\t_\n");
  try {
    read_conll(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("empty input and blank-line runs") {
  std::istringstream empty("");
  CHECK(read_conll(empty).empty());
  std::istringstream blanks("\n\n  \n");
  CHECK(read_conll(blanks).empty());
  std::istringstream spaced("\n\n1\ta\ta\tX\tX\t_\t0\tROOT\t_\t_\n\n\n\n1\tb\tb\tX\tX\t_\t0\tROOT\t_\t_\n");
  const auto s = read_conll(spaced);
  CHECK(s.size() == 2);
  CHECK(s[1].first_line == 7);
}

TEST_CASE("missing file is a configuration error") {
  CHECK_THROWS_AS(read_conll_file("/nonexistent/none.conll"), ConfigError);
}

TEST_CASE("golden file round trips byte for byte") {
  const std::filesystem::path golden = std::filesystem::path(L2S_TEST_DATA) / "golden.conll";
  const auto sentences = read_conll_file(golden);
  REQUIRE(sentences.size() == 3);
  CHECK(sentences[1].tokens[5].form == "\xe2\x80\xa6");
  std::ostringstream out;
  write_conll(out, sentences);
  CHECK(out.str() == slurp(golden));
  std::istringstream again(out.str());
  const auto back = read_conll(again);
  REQUIRE(back.size() == sentences.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].heads() == sentences[i].heads());
}

TEST_CASE("golden file: several Root children and punctuation flags") {
  const auto s = read_conll_file(std::filesystem::path(L2S_TEST_DATA) / "golden.conll");
  int roots = 0;
  for (const auto& t : s[1].tokens) roots += t.head == 0;
  CHECK(roots == 2);
  CHECK(is_projective(s[1].heads()));
  CHECK(s[0].tokens[3].punct);
  CHECK(s[1].tokens[2].punct);
  CHECK_FALSE(s[1].tokens[4].punct);
  CHECK(s[1].tokens[5].punct);
  CHECK(s[2].tokens[2].punct);
  CHECK_FALSE(s[2].tokens[0].punct);
}

TEST_CASE("projectivity examples") {
  CHECK(is_projective(std::vector<int>{-1, 0}));
  CHECK(is_projective(testutil::flying_planes_heads()));
  CHECK(is_projective(std::vector<int>{-1, 2, 0, 2}));
  CHECK_FALSE(is_projective(std::vector<int>{-1, 3, 4, 0, 3}));
  // Arc from Root over a word attached outside its span.
  CHECK_FALSE(is_projective(std::vector<int>{-1, 3, 0, 2}));
}

TEST_CASE("projectivity agrees with the dominance definition on random trees") {
  std::mt19937_64 rng(5);
  int projective = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto h = testutil::random_tree(static_cast<std::uint32_t>(1 + rng() % 8), rng);
    const bool expected = projective_by_dominance(h);
    CHECK(is_projective(h) == expected);
    projective += expected;
  }
  CHECK(projective > 100);
  CHECK(projective < 1000);
}

TEST_CASE("punctuation predicate") {
  CHECK(flag_punctuation("."));
  CHECK(flag_punctuation(",,"));
  CHECK(flag_punctuation("--"));
  CHECK(flag_punctuation("\xe2\x80\x9c"));   // left double quotation mark
  CHECK(flag_punctuation("\xe3\x80\x82"));   // ideographic full stop
  CHECK(flag_punctuation("\xc2\xbf"));       // inverted question mark
  CHECK_FALSE(flag_punctuation(""));
  CHECK_FALSE(flag_punctuation("a."));
  CHECK_FALSE(flag_punctuation("$"));        // currency symbol, not P
  CHECK_FALSE(flag_punctuation("+"));        // math symbol
  CHECK_FALSE(flag_punctuation("`"));        // modifier symbol
  CHECK_FALSE(flag_punctuation("\xff"));     // malformed UTF-8
}

}
