#include "l2s/conll.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "l2s/errors.hpp"

namespace l2s::conll {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

void finish_sentence(Sentence& s, std::vector<std::size_t>& lines, std::vector<Sentence>& out) {
  if (s.tokens.empty()) return;
  const auto n = static_cast<int>(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const int h = s.tokens[i].head;
    if (h == kNoHead) continue;
    if (h < 0 || h > n)
      throw ParseError(lines[i], "head " + std::to_string(h) + " out of range for a sentence of " +
                                     std::to_string(n) + " tokens");
  }
  out.push_back(std::move(s));
  s = Sentence{};
  lines.clear();
}

// Decodes one UTF-8 code point; returns false on malformed input.
bool next_code_point(std::string_view s, std::size_t& i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = 0;
  if (b0 < 0x80) {
    cp = b0;
    len = 1;
  } else if ((b0 & 0xe0) == 0xc0) {
    cp = b0 & 0x1f;
    len = 2;
  } else if ((b0 & 0xf0) == 0xe0) {
    cp = b0 & 0x0f;
    len = 3;
  } else if ((b0 & 0xf8) == 0xf0) {
    cp = b0 & 0x07;
    len = 4;
  } else {
    return false;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) return false;
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xc0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3f);
  }
  i += static_cast<std::size_t>(len);
  return true;
}

struct Range {
  char32_t lo, hi;
};

// Unicode general category P (Pc Pd Ps Pe Pi Pf Po) for the Latin-1,
// General Punctuation, CJK and fullwidth blocks.
constexpr Range kPunctuation[] = {
    {0x21, 0x23},     {0x25, 0x2a},     {0x2c, 0x2f},     {0x3a, 0x3b},     {0x3f, 0x40},     {0x5b, 0x5d},
    {0x5f, 0x5f},     {0x7b, 0x7b},     {0x7d, 0x7d},     {0xa1, 0xa1},     {0xa7, 0xa7},     {0xab, 0xab},
    {0xb6, 0xb7},     {0xbb, 0xbb},     {0xbf, 0xbf},     {0x37e, 0x37e},   {0x387, 0x387},   {0x55a, 0x55f},
    {0x589, 0x58a},   {0x5be, 0x5be},   {0x5c0, 0x5c0},   {0x5c3, 0x5c3},   {0x5c6, 0x5c6},   {0x5f3, 0x5f4},
    {0x609, 0x60a},   {0x60c, 0x60d},   {0x61b, 0x61b},   {0x61d, 0x61f},   {0x66a, 0x66d},   {0x6d4, 0x6d4},
    {0x964, 0x965},   {0x970, 0x970},   {0xe4f, 0xe4f},   {0xe5a, 0xe5b},   {0x2010, 0x2027}, {0x2030, 0x2043},
    {0x2045, 0x2051}, {0x2053, 0x205e}, {0x207d, 0x207e}, {0x208d, 0x208e}, {0x2308, 0x230b}, {0x2329, 0x232a},
    {0x2768, 0x2775}, {0x27c5, 0x27c6}, {0x27e6, 0x27ef}, {0x2983, 0x2998}, {0x29d8, 0x29db}, {0x29fc, 0x29fd},
    {0x2e00, 0x2e2e}, {0x2e30, 0x2e4f}, {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301f}, {0x3030, 0x3030},
    {0x303d, 0x303d}, {0x30a0, 0x30a0}, {0x30fb, 0x30fb}, {0xfe10, 0xfe19}, {0xfe30, 0xfe52}, {0xfe54, 0xfe61},
    {0xfe63, 0xfe63}, {0xfe68, 0xfe68}, {0xfe6a, 0xfe6b}, {0xff01, 0xff03}, {0xff05, 0xff0a}, {0xff0c, 0xff0f},
    {0xff1a, 0xff1b}, {0xff1f, 0xff20}, {0xff3b, 0xff3d}, {0xff3f, 0xff3f}, {0xff5b, 0xff5b}, {0xff5d, 0xff5d},
    {0xff5f, 0xff65},
};

bool is_punctuation(char32_t cp) {
  for (const Range& r : kPunctuation)
    if (cp >= r.lo && cp <= r.hi) return true;
  return false;
}

}  // namespace

std::vector<int> Sentence::heads() const {
  std::vector<int> h(tokens.size() + 1, kNoHead);
  for (std::size_t i = 0; i < tokens.size(); ++i) h[i + 1] = tokens[i].head;
  return h;
}

bool Sentence::has_gold_heads() const noexcept {
  for (const Token& t : tokens)
    if (t.head == kNoHead) return false;
  return true;
}

std::vector<Sentence> read_conll(std::istream& in, const ReadOptions& options) {
  std::vector<Sentence> out;
  Sentence current;
  std::vector<std::size_t> lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) {
      finish_sentence(current, lines, out);
      continue;
    }
    if (line.front() == '#' && current.tokens.empty()) continue;

    const auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    long id = 0;
    if (!parse_int(cols[0], id) || id <= 0) throw ParseError(line_no, "malformed token id '" + std::string(cols[0]) + "'");
    const auto expected = static_cast<long>(current.tokens.size()) + 1;
    if (id != expected) {
      if (id < expected) throw ParseError(line_no, "duplicate token position " + std::to_string(id));
      throw ParseError(line_no, "token position " + std::to_string(id) + " out of sequence, expected " +
                                    std::to_string(expected));
    }
    if (current.tokens.empty()) current.first_line = line_no;

    Token tok;
    tok.position = static_cast<std::uint32_t>(id);
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.cpostag = cols[3];
    tok.postag = cols[4];
    tok.feats = cols[5];
    if (cols[6] == "_") {
      if (!options.allow_missing_heads) throw ParseError(line_no, "missing head");
      tok.head = kNoHead;
    } else {
      long head = 0;
      if (!parse_int(cols[6], head)) throw ParseError(line_no, "non-integer head '" + std::string(cols[6]) + "'");
      if (head < 0) throw ParseError(line_no, "negative head " + std::to_string(head));
      if (head == id) throw ParseError(line_no, "token " + std::to_string(id) + " is its own head");
      if (head > 100000) throw ParseError(line_no, "head " + std::to_string(head) + " out of range");
      tok.head = static_cast<int>(head);
    }
    tok.deprel = cols[7];
    tok.phead = cols[8];
    tok.pdeprel = cols[9];
    tok.punct = flag_punctuation(tok.form);
    current.tokens.push_back(std::move(tok));
    lines.push_back(line_no);
  }
  finish_sentence(current, lines, out);
  return out;
}

std::vector<Sentence> read_conll_file(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return read_conll(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path.string());
  }
}

void write_conll(std::ostream& out, std::span<const Sentence> sentences) {
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      out << t.position << '\t' << t.form << '\t' << t.lemma << '\t' << t.cpostag << '\t' << t.postag << '\t'
          << t.feats << '\t';
      if (t.head == kNoHead)
        out << '_';
      else
        out << t.head;
      out << '\t' << t.deprel << '\t' << t.phead << '\t' << t.pdeprel << '\n';
    }
    out << '\n';
  }
}

void write_conll_file(const std::filesystem::path& path, std::span<const Sentence> sentences) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_conll(out, sentences);
}

bool is_projective(std::span<const int> heads) {
  struct Arc {
    int lo, hi;
  };
  std::vector<Arc> arcs;
  for (std::size_t d = 1; d < heads.size(); ++d) {
    if (heads[d] < 0) continue;
    const int a = heads[d];
    const int b = static_cast<int>(d);
    arcs.push_back({std::min(a, b), std::max(a, b)});
  }
  for (std::size_t i = 0; i < arcs.size(); ++i)
    for (std::size_t j = 0; j < arcs.size(); ++j) {
      const Arc& x = arcs[i];
      const Arc& y = arcs[j];
      if (x.lo < y.lo && y.lo < x.hi && x.hi < y.hi) return false;
    }
  return true;
}

bool flag_punctuation(std::string_view form) {
  if (form.empty()) return false;
  std::size_t i = 0;
  while (i < form.size()) {
    char32_t cp = 0;
    if (!next_code_point(form, i, cp)) return false;
    if (!is_punctuation(cp)) return false;
  }
  return true;
}

}  // namespace l2s::conll
