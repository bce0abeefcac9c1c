#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "l2s/hash.hpp"

using l2s::murmur3_32;

TEST_SUITE("hash") {

// Values from the mmh3 Python package (reference MurmurHash3_x86_32).
TEST_CASE("murmur3 matches published vectors") {
  CHECK(murmur3_32(std::string_view(""), 0) == 0u);
  CHECK(murmur3_32(std::string_view(""), 1) == 0x514e28b7u);
  CHECK(murmur3_32(std::string_view(""), 0xffffffffu) == 0x81f16f39u);
  CHECK(murmur3_32(std::string_view("\0\0\0\0", 4), 0) == 0x2362f9deu);
  CHECK(murmur3_32(std::string_view("aaaa"), 0x9747b28cu) == 0x5a97808au);
  CHECK(murmur3_32(std::string_view("Hello, world!"), 0x9747b28cu) == 0x24884cbau);
  CHECK(murmur3_32(std::string_view("The quick brown fox jumps over the lazy dog"), 0x9747b28cu) == 0x2fa826cdu);
  CHECK(murmur3_32(std::string_view("hello"), 0) == 0x248bfa47u);
}

TEST_CASE("integer ids hash as 8 little-endian bytes") {
  CHECK(murmur3_32(std::uint64_t{42}, 7) == 0x5ea94c6cu);
  const char bytes[8] = {42, 0, 0, 0, 0, 0, 0, 0};
  CHECK(murmur3_32(std::uint64_t{42}, 7) == murmur3_32(std::string_view(bytes, 8), 7));
}

TEST_CASE("different seeds give different hashes") {
  std::mt19937_64 rng(11);
  int differ = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t x = rng();
    differ += murmur3_32(x, 1) != murmur3_32(x, 2);
  }
  CHECK(differ >= n * 99 / 100);
}

TEST_CASE("low bits are uniform (chi-square, 1024 buckets)") {
  std::mt19937_64 rng(5);
  const int buckets = 1024;
  const int n = 1000000;
  std::vector<int> count(buckets, 0);
  for (int i = 0; i < n; ++i) ++count[murmur3_32(rng(), 0) & (buckets - 1)];
  const double expected = static_cast<double>(n) / buckets;
  double chi2 = 0;
  for (int c : count) chi2 += (c - expected) * (c - expected) / expected;
  // 1023 degrees of freedom: the p = 0.001 critical value is about 1168.
  CHECK(chi2 < 1168.0);
}

TEST_CASE("combine_index is the FNV multiply-xor") {
  CHECK(l2s::combine_index(0, 5) == 5u);
  CHECK(l2s::combine_index(1, 0) == 16777619u);
  CHECK(l2s::combine_index(3, 1) == ((3u * 16777619u) ^ 1u));
}

}
