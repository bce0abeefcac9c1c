#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace l2s {

// MurmurHash3 x86_32. Bytes are read little-endian explicitly so results do
// not depend on host byte order.
std::uint32_t murmur3_32(std::span<const std::byte> data, std::uint32_t seed) noexcept;

inline std::uint32_t murmur3_32(std::string_view s, std::uint32_t seed) noexcept {
  return murmur3_32(std::as_bytes(std::span(s.data(), s.size())), seed);
}

// Hash of a 64-bit id, serialized as 8 little-endian bytes.
std::uint32_t murmur3_32(std::uint64_t id, std::uint32_t seed) noexcept;

// FNV prime multiply-xor used to combine feature indices into interactions.
constexpr std::uint32_t kInteractionPrime = 16777619u;

constexpr std::uint32_t combine_index(std::uint32_t a, std::uint32_t b) noexcept {
  return (a * kInteractionPrime) ^ b;
}

}  // namespace l2s
