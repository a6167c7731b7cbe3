#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lexfuse {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// FNV-1a over raw bytes, continuing from `state`.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Seeded 64-bit token hash: FNV-1a seeded by xoring the seed into the offset
// basis, then avalanched so both the low bits and bit 63 are well mixed.
constexpr std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed) {
  return mix64(fnv1a64(bytes, kFnvOffset ^ seed));
}

// Incremental fingerprint builder. Each field is length-prefixed so that
// ("ab","c") and ("a","bc") hash differently.
class Fingerprint {
 public:
  Fingerprint& add(std::string_view field);
  Fingerprint& add(std::uint64_t value);
  std::uint64_t value() const { return mix64(state_); }

 private:
  std::uint64_t state_ = kFnvOffset;
};

std::string hex64(std::uint64_t v);

}  // namespace lexfuse
