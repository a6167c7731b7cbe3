#include "lexfuse/hash.hpp"

#include <array>

namespace lexfuse {

Fingerprint& Fingerprint::add(std::string_view field) {
  add(static_cast<std::uint64_t>(field.size()));
  state_ = fnv1a64(field, state_);
  return *this;
}

Fingerprint& Fingerprint::add(std::uint64_t value) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  state_ = fnv1a64(std::string_view(bytes.data(), bytes.size()), state_);
  return *this;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace lexfuse
