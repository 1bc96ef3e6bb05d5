#ifndef HIERVIS_VERSION_HPP
#define HIERVIS_VERSION_HPP

#include <cstdint>
#include <string>

namespace hiervis {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit, used for the input digests recorded in output metadata.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_VERSION_HPP
