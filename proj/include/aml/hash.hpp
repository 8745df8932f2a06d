#pragma once

#include <cstdint>
#include <string_view>

namespace aml {

/// 64-bit FNV-1a. Used for subgraph fingerprints; the constants are part of
/// the on-disk contract and must not change.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace aml
