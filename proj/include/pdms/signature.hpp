#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace pdms {

/// 160-bit content digest used as the network-wide identity of mapping rules
/// and schema mappings.
struct Signature {
  std::array<std::uint8_t, 20> digest{};

  static Signature of(std::string_view text);
  static Signature from_hex(std::string_view hex);

  std::string hex() const;
  std::string short_hex() const { return hex().substr(0, 10); }

  friend auto operator<=>(const Signature &, const Signature &) = default;
};

struct SignatureHash {
  std::size_t operator()(const Signature &s) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i)
      h = (h << 8) | s.digest[i];
    return h;
  }
};

} // namespace pdms
