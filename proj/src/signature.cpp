#include "pdms/signature.hpp"

#include "pdms/errors.hpp"

#include <openssl/sha.h>

namespace pdms {

Signature Signature::of(std::string_view text) {
  Signature s;
  SHA1(reinterpret_cast<const unsigned char *>(text.data()), text.size(),
       s.digest.data());
  return s;
}

std::string Signature::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(40);
  for (auto b : digest) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Signature Signature::from_hex(std::string_view hex) {
  if (hex.size() != 40)
    throw ParseError("signature must be 40 hex digits");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    throw ParseError(std::string("bad hex digit '") + c + "'");
  };
  Signature s;
  for (std::size_t i = 0; i < 20; ++i)
    s.digest[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                            nibble(hex[2 * i + 1]));
  return s;
}

} // namespace pdms
