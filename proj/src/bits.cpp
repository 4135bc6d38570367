#include "b92/bits.hpp"

#include "b92/error.hpp"

namespace b92 {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string bits_to_hex(const BitString& bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out((bits.size() + 3) / 4, '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) {
      const auto nibble = static_cast<std::size_t>(hex_value(out[i / 4]));
      out[i / 4] = kDigits[nibble | (8u >> (i % 4))];
    }
  }
  return out;
}

BitString hex_to_bits(std::string_view hex, std::size_t count) {
  if (hex.size() != (count + 3) / 4) {
    throw EncodingError("hex bit list has " + std::to_string(hex.size()) +
                        " digits, expected " + std::to_string((count + 3) / 4));
  }
  BitString bits(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int v = hex_value(hex[i / 4]);
    if (v < 0) throw EncodingError("invalid hex digit in bit list");
    bits[i] = static_cast<std::uint8_t>((v >> (3 - i % 4)) & 1);
  }
  return bits;
}

std::string bits_to_string(const BitString& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw ProtocolDesyncError("bit strings differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

}  // namespace b92
