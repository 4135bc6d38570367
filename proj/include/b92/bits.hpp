#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace b92 {

// One bit per element, values 0 or 1.
using BitString = std::vector<std::uint8_t>;

// Packs bits most-significant first into hex nibbles; the final nibble is
// zero-padded. The bit count is not encoded and travels separately.
std::string bits_to_hex(const BitString& bits);
BitString hex_to_bits(std::string_view hex, std::size_t count);

std::string bits_to_string(const BitString& bits);

std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace b92
