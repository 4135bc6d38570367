#pragma once

// One-time pad over an arbitrary alphabet size with a consumption cursor
// that makes pad reuse impossible, plus the ASCII bit path used by the
// message demo.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "b92/bits.hpp"

namespace b92::otp {

using Symbol = std::uint32_t;

class Message {
 public:
  Message(std::vector<Symbol> symbols, Symbol base);

  const std::vector<Symbol>& symbols() const { return symbols_; }
  Symbol base() const { return base_; }
  std::size_t size() const { return symbols_.size(); }

  friend bool operator==(const Message&, const Message&) = default;

 private:
  std::vector<Symbol> symbols_;
  Symbol base_;
};

class Pad {
 public:
  Pad(std::vector<Symbol> symbols, Symbol base, std::size_t consumed = 0);

  // Move-only: a copy would be a second cursor over the same symbols.
  Pad(const Pad&) = delete;
  Pad& operator=(const Pad&) = delete;
  Pad(Pad&&) noexcept = default;
  Pad& operator=(Pad&&) noexcept = default;

  Symbol base() const { return base_; }
  std::size_t size() const { return symbols_.size(); }
  std::size_t consumed() const { return consumed_; }
  std::size_t remaining() const { return symbols_.size() - consumed_; }

  // Hands out the next n unused symbols and advances the cursor past them.
  std::vector<Symbol> take(std::size_t n);

  // Serialises to a JSON header line {"base", "length", "consumed"}
  // followed by fixed-width lowercase hex symbols, 64 characters per line.
  void save(std::ostream& os) const;
  static Pad load(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static Pad load(const std::filesystem::path& path);

 private:
  std::vector<Symbol> symbols_;
  Symbol base_;
  std::size_t consumed_;
};

// c_i = (p_i + k_i) mod N with the pad's next unused symbols.
Message encrypt(const Message& plaintext, Pad& pad);
// p_i = (c_i - k_i) mod N.
Message decrypt(const Message& ciphertext, Pad& pad);

// Eight bits per character, most significant first. Accepts printable
// 7-bit ASCII only.
Message ascii_encode(std::string_view text);
std::string ascii_decode(const Message& bits);

// Letters A..Z <-> 0..25.
Message letters_encode(std::string_view text);
std::string letters_decode(const Message& m);

// Base 2 takes key bits one-for-one. Larger bases read ceil(log2 N)-bit
// words and reject words >= N.
Pad pad_from_key(const BitString& bits, Symbol base, std::size_t symbols);
Pad pad_from_key(const BitString& bits, Symbol base);

}  // namespace b92::otp
