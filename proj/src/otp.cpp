#include "b92/otp.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "b92/error.hpp"

namespace b92::otp {

namespace {

void check_base(Symbol base) {
  if (base < 2) throw ConfigError("alphabet size must be >= 2");
}

void check_symbols(const std::vector<Symbol>& symbols, Symbol base) {
  for (Symbol s : symbols) {
    if (s >= base) throw EncodingError("symbol " + std::to_string(s) + " outside base " + std::to_string(base));
  }
}

unsigned word_bits(Symbol base) {
  unsigned b = 0;
  while ((Symbol{1} << b) < base) ++b;
  return b;
}

unsigned hex_width(Symbol base) { return (word_bits(base) + 3) / 4; }

}  // namespace

Message::Message(std::vector<Symbol> symbols, Symbol base) : symbols_(std::move(symbols)), base_(base) {
  check_base(base_);
  check_symbols(symbols_, base_);
}

Pad::Pad(std::vector<Symbol> symbols, Symbol base, std::size_t consumed)
    : symbols_(std::move(symbols)), base_(base), consumed_(consumed) {
  check_base(base_);
  check_symbols(symbols_, base_);
  if (consumed_ > symbols_.size()) throw ConfigError("pad cursor beyond pad length");
}

std::vector<Symbol> Pad::take(std::size_t n) {
  if (n > remaining()) {
    throw PadDepletedError("pad has " + std::to_string(remaining()) + " unused symbols, " +
                           std::to_string(n) + " requested");
  }
  std::vector<Symbol> out(symbols_.begin() + static_cast<std::ptrdiff_t>(consumed_),
                          symbols_.begin() + static_cast<std::ptrdiff_t>(consumed_ + n));
  consumed_ += n;
  return out;
}

void Pad::save(std::ostream& os) const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const nlohmann::json header{{"base", base_}, {"length", symbols_.size()}, {"consumed", consumed_}};
  os << header.dump() << '\n';
  const unsigned width = hex_width(base_);
  std::string line;
  for (Symbol s : symbols_) {
    for (unsigned d = width; d-- > 0;) line.push_back(kDigits[(s >> (4 * d)) & 0xf]);
    if (line.size() >= 64) {
      os << line << '\n';
      line.clear();
    }
  }
  if (!line.empty()) os << line << '\n';
}

Pad Pad::load(std::istream& is) {
  std::string header_line;
  if (!std::getline(is, header_line)) throw EncodingError("pad file is empty");
  nlohmann::json header;
  Symbol base = 0;
  std::size_t length = 0;
  std::size_t consumed = 0;
  try {
    header = nlohmann::json::parse(header_line);
    base = header.at("base").get<Symbol>();
    length = header.at("length").get<std::size_t>();
    consumed = header.at("consumed").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw EncodingError(std::string("malformed pad header: ") + e.what());
  }
  check_base(base);
  std::string digits;
  for (std::string line; std::getline(is, line);) {
    for (char c : line) {
      if (c != '\r' && c != ' ') digits.push_back(c);
    }
  }
  const unsigned width = hex_width(base);
  if (digits.size() != length * width) throw EncodingError("pad body length does not match header");
  std::vector<Symbol> symbols(length);
  for (std::size_t i = 0; i < length; ++i) {
    Symbol v = 0;
    for (unsigned d = 0; d < width; ++d) {
      const char c = digits[i * width + d];
      int nib;
      if (c >= '0' && c <= '9') nib = c - '0';
      else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
      else throw EncodingError("invalid hex digit in pad body");
      v = (v << 4) | static_cast<Symbol>(nib);
    }
    symbols[i] = v;
  }
  return Pad(std::move(symbols), base, consumed);
}

void Pad::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write pad file " + path.string());
  save(os);
}

Pad Pad::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open pad file " + path.string());
  return load(is);
}

Message encrypt(const Message& plaintext, Pad& pad) {
  if (plaintext.base() != pad.base()) throw ConfigError("message and pad bases differ");
  const auto key = pad.take(plaintext.size());
  const Symbol n = pad.base();
  std::vector<Symbol> c(plaintext.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = static_cast<Symbol>((std::uint64_t{plaintext.symbols()[i]} + key[i]) % n);
  }
  return Message(std::move(c), n);
}

Message decrypt(const Message& ciphertext, Pad& pad) {
  if (ciphertext.base() != pad.base()) throw ConfigError("message and pad bases differ");
  const auto key = pad.take(ciphertext.size());
  const Symbol n = pad.base();
  std::vector<Symbol> p(ciphertext.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<Symbol>((std::uint64_t{ciphertext.symbols()[i]} + n - key[i]) % n);
  }
  return Message(std::move(p), n);
}

Message ascii_encode(std::string_view text) {
  std::vector<Symbol> bits;
  bits.reserve(text.size() * 8);
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x20 || c > 0x7e) {
      throw EncodingError("character code " + std::to_string(c) + " is not printable ASCII");
    }
    for (int b = 7; b >= 0; --b) bits.push_back((c >> b) & 1u);
  }
  return Message(std::move(bits), 2);
}

std::string ascii_decode(const Message& bits) {
  if (bits.base() != 2) throw EncodingError("ASCII decoding needs a base-2 message");
  if (bits.size() % 8 != 0) throw EncodingError("bit count is not a multiple of 8");
  std::string text;
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    unsigned c = 0;
    for (std::size_t b = 0; b < 8; ++b) c = (c << 1) | bits.symbols()[i + b];
    text.push_back(static_cast<char>(c));
  }
  return text;
}

Message letters_encode(std::string_view text) {
  std::vector<Symbol> s;
  for (char c : text) {
    if (c < 'A' || c > 'Z') throw EncodingError(std::string("not an upper-case letter: '") + c + "'");
    s.push_back(static_cast<Symbol>(c - 'A'));
  }
  return Message(std::move(s), 26);
}

std::string letters_decode(const Message& m) {
  if (m.base() != 26) throw EncodingError("letter decoding needs a base-26 message");
  std::string text;
  for (Symbol s : m.symbols()) text.push_back(static_cast<char>('A' + s));
  return text;
}

Pad pad_from_key(const BitString& bits, Symbol base, std::size_t symbols) {
  check_base(base);
  const unsigned w = word_bits(base);
  std::vector<Symbol> out;
  out.reserve(symbols);
  std::size_t pos = 0;
  while (out.size() < symbols) {
    if (pos + w > bits.size()) {
      throw PadDepletedError("key of " + std::to_string(bits.size()) + " bits yields only " +
                             std::to_string(out.size()) + " of " + std::to_string(symbols) +
                             " pad symbols");
    }
    Symbol v = 0;
    for (unsigned b = 0; b < w; ++b) v = (v << 1) | bits[pos + b];
    pos += w;
    if (v < base) out.push_back(v);
  }
  return Pad(std::move(out), base);
}

Pad pad_from_key(const BitString& bits, Symbol base) {
  check_base(base);
  const unsigned w = word_bits(base);
  std::vector<Symbol> out;
  for (std::size_t pos = 0; pos + w <= bits.size(); pos += w) {
    Symbol v = 0;
    for (unsigned b = 0; b < w; ++b) v = (v << 1) | bits[pos + b];
    if (v < base) out.push_back(v);
  }
  return Pad(std::move(out), base);
}

}  // namespace b92::otp
