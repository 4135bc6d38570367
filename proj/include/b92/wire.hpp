#pragma once

// Classical-channel messages and their framing. A frame is a 4-byte
// big-endian length followed by one compact JSON object
// {"session_id", "sequence", "kind", "payload"}. Bit lists travel as
// {"n": count, "hex": digits}.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "b92/bits.hpp"

namespace b92::wire {

inline constexpr std::size_t kMaxFrameBytes = 64 * 1024;

enum class Kind {
  Hello,
  Results,
  ErrorCheckIndices,
  ErrorCheckValues,
  Parities,
  DiscardList,
  Done,
  // Simulation hand-off of prepared signals into the modelled fibre; stands
  // in for the optical path and is not part of the public discussion.
  QuantumSignal,
  // One-time-pad ciphertext for the message demo.
  Ciphertext,
};

std::string to_string(Kind k);
Kind parse_kind(std::string_view s);

struct PublicMessage {
  Kind kind = Kind::Hello;
  std::uint64_t session_id = 0;
  std::uint64_t sequence = 0;
  nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json encode_bits(const BitString& bits);
BitString decode_bits(const nlohmann::json& j);

// Results carries Bob's detector verdicts only. Building it from a hit mask
// is the only way to construct one.
nlohmann::json results_payload(const BitString& hits);
BitString results_hits(const PublicMessage& msg);

// Checks the payload keys allowed for each kind; throws EncodingError.
void validate_payload(const PublicMessage& msg);

std::string encode_frame(const PublicMessage& msg);
// Decodes the body of one frame (without the length prefix).
PublicMessage decode_body(std::string_view body);

}  // namespace b92::wire
