#include "b92/wire.hpp"

#include <array>
#include <set>

#include "b92/error.hpp"

namespace b92::wire {

namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 9> kKindNames{{
    {Kind::Hello, "Hello"},
    {Kind::Results, "Results"},
    {Kind::ErrorCheckIndices, "ErrorCheckIndices"},
    {Kind::ErrorCheckValues, "ErrorCheckValues"},
    {Kind::Parities, "Parities"},
    {Kind::DiscardList, "DiscardList"},
    {Kind::Done, "Done"},
    {Kind::QuantumSignal, "QuantumSignal"},
    {Kind::Ciphertext, "Ciphertext"},
}};

const std::set<std::string>& allowed_keys(Kind k) {
  static const std::set<std::string> bits_only{"bits"};
  static const std::set<std::string> hello{"bits_per_block", "blocks", "error_sample_fraction",
                                           "reconcile_block_size", "mode"};
  static const std::set<std::string> results{"hits"};
  static const std::set<std::string> done{"ber", "zero_bias", "alarm"};
  static const std::set<std::string> quantum{"block", "states"};
  static const std::set<std::string> cipher{"base", "symbols"};
  switch (k) {
    case Kind::Hello: return hello;
    case Kind::Results: return results;
    case Kind::Done: return done;
    case Kind::QuantumSignal: return quantum;
    case Kind::Ciphertext: return cipher;
    default: return bits_only;
  }
}

}  // namespace

std::string to_string(Kind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return std::string(name);
  }
  return "?";
}

Kind parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  throw EncodingError("unknown message kind '" + std::string(s) + "'");
}

nlohmann::json encode_bits(const BitString& bits) {
  return {{"n", bits.size()}, {"hex", bits_to_hex(bits)}};
}

BitString decode_bits(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("hex") || !j["n"].is_number_unsigned() ||
      !j["hex"].is_string()) {
    throw EncodingError("malformed bit list");
  }
  return hex_to_bits(j["hex"].get<std::string>(), j["n"].get<std::size_t>());
}

nlohmann::json results_payload(const BitString& hits) { return {{"hits", encode_bits(hits)}}; }

BitString results_hits(const PublicMessage& msg) {
  if (msg.kind != Kind::Results) throw ProtocolDesyncError("expected a Results message");
  validate_payload(msg);
  return decode_bits(msg.payload.at("hits"));
}

void validate_payload(const PublicMessage& msg) {
  if (!msg.payload.is_object()) throw EncodingError("payload must be an object");
  const auto& allowed = allowed_keys(msg.kind);
  for (const auto& [key, value] : msg.payload.items()) {
    if (!allowed.count(key)) {
      throw EncodingError("field '" + key + "' is not allowed in a " + to_string(msg.kind) +
                          " message");
    }
  }
}

std::string encode_frame(const PublicMessage& msg) {
  validate_payload(msg);
  const nlohmann::json j{{"session_id", msg.session_id},
                         {"sequence", msg.sequence},
                         {"kind", to_string(msg.kind)},
                         {"payload", msg.payload}};
  const std::string body = j.dump();
  if (body.size() + 4 > kMaxFrameBytes) {
    throw EncodingError("frame of " + std::to_string(body.size() + 4) + " bytes exceeds 64 KiB");
  }
  std::string frame(4, '\0');
  const auto n = static_cast<std::uint32_t>(body.size());
  frame[0] = static_cast<char>((n >> 24) & 0xff);
  frame[1] = static_cast<char>((n >> 16) & 0xff);
  frame[2] = static_cast<char>((n >> 8) & 0xff);
  frame[3] = static_cast<char>(n & 0xff);
  return frame + body;
}

PublicMessage decode_body(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw EncodingError(std::string("frame is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("session_id") || !j.contains("sequence") ||
      !j.contains("kind") || !j.contains("payload")) {
    throw EncodingError("frame lacks required fields");
  }
  PublicMessage m;
  try {
    m.session_id = j["session_id"].get<std::uint64_t>();
    m.sequence = j["sequence"].get<std::uint64_t>();
    m.kind = parse_kind(j["kind"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw EncodingError(std::string("malformed frame header: ") + e.what());
  }
  m.payload = std::move(j["payload"]);
  validate_payload(m);
  return m;
}

}  // namespace b92::wire
