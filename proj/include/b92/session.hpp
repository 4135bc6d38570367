#pragma once

// A full B92 session as two parties exchanging PublicMessages: Alice
// drives the raw-key blocks, Bob owns the detector end of the quantum link,
// and both then sift, disclose an error-check sample, compare block
// parities and agree on the alarm verdict.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "b92/bits.hpp"
#include "b92/protocol.hpp"
#include "b92/transport.hpp"
#include "b92/wire.hpp"

namespace b92::session {

// Everything one party learned, filled progressively so an aborted run
// still reports how far it got.
struct PartyOutcome {
  BitString raw_bits;
  BitString hits;
  BitString sifted_key;
  std::size_t sample_size = 0;
  double ber = std::numeric_limits<double>::quiet_NaN();
  double zero_bias = std::numeric_limits<double>::quiet_NaN();
  BitString reconciled_key;
  std::size_t bits_discarded = 0;
  std::size_t blocks_dropped = 0;
  bool alarm = false;
  std::string alarm_reason;
  bool complete = false;
};

void run_alice(const protocol::SessionConfig& cfg, transport::Messenger& channel,
               PartyOutcome& out);

// If the session's Hello has already been read (e.g. by a dispatcher loop),
// pass it in; otherwise run_bob waits for it.
void run_bob(const protocol::SessionConfig& cfg, transport::Messenger& channel,
             protocol::QuantumLink& link, PartyOutcome& out,
             std::optional<wire::PublicMessage> hello = std::nullopt);

struct SessionReport {
  bool aborted = false;
  std::string abort_reason;
  std::size_t pulses = 0;
  BitString sifted_key_alice;
  BitString sifted_key_bob;
  double sifted_fraction = 0.0;
  double ber_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t ber_sample_size = 0;
  double zero_bias = std::numeric_limits<double>::quiet_NaN();
  BitString reconciled_key;
  BitString reconciled_key_bob;
  std::size_t bits_discarded = 0;
  std::size_t blocks_dropped = 0;
  double key_rate_bits_per_pulse = 0.0;
  bool alarm = false;
  std::string alarm_reason;
  // Fraction of sifted bits whose pulse left the source with two or more
  // photons, i.e. bits exposed to a beam-splitting attack.
  double multi_photon_fraction = 0.0;
  std::vector<protocol::RoundLog> logs;
};

// Runs both parties in-process on two threads joined by a loopback channel.
SessionReport run_session(const protocol::SessionConfig& cfg,
                          transport::LoopbackOptions options = {});

// Sifting from the simulation's ground-truth log and Bob's Results message.
struct SiftResult {
  BitString alice_key;
  BitString bob_key;
  std::vector<std::size_t> kept_indices;
};
SiftResult sift(const std::vector<protocol::RoundLog>& logs, const wire::PublicMessage& results);

// Human-readable summary; byte-stable for a given report.
void render_report(std::ostream& os, const protocol::SessionConfig& cfg, const SessionReport& r);

void write_round_logs_csv(std::ostream& os, const std::vector<protocol::RoundLog>& logs);

// Deterministic per-index seed derivation for multi-session runs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace b92::session
