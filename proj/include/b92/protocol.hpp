#pragma once

// B92 protocol primitives: preparation and measurement tables, the
// intercept-resend eavesdropper, the simulated quantum channel between
// Alice's source and Bob's detector, sifting, error and bias estimation,
// block-parity reconciliation and the analytic key-rate budget.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "b92/bits.hpp"
#include "b92/hardware.hpp"
#include "b92/qstate.hpp"
#include "b92/random.hpp"

namespace b92::protocol {

enum class Mode { Ideal, Physical };

// FixedProjection: Eve projects every signal onto P|up>, records "0" on
// Pass and "1" on Fail, and forwards the collapsed state.
enum class EveStrategy { None, FixedProjection };

struct SessionConfig {
  std::size_t bits_per_block = 1024;
  std::size_t blocks = 16;
  std::uint64_t seed_alice = 1;
  std::uint64_t seed_bob = 2;
  std::uint64_t seed_physics = 3;
  std::uint64_t session_id = 1;
  Mode mode = Mode::Ideal;
  EveStrategy eve = EveStrategy::None;
  hardware::HardwareProfile hardware;
  double error_sample_fraction = 0.25;
  std::size_t reconcile_block_size = 8;
  double alarm_ber_threshold = 0.05;
  double alarm_bias_threshold = 0.05;

  std::size_t total_pulses() const { return bits_per_block * blocks; }
  void validate() const;
};

std::string to_string(Mode m);
std::string to_string(EveStrategy e);
Mode parse_mode(const std::string& s);
EveStrategy parse_eve(const std::string& s);

// Simulation ground truth for one pulse. Neither party's code reads it.
struct RoundLog {
  std::size_t index = 0;
  std::uint8_t alice_bit = 0;
  std::uint8_t bob_bit = 0;
  unsigned photon_count = 0;
  std::optional<std::uint8_t> eve_guess;
  bool hit = false;
};

BitString generate_bits(std::size_t n, RandomStream& rng);

qstate::StateVector alice_prepare(std::uint8_t bit);
qstate::Projector bob_projector(std::uint8_t bit);

struct Interception {
  std::optional<std::uint8_t> guess;
  qstate::StateVector forwarded;
};

Interception eve_intercept(const qstate::StateVector& state, EveStrategy strategy,
                           RandomStream& rng);

// What happens to one signal between Alice's source and Bob's detector.
struct RoundOutcome {
  bool hit = false;
  unsigned photon_count = 0;
  std::optional<std::uint8_t> eve_guess;
};

RoundOutcome transmit_round(const qstate::StateVector& prepared, std::uint8_t bob_bit,
                            const SessionConfig& cfg, hardware::DetectorState& detector,
                            double now, RandomStream& rng);

RoundOutcome transmit_round(std::uint8_t alice_bit, std::uint8_t bob_bit, const SessionConfig& cfg,
                            hardware::DetectorState& detector, double now, RandomStream& rng);

// The fibre, any eavesdropper on it and Bob's detector, driven by the
// physics seed. Bob feeds it the states arriving from Alice together with
// his own measurement choice and reads back only the detector verdict.
class QuantumLink {
 public:
  QuantumLink(const SessionConfig& cfg, std::uint64_t seed);

  bool receive(const qstate::StateVector& prepared, std::uint8_t bob_bit);

  const std::vector<RoundOutcome>& history() const { return history_; }

 private:
  SessionConfig cfg_;
  RandomStream rng_;
  hardware::DetectorState detector_;
  std::vector<RoundOutcome> history_;
};

struct SiftedKey {
  BitString key;
  std::vector<std::size_t> kept_indices;
};

// One party's view: keep own bits at the hit positions.
SiftedKey sift(const BitString& own_bits, const BitString& hits);

// Random disclosure mask selecting round(fraction * n) positions.
BitString choose_sample_mask(std::size_t n, double fraction, RandomStream& rng);

BitString select(const BitString& key, const BitString& mask);
BitString remove(const BitString& key, const BitString& mask);

struct BerEstimate {
  double ber = 0.0;
  std::size_t sample_size = 0;
  BitString alice_key;
  BitString bob_key;
};

BerEstimate estimate_ber(const BitString& alice_key, const BitString& bob_key, double fraction,
                         RandomStream& rng);

double zero_bias(const BitString& key);

// Parity of each consecutive block of block_size bits; a trailing partial
// block is its own block.
BitString block_parities(const BitString& key, std::size_t block_size);

struct PartyReconciliation {
  BitString key;
  BitString dropped_blocks;  // one flag per block
  std::size_t bits_discarded = 0;
};

// Drops every block whose parities disagree and removes the last bit of
// every surviving block to cancel the disclosed parity.
PartyReconciliation apply_block_parity(const BitString& key, const BitString& own_parities,
                                       const BitString& peer_parities, std::size_t block_size);

struct Reconciliation {
  BitString alice_key;
  BitString bob_key;
  std::size_t bits_discarded = 0;
  std::size_t blocks_dropped = 0;
};

Reconciliation reconcile_block_parity(const BitString& alice_key, const BitString& bob_key,
                                      std::size_t block_size);

struct KeyRatePrediction {
  double source_factor = 0.0;    // mean photons per pulse, or 1 for an ideal source
  double transmission = 0.0;
  double protocol_factor = 1.0 / 16.0;
  double efficiency = 0.0;
  double bits_per_pulse = 0.0;
  double bits_per_second = 0.0;
};

KeyRatePrediction predict_key_rate(const SessionConfig& cfg);

// Closed-form sifted rate and BER of a physical-mode link without an
// eavesdropper: Poisson photon numbers thinned by fibre, optics and
// detector, plus dark counts. Afterpulsing is not included.
struct LinkBudget {
  double transmission = 0.0;
  double sifted_bits_per_pulse = 0.0;
  double ber = 0.0;
};

LinkBudget analytic_link_budget(const SessionConfig& cfg);

}  // namespace b92::protocol
