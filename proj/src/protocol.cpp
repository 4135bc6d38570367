#include "b92/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "b92/error.hpp"
#include "b92/photonics.hpp"

namespace b92::protocol {

void SessionConfig::validate() const {
  if (bits_per_block == 0) throw ConfigError("bits_per_block must be positive");
  if (blocks == 0) throw ConfigError("blocks must be positive");
  if (!(error_sample_fraction > 0.0 && error_sample_fraction < 1.0)) {
    throw ConfigError("error_sample_fraction must lie in (0, 1)");
  }
  if (reconcile_block_size < 2) throw ConfigError("reconcile_block_size must be >= 2");
  if (!(alarm_ber_threshold > 0.0 && alarm_ber_threshold < 1.0)) {
    throw ConfigError("alarm_ber_threshold must lie in (0, 1)");
  }
  if (!(alarm_bias_threshold > 0.0 && alarm_bias_threshold < 1.0)) {
    throw ConfigError("alarm_bias_threshold must lie in (0, 1)");
  }
  hardware.validate();
}

std::string to_string(Mode m) { return m == Mode::Ideal ? "ideal" : "physical"; }

std::string to_string(EveStrategy e) { return e == EveStrategy::None ? "none" : "fixed"; }

Mode parse_mode(const std::string& s) {
  if (s == "ideal") return Mode::Ideal;
  if (s == "physical") return Mode::Physical;
  throw ConfigError("unknown mode '" + s + "'");
}

EveStrategy parse_eve(const std::string& s) {
  if (s == "none") return EveStrategy::None;
  if (s == "fixed") return EveStrategy::FixedProjection;
  throw ConfigError("unknown eavesdropper strategy '" + s + "'");
}

BitString generate_bits(std::size_t n, RandomStream& rng) {
  BitString bits(n);
  for (auto& b : bits) b = rng.bit();
  return bits;
}

qstate::StateVector alice_prepare(std::uint8_t bit) {
  const auto s = qstate::basis_states();
  return bit ? s.right : s.up;
}

qstate::Projector bob_projector(std::uint8_t bit) {
  const auto s = qstate::basis_states();
  return qstate::Projector(bit ? s.down : s.left);
}

Interception eve_intercept(const qstate::StateVector& state, EveStrategy strategy,
                           RandomStream& rng) {
  if (strategy == EveStrategy::None) return {std::nullopt, state};
  static const qstate::Projector probe(qstate::basis_states().up);
  const auto m = qstate::measure(state, probe, rng);
  const std::uint8_t guess = m.outcome == qstate::Outcome::Pass ? 0 : 1;
  return {guess, m.collapsed};
}

RoundOutcome transmit_round(const qstate::StateVector& prepared, std::uint8_t bob_bit,
                            const SessionConfig& cfg, hardware::DetectorState& detector,
                            double now, RandomStream& rng) {
  RoundOutcome out;
  if (cfg.mode == Mode::Ideal) {
    const Interception tap = eve_intercept(prepared, cfg.eve, rng);
    out.eve_guess = tap.guess;
    out.photon_count = 1;
    out.hit = qstate::measure(tap.forwarded, bob_projector(bob_bit), rng).outcome ==
              qstate::Outcome::Pass;
    return out;
  }

  const auto& hw = cfg.hardware;
  out.photon_count = hardware::sample_photon_count(hw.source, rng);
  qstate::StateVector signal = prepared;
  if (out.photon_count > 0) {
    const Interception tap = eve_intercept(prepared, cfg.eve, rng);
    out.eve_guess = tap.guess;
    signal = tap.forwarded;
  }
  const unsigned arriving =
      hardware::thin_photons(out.photon_count, hardware::fiber_transmission(hw.fiber), rng);
  const photonics::PhasePair phases(photonics::encoded_phase(signal),
                                    photonics::b92_phase(photonics::Party::Bob, bob_bit));
  const double optical = photonics::tm_window_distribution(phases, hw.interferometer)
                             .at(photonics::Port::Detector, photonics::Window::Central);
  const auto gate = hardware::gate_detector(arriving, optical, hw.detector, detector, now, rng);
  detector = gate.state;
  out.hit = gate.hit;
  return out;
}

RoundOutcome transmit_round(std::uint8_t alice_bit, std::uint8_t bob_bit, const SessionConfig& cfg,
                            hardware::DetectorState& detector, double now, RandomStream& rng) {
  return transmit_round(alice_prepare(alice_bit), bob_bit, cfg, detector, now, rng);
}

QuantumLink::QuantumLink(const SessionConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

bool QuantumLink::receive(const qstate::StateVector& prepared, std::uint8_t bob_bit) {
  const double now = static_cast<double>(history_.size()) / cfg_.hardware.source.pulse_rate;
  history_.push_back(transmit_round(prepared, bob_bit, cfg_, detector_, now, rng_));
  return history_.back().hit;
}

SiftedKey sift(const BitString& own_bits, const BitString& hits) {
  if (own_bits.size() != hits.size()) {
    throw ProtocolDesyncError("results cover " + std::to_string(hits.size()) + " rounds, expected " +
                              std::to_string(own_bits.size()));
  }
  SiftedKey s;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) {
      s.key.push_back(own_bits[i]);
      s.kept_indices.push_back(i);
    }
  }
  return s;
}

BitString choose_sample_mask(std::size_t n, double fraction, RandomStream& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("sample fraction must lie in (0, 1)");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k == 0) throw InsufficientKeyError("key too short to disclose an error-check sample");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates on the leading k slots.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  BitString mask(n, 0);
  for (std::size_t i = 0; i < k; ++i) mask[idx[i]] = 1;
  return mask;
}

BitString select(const BitString& key, const BitString& mask) {
  if (key.size() != mask.size()) throw ProtocolDesyncError("mask length differs from key length");
  BitString out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (mask[i]) out.push_back(key[i]);
  }
  return out;
}

BitString remove(const BitString& key, const BitString& mask) {
  if (key.size() != mask.size()) throw ProtocolDesyncError("mask length differs from key length");
  BitString out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (!mask[i]) out.push_back(key[i]);
  }
  return out;
}

BerEstimate estimate_ber(const BitString& alice_key, const BitString& bob_key, double fraction,
                         RandomStream& rng) {
  if (alice_key.size() != bob_key.size()) throw ProtocolDesyncError("keys differ in length");
  const BitString mask = choose_sample_mask(alice_key.size(), fraction, rng);
  const BitString a = select(alice_key, mask);
  const BitString b = select(bob_key, mask);
  BerEstimate e;
  e.sample_size = a.size();
  e.ber = static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
  e.alice_key = remove(alice_key, mask);
  e.bob_key = remove(bob_key, mask);
  return e;
}

double zero_bias(const BitString& key) {
  if (key.empty()) throw InsufficientKeyError("zero bias of an empty key");
  const auto zeros = std::count(key.begin(), key.end(), std::uint8_t{0});
  return static_cast<double>(zeros) / static_cast<double>(key.size());
}

BitString block_parities(const BitString& key, std::size_t block_size) {
  if (block_size < 2) throw ConfigError("block size must be >= 2");
  BitString parities;
  for (std::size_t start = 0; start < key.size(); start += block_size) {
    const std::size_t end = std::min(key.size(), start + block_size);
    std::uint8_t p = 0;
    for (std::size_t i = start; i < end; ++i) p ^= key[i];
    parities.push_back(p);
  }
  return parities;
}

PartyReconciliation apply_block_parity(const BitString& key, const BitString& own_parities,
                                       const BitString& peer_parities, std::size_t block_size) {
  const std::size_t n_blocks = (key.size() + block_size - 1) / block_size;
  if (own_parities.size() != n_blocks || peer_parities.size() != n_blocks) {
    throw ProtocolDesyncError("parity list length does not match the key's block count");
  }
  PartyReconciliation r;
  r.dropped_blocks.assign(n_blocks, 0);
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    const std::size_t start = blk * block_size;
    const std::size_t end = std::min(key.size(), start + block_size);
    if (own_parities[blk] != peer_parities[blk]) {
      r.dropped_blocks[blk] = 1;
      r.bits_discarded += end - start;
      continue;
    }
    r.key.insert(r.key.end(), key.begin() + static_cast<std::ptrdiff_t>(start),
                 key.begin() + static_cast<std::ptrdiff_t>(end - 1));
    r.bits_discarded += 1;
  }
  return r;
}

Reconciliation reconcile_block_parity(const BitString& alice_key, const BitString& bob_key,
                                      std::size_t block_size) {
  if (alice_key.size() != bob_key.size()) throw ProtocolDesyncError("keys differ in length");
  const BitString pa = block_parities(alice_key, block_size);
  const BitString pb = block_parities(bob_key, block_size);
  auto a = apply_block_parity(alice_key, pa, pb, block_size);
  auto b = apply_block_parity(bob_key, pb, pa, block_size);
  Reconciliation r;
  r.bits_discarded = a.bits_discarded;
  r.blocks_dropped = static_cast<std::size_t>(
      std::count(a.dropped_blocks.begin(), a.dropped_blocks.end(), std::uint8_t{1}));
  r.alice_key = std::move(a.key);
  r.bob_key = std::move(b.key);
  return r;
}

KeyRatePrediction predict_key_rate(const SessionConfig& cfg) {
  if (cfg.mode != Mode::Physical) throw ConfigError("key-rate prediction needs a physical-mode config");
  const auto& hw = cfg.hardware;
  KeyRatePrediction k;
  k.source_factor = hw.source.ideal_single_photon ? 1.0 : hw.source.mean_photons;
  k.transmission = hardware::fiber_transmission(hw.fiber);
  k.efficiency = hw.detector.efficiency;
  k.bits_per_pulse = k.source_factor * k.transmission * k.protocol_factor * k.efficiency;
  k.bits_per_second = k.bits_per_pulse * hw.source.pulse_rate;
  return k;
}

LinkBudget analytic_link_budget(const SessionConfig& cfg) {
  const auto& hw = cfg.hardware;
  LinkBudget b;
  b.transmission = hardware::fiber_transmission(hw.fiber);
  const double p_dark = hardware::dark_probability(hw.detector);
  double hit_same = 0.0;
  double hit_diff = 0.0;
  for (std::uint8_t a = 0; a < 2; ++a) {
    for (std::uint8_t bob = 0; bob < 2; ++bob) {
      const photonics::PhasePair phases(photonics::b92_phase(photonics::Party::Alice, a),
                                        photonics::b92_phase(photonics::Party::Bob, bob));
      const double q = photonics::tm_window_distribution(phases, hw.interferometer)
                           .at(photonics::Port::Detector, photonics::Window::Central);
      const double per_photon = b.transmission * q * hw.detector.efficiency;
      const double silent = hw.source.ideal_single_photon
                                ? 1.0 - per_photon
                                : std::exp(-hw.source.mean_photons * per_photon);
      const double p_hit = 1.0 - silent * (1.0 - p_dark);
      (a == bob ? hit_same : hit_diff) += p_hit / 4.0;
    }
  }
  b.sifted_bits_per_pulse = hit_same + hit_diff;
  b.ber = b.sifted_bits_per_pulse > 0.0 ? hit_diff / b.sifted_bits_per_pulse : 0.0;
  return b;
}

}  // namespace b92::protocol
