#include "b92/session.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "b92/error.hpp"

namespace b92::session {

namespace {

using protocol::SessionConfig;
using transport::Messenger;
using wire::Kind;

nlohmann::json hello_payload(const SessionConfig& cfg) {
  return {{"bits_per_block", cfg.bits_per_block},
          {"blocks", cfg.blocks},
          {"error_sample_fraction", cfg.error_sample_fraction},
          {"reconcile_block_size", cfg.reconcile_block_size},
          {"mode", protocol::to_string(cfg.mode)}};
}

void check_hello(const SessionConfig& cfg, const wire::PublicMessage& hello) {
  if (hello.kind != Kind::Hello) throw ProtocolDesyncError("session must open with Hello");
  if (hello.payload != hello_payload(cfg)) {
    throw ProtocolDesyncError("peer session parameters differ: " + hello.payload.dump());
  }
}

BitString bits_field(const wire::PublicMessage& m) { return wire::decode_bits(m.payload.at("bits")); }

nlohmann::json bits_payload(const BitString& bits) { return {{"bits", wire::encode_bits(bits)}}; }

// Both parties know the sifted length, so both reach the same verdict on
// whether a sample can be drawn without exchanging anything.
void require_sample(const SessionConfig& cfg, std::size_t sifted) {
  if (std::llround(cfg.error_sample_fraction * static_cast<double>(sifted)) == 0) {
    throw InsufficientKeyError("sifted key of " + std::to_string(sifted) +
                               " bits is too short for an error-check sample");
  }
}

void decide_alarm(const SessionConfig& cfg, PartyOutcome& out) {
  const bool ber_alarm = out.ber > cfg.alarm_ber_threshold;
  const bool bias_alarm = std::abs(out.zero_bias - 0.5) > cfg.alarm_bias_threshold;
  out.alarm = ber_alarm || bias_alarm;
  if (ber_alarm && bias_alarm) {
    out.alarm_reason = "BER+bias";
  } else if (ber_alarm) {
    out.alarm_reason = "BER";
  } else if (bias_alarm) {
    out.alarm_reason = "bias";
  }
}

void finish_reconciliation(const SessionConfig& cfg, const BitString& remaining,
                           const BitString& own_par, const BitString& peer_par,
                           PartyOutcome& out) {
  auto rec = protocol::apply_block_parity(remaining, own_par, peer_par, cfg.reconcile_block_size);
  out.reconciled_key = std::move(rec.key);
  out.bits_discarded = rec.bits_discarded;
  out.blocks_dropped = static_cast<std::size_t>(
      std::count(rec.dropped_blocks.begin(), rec.dropped_blocks.end(), std::uint8_t{1}));
}

std::vector<qstate::StateVector> decode_signals(const wire::PublicMessage& m, std::size_t expected) {
  const BitString labels = wire::decode_bits(m.payload.at("states"));
  if (labels.size() != expected) throw ProtocolDesyncError("signal block has the wrong length");
  std::vector<qstate::StateVector> states;
  states.reserve(labels.size());
  for (auto label : labels) states.push_back(protocol::alice_prepare(label));
  return states;
}

}  // namespace

void run_alice(const SessionConfig& cfg, Messenger& channel, PartyOutcome& out) {
  cfg.validate();
  RandomStream rng(cfg.seed_alice);
  channel.send(Kind::Hello, hello_payload(cfg));

  for (std::size_t blk = 0; blk < cfg.blocks; ++blk) {
    const BitString bits = protocol::generate_bits(cfg.bits_per_block, rng);
    out.raw_bits.insert(out.raw_bits.end(), bits.begin(), bits.end());
    channel.send(Kind::QuantumSignal, {{"block", blk}, {"states", wire::encode_bits(bits)}});
    const BitString hits = wire::results_hits(channel.expect(Kind::Results));
    const auto sifted = protocol::sift(bits, hits);
    out.hits.insert(out.hits.end(), hits.begin(), hits.end());
    out.sifted_key.insert(out.sifted_key.end(), sifted.key.begin(), sifted.key.end());
  }

  require_sample(cfg, out.sifted_key.size());
  const BitString mask =
      protocol::choose_sample_mask(out.sifted_key.size(), cfg.error_sample_fraction, rng);
  channel.send(Kind::ErrorCheckIndices, bits_payload(mask));
  const BitString peer_sample = bits_field(channel.expect(Kind::ErrorCheckValues));
  const BitString own_sample = protocol::select(out.sifted_key, mask);
  channel.send(Kind::ErrorCheckValues, bits_payload(own_sample));
  out.sample_size = own_sample.size();
  out.ber = static_cast<double>(hamming_distance(own_sample, peer_sample)) /
            static_cast<double>(own_sample.size());
  out.zero_bias = protocol::zero_bias(peer_sample);
  const BitString remaining = protocol::remove(out.sifted_key, mask);

  const BitString own_par = protocol::block_parities(remaining, cfg.reconcile_block_size);
  channel.send(Kind::Parities, bits_payload(own_par));
  const BitString peer_par = bits_field(channel.expect(Kind::Parities));
  finish_reconciliation(cfg, remaining, own_par, peer_par, out);

  BitString dropped(own_par.size());
  for (std::size_t i = 0; i < dropped.size(); ++i) dropped[i] = own_par[i] != peer_par[i];
  channel.send(Kind::DiscardList, bits_payload(dropped));

  decide_alarm(cfg, out);
  const auto done = channel.expect(Kind::Done);
  if (done.payload.at("alarm").get<bool>() != out.alarm) {
    throw ProtocolDesyncError("parties disagree on the alarm verdict");
  }
  out.complete = true;
}

void run_bob(const SessionConfig& cfg, Messenger& channel, protocol::QuantumLink& link,
             PartyOutcome& out, std::optional<wire::PublicMessage> hello) {
  cfg.validate();
  RandomStream rng(cfg.seed_bob);
  check_hello(cfg, hello ? *hello : channel.receive());

  for (std::size_t blk = 0; blk < cfg.blocks; ++blk) {
    const BitString bits = protocol::generate_bits(cfg.bits_per_block, rng);
    out.raw_bits.insert(out.raw_bits.end(), bits.begin(), bits.end());
    const auto signal = channel.expect(Kind::QuantumSignal);
    if (signal.payload.at("block").get<std::size_t>() != blk) {
      throw ProtocolDesyncError("signal block out of order");
    }
    const auto states = decode_signals(signal, cfg.bits_per_block);
    BitString hits(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) hits[i] = link.receive(states[i], bits[i]);
    channel.send(Kind::Results, wire::results_payload(hits));
    const auto sifted = protocol::sift(bits, hits);
    out.hits.insert(out.hits.end(), hits.begin(), hits.end());
    out.sifted_key.insert(out.sifted_key.end(), sifted.key.begin(), sifted.key.end());
  }

  require_sample(cfg, out.sifted_key.size());
  const BitString mask = bits_field(channel.expect(Kind::ErrorCheckIndices));
  const BitString own_sample = protocol::select(out.sifted_key, mask);
  channel.send(Kind::ErrorCheckValues, bits_payload(own_sample));
  const BitString peer_sample = bits_field(channel.expect(Kind::ErrorCheckValues));
  out.sample_size = own_sample.size();
  out.ber = static_cast<double>(hamming_distance(own_sample, peer_sample)) /
            static_cast<double>(own_sample.size());
  out.zero_bias = protocol::zero_bias(own_sample);
  const BitString remaining = protocol::remove(out.sifted_key, mask);

  const BitString peer_par = bits_field(channel.expect(Kind::Parities));
  const BitString own_par = protocol::block_parities(remaining, cfg.reconcile_block_size);
  channel.send(Kind::Parities, bits_payload(own_par));
  finish_reconciliation(cfg, remaining, own_par, peer_par, out);

  const BitString dropped = bits_field(channel.expect(Kind::DiscardList));
  BitString mine(own_par.size());
  for (std::size_t i = 0; i < mine.size(); ++i) mine[i] = own_par[i] != peer_par[i];
  if (dropped != mine) throw ProtocolDesyncError("discard lists differ");

  decide_alarm(cfg, out);
  channel.send(Kind::Done, {{"ber", out.ber}, {"zero_bias", out.zero_bias}, {"alarm", out.alarm}});
  out.complete = true;
}

SessionReport run_session(const SessionConfig& cfg, transport::LoopbackOptions options) {
  cfg.validate();
  auto [alice_end, bob_end] = transport::make_loopback(options);
  PartyOutcome alice;
  PartyOutcome bob;
  protocol::QuantumLink link(cfg, cfg.seed_physics);
  std::string alice_error;
  std::string bob_error;

  std::thread bob_thread([&, end = bob_end.get()] {
    Messenger m(*end, cfg.session_id);
    try {
      run_bob(cfg, m, link, bob);
    } catch (const std::exception& e) {
      bob_error = e.what();
      end->close();
    }
  });
  {
    Messenger m(*alice_end, cfg.session_id);
    try {
      run_alice(cfg, m, alice);
    } catch (const std::exception& e) {
      alice_error = e.what();
      alice_end->close();
    }
  }
  bob_thread.join();

  SessionReport r;
  r.pulses = alice.raw_bits.size();
  r.sifted_key_alice = alice.sifted_key;
  r.sifted_key_bob = bob.sifted_key;
  if (r.pulses > 0) {
    r.sifted_fraction = static_cast<double>(alice.sifted_key.size()) / static_cast<double>(r.pulses);
    r.key_rate_bits_per_pulse = r.sifted_fraction;
  }

  const auto& history = link.history();
  const std::size_t n_logs = std::min({alice.raw_bits.size(), bob.raw_bits.size(), history.size()});
  r.logs.reserve(n_logs);
  std::size_t sifted_multi = 0;
  std::size_t sifted_total = 0;
  for (std::size_t i = 0; i < n_logs; ++i) {
    const auto& h = history[i];
    r.logs.push_back({i, alice.raw_bits[i], bob.raw_bits[i], h.photon_count, h.eve_guess, h.hit});
    if (h.hit) {
      ++sifted_total;
      sifted_multi += h.photon_count >= 2;
    }
  }
  if (sifted_total > 0) {
    r.multi_photon_fraction = static_cast<double>(sifted_multi) / static_cast<double>(sifted_total);
  }

  if (!alice.complete || !bob.complete) {
    r.aborted = true;
    r.abort_reason = !alice_error.empty() ? alice_error : bob_error;
    if (r.abort_reason.empty()) r.abort_reason = "session incomplete";
    return r;
  }
  r.ber_estimate = alice.ber;
  r.ber_sample_size = alice.sample_size;
  r.zero_bias = alice.zero_bias;
  r.reconciled_key = alice.reconciled_key;
  r.reconciled_key_bob = bob.reconciled_key;
  r.bits_discarded = alice.bits_discarded;
  r.blocks_dropped = alice.blocks_dropped;
  r.alarm = alice.alarm;
  r.alarm_reason = alice.alarm_reason;
  return r;
}

SiftResult sift(const std::vector<protocol::RoundLog>& logs, const wire::PublicMessage& results) {
  const BitString hits = wire::results_hits(results);
  if (hits.size() != logs.size()) {
    throw ProtocolDesyncError("results cover " + std::to_string(hits.size()) + " rounds, log has " +
                              std::to_string(logs.size()));
  }
  SiftResult s;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (!hits[i]) continue;
    s.alice_key.push_back(logs[i].alice_bit);
    s.bob_key.push_back(logs[i].bob_bit);
    s.kept_indices.push_back(logs[i].index);
  }
  return s;
}

void render_report(std::ostream& os, const SessionConfig& cfg, const SessionReport& r) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "mode: " << protocol::to_string(cfg.mode) << '\n'
    << "eavesdropper: " << protocol::to_string(cfg.eve) << '\n'
    << "seeds: " << cfg.seed_alice << ' ' << cfg.seed_bob << ' ' << cfg.seed_physics << '\n'
    << "pulses: " << r.pulses << '\n'
    << "sifted bits: " << r.sifted_key_alice.size() << '\n'
    << "sifted fraction: " << r.sifted_fraction << '\n'
    << "key rate (bits/pulse): " << r.key_rate_bits_per_pulse << '\n';
  if (r.aborted) {
    s << "status: aborted (" << r.abort_reason << ")\n";
    os << s.str();
    return;
  }
  s << "error-check sample: " << r.ber_sample_size << '\n'
    << "BER estimate: " << r.ber_estimate << '\n'
    << "zero bias: " << r.zero_bias << '\n'
    << "reconciled bits: " << r.reconciled_key.size() << '\n'
    << "parity blocks dropped: " << r.blocks_dropped << '\n'
    << "multi-photon sifted fraction: " << r.multi_photon_fraction << '\n'
    << "alarm: " << (r.alarm ? "true (" + r.alarm_reason + ")" : std::string("false")) << '\n'
    << "keys agree: " << (r.reconciled_key == r.reconciled_key_bob ? "yes" : "no") << '\n';
  os << s.str();
}

void write_round_logs_csv(std::ostream& os, const std::vector<protocol::RoundLog>& logs) {
  os << "index,alice_bit,bob_bit,photon_count,eve_guess,hit\n";
  for (const auto& l : logs) {
    os << l.index << ',' << int(l.alice_bit) << ',' << int(l.bob_bit) << ',' << l.photon_count
       << ',';
    if (l.eve_guess) os << int(*l.eve_guess);
    os << ',' << int(l.hit) << '\n';
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over seed + index * golden ratio.
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace b92::session
