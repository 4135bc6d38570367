#include "b92/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "b92/error.hpp"
#include "b92/hardware.hpp"
#include "b92/otp.hpp"
#include "b92/photonics.hpp"
#include "b92/protocol.hpp"
#include "b92/session.hpp"
#include "b92/transport.hpp"

namespace b92::cli {

namespace {

// Command-line overrides applied on top of defaults and an optional profile.
struct ExperimentSpec {
  std::string mode = "ideal";
  std::string eve = "none";
  std::string profile;
  std::optional<double> distance_km;
  std::optional<double> atten_db_km;
  std::optional<double> visibility;
  std::optional<double> mu;
  std::optional<double> efficiency;
  std::optional<double> dark_hz;
  std::optional<double> gate_ps;
  std::optional<double> loss_a;
  std::optional<double> loss_b;
  bool ideal_source = false;
  std::size_t blocks = 16;
  std::size_t bits_per_block = 1024;
  std::uint64_t seed_alice = 1;
  std::uint64_t seed_bob = 2;
  std::uint64_t seed_physics = 3;
  std::string out;

  hardware::HardwareProfile hardware() const {
    hardware::HardwareProfile p;
    if (!profile.empty()) p = hardware::load_profile(profile, p);
    if (distance_km) p.fiber.length_km = *distance_km;
    if (atten_db_km) p.fiber.attenuation_db_per_km = *atten_db_km;
    if (visibility) p.interferometer.visibility = *visibility;
    if (mu) p.source.mean_photons = *mu;
    if (efficiency) p.detector.efficiency = *efficiency;
    if (dark_hz) p.detector.dark_rate = *dark_hz;
    if (gate_ps) p.detector.gate_window = *gate_ps * 1e-12;
    if (loss_a) p.interferometer.long_path_loss_a = *loss_a;
    if (loss_b) p.interferometer.long_path_loss_b = *loss_b;
    if (ideal_source) p.source.ideal_single_photon = true;
    p.validate();
    return p;
  }

  protocol::SessionConfig session_config() const {
    protocol::SessionConfig cfg;
    cfg.mode = protocol::parse_mode(mode);
    cfg.eve = protocol::parse_eve(eve);
    cfg.hardware = hardware();
    cfg.blocks = blocks;
    cfg.bits_per_block = bits_per_block;
    cfg.seed_alice = seed_alice;
    cfg.seed_bob = seed_bob;
    cfg.seed_physics = seed_physics;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App& cmd, ExperimentSpec& s) {
  cmd.add_option("--mode", s.mode, "ideal | physical")->capture_default_str();
  cmd.add_option("--eve", s.eve, "none | fixed")->capture_default_str();
  cmd.add_option("--profile", s.profile, "hardware profile (key=value file)");
  cmd.add_option("--distance-km", s.distance_km, "fibre length");
  cmd.add_option("--atten-db-km", s.atten_db_km, "fibre attenuation");
  cmd.add_option("--visibility", s.visibility, "interferometer visibility");
  cmd.add_option("--mu", s.mu, "mean photons per pulse");
  cmd.add_option("--efficiency", s.efficiency, "detector efficiency");
  cmd.add_option("--dark-hz", s.dark_hz, "detector dark-count rate");
  cmd.add_option("--gate-ps", s.gate_ps, "detector gate window in ps");
  cmd.add_option("--loss-a", s.loss_a, "loss of Alice's long arm");
  cmd.add_option("--loss-b", s.loss_b, "loss of Bob's long arm");
  cmd.add_flag("--ideal-source", s.ideal_source, "exactly one photon per pulse");
  cmd.add_option("--blocks", s.blocks, "number of raw-key blocks")->capture_default_str();
  cmd.add_option("--bits-per-block", s.bits_per_block)->capture_default_str();
  cmd.add_option("--seed-alice", s.seed_alice)->capture_default_str();
  cmd.add_option("--seed-bob", s.seed_bob)->capture_default_str();
  cmd.add_option("--seed-physics", s.seed_physics)->capture_default_str();
  cmd.add_option("--out", s.out, "output path");
}

// Writes to --out if given, otherwise to the command's stdout.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

int cmd_session(const ExperimentSpec& spec, std::ostream& out) {
  const auto cfg = spec.session_config();
  const auto report = session::run_session(cfg);
  session::render_report(out, cfg, report);
  if (!spec.out.empty()) {
    OutputSink sink(spec.out, out);
    session::write_round_logs_csv(sink.get(), report.logs);
  }
  return report.aborted ? kTransportError : kOk;
}

struct SweepRange {
  double start = 0.0;
  double stop = 100.0;
  double step = 10.0;
  std::size_t pulses = 200000;
};

int cmd_sweep(const ExperimentSpec& spec, const SweepRange& range, std::ostream& out,
              std::ostream& err) {
  if (!(range.step > 0.0)) throw ConfigError("sweep step must be positive");
  if (!(range.stop >= range.start) || range.start < 0.0) throw ConfigError("empty sweep range");
  auto cfg = spec.session_config();
  cfg.mode = protocol::Mode::Physical;
  cfg.eve = protocol::EveStrategy::None;

  OutputSink sink(spec.out, out);
  auto& os = sink.get();
  os << "distance_km,transmission,key_rate_bits_per_pulse,ber,alarm,"
        "mc_key_rate_bits_per_pulse,mc_ber\n";
  os << std::setprecision(8);
  std::optional<double> crossing;
  const auto n_steps = static_cast<std::size_t>(std::floor((range.stop - range.start) / range.step + 1e-9));
  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double d = range.start + static_cast<double>(i) * range.step;
    cfg.hardware.fiber.length_km = d;
    const auto budget = protocol::analytic_link_budget(cfg);
    const bool alarm = budget.ber > cfg.alarm_ber_threshold;
    if (alarm && !crossing) crossing = d;

    // Direct Monte Carlo of the link with ground truth, one physics stream per row.
    protocol::QuantumLink link(cfg, session::derive_seed(cfg.seed_physics, i));
    RandomStream alice(session::derive_seed(cfg.seed_alice, i));
    RandomStream bob(session::derive_seed(cfg.seed_bob, i));
    std::size_t hits = 0;
    std::size_t errors = 0;
    for (std::size_t p = 0; p < range.pulses; ++p) {
      const std::uint8_t a = alice.bit();
      const std::uint8_t b = bob.bit();
      if (link.receive(protocol::alice_prepare(a), b)) {
        ++hits;
        errors += a != b;
      }
    }
    const double mc_rate = static_cast<double>(hits) / static_cast<double>(range.pulses);
    const double mc_ber = hits ? static_cast<double>(errors) / static_cast<double>(hits) : 0.0;
    os << d << ',' << budget.transmission << ',' << budget.sifted_bits_per_pulse << ','
       << budget.ber << ',' << (alarm ? 1 : 0) << ',' << mc_rate << ',' << mc_ber << '\n';
  }
  if (crossing) {
    err << "BER first exceeds " << cfg.alarm_ber_threshold << " at " << *crossing << " km\n";
  } else {
    err << "BER stays below " << cfg.alarm_ber_threshold << " over the swept range\n";
  }
  return kOk;
}

struct HistogramSpec {
  double phase_a = 0.0;
  double phase_b = 0.0;
  std::size_t pulses = 100000;
  double bin_ps = 50.0;
};

int cmd_histogram(const ExperimentSpec& spec, const HistogramSpec& h, std::ostream& out) {
  const auto hw = spec.hardware();
  RandomStream rng(spec.seed_physics);
  const auto hist = photonics::arrival_histogram(photonics::PhasePair(h.phase_a, h.phase_b),
                                                 hw.interferometer, h.pulses,
                                                 hw.source.mean_photons, rng, h.bin_ps * 1e-12);
  OutputSink sink(spec.out, out);
  sink.get() << std::setprecision(10);
  hist.write_csv(sink.get());
  return kOk;
}

// Frame transport that breaks after a fixed number of outgoing frames.
class FaultyTransport final : public transport::Transport {
 public:
  FaultyTransport(transport::Transport& inner, std::size_t limit) : inner_(inner), limit_(limit) {}
  void send_frame(const std::string& frame) override {
    if (sent_++ >= limit_) {
      inner_.close();
      throw TransportError("injected link failure");
    }
    inner_.send_frame(frame);
  }
  std::string receive_frame() override { return inner_.receive_frame(); }
  void close() override { inner_.close(); }

 private:
  transport::Transport& inner_;
  std::size_t limit_;
  std::size_t sent_ = 0;
};

struct ChatSpec {
  std::string role;
  std::string listen;
  std::string connect;
  std::string message;
  std::optional<std::size_t> drop_after_frames;
};

protocol::SessionConfig chat_session_config(const protocol::SessionConfig& base, std::uint64_t index) {
  auto cfg = base;
  cfg.session_id = index + 1;
  cfg.seed_alice = session::derive_seed(base.seed_alice, index);
  cfg.seed_bob = session::derive_seed(base.seed_bob, index);
  cfg.seed_physics = session::derive_seed(base.seed_physics, index);
  return cfg;
}

int chat_alice(const protocol::SessionConfig& base, transport::Messenger& m, const std::string& text,
               std::ostream& out) {
  const otp::Message plain = otp::ascii_encode(text);
  BitString key;
  for (std::uint64_t k = 0; key.size() < plain.size(); ++k) {
    const auto cfg = chat_session_config(base, k);
    m.begin_session(cfg.session_id);
    session::PartyOutcome party;
    session::run_alice(cfg, m, party);
    if (party.alarm) {
      out << "alarm (" << party.alarm_reason << ") in session " << cfg.session_id
          << "; key discarded\n";
      return kFailure;
    }
    key.insert(key.end(), party.reconciled_key.begin(), party.reconciled_key.end());
    out << "session " << cfg.session_id << ": +" << party.reconciled_key.size() << " key bits\n";
  }
  otp::Pad pad = otp::pad_from_key(key, 2, plain.size());
  const otp::Message cipher = otp::encrypt(plain, pad);
  const BitString cbits(cipher.symbols().begin(), cipher.symbols().end());
  m.send(wire::Kind::Ciphertext, {{"base", 2}, {"symbols", wire::encode_bits(cbits)}});
  out << "ciphertext: " << bits_to_hex(cbits) << '\n';
  return kOk;
}

int chat_bob(const protocol::SessionConfig& base, transport::Messenger& m, std::ostream& out) {
  BitString key;
  protocol::SessionConfig cfg;
  for (;;) {
    wire::PublicMessage msg = m.receive();
    if (msg.kind == wire::Kind::Ciphertext) {
      const BitString cbits = wire::decode_bits(msg.payload.at("symbols"));
      const otp::Message cipher(std::vector<otp::Symbol>(cbits.begin(), cbits.end()), 2);
      otp::Pad pad = otp::pad_from_key(key, 2, cipher.size());
      const otp::Message plain = otp::decrypt(cipher, pad);
      out << "ciphertext: " << bits_to_hex(cbits) << '\n';
      out << "message: " << otp::ascii_decode(plain) << '\n';
      return kOk;
    }
    if (msg.kind != wire::Kind::Hello) {
      throw ProtocolDesyncError("expected Hello or Ciphertext, received " + wire::to_string(msg.kind));
    }
    cfg = chat_session_config(base, msg.session_id - 1);
    protocol::QuantumLink link(cfg, cfg.seed_physics);
    session::PartyOutcome party;
    session::run_bob(cfg, m, link, party, msg);
    if (party.alarm) {
      out << "alarm (" << party.alarm_reason << ") in session " << cfg.session_id
          << "; key discarded\n";
      return kFailure;
    }
    key.insert(key.end(), party.reconciled_key.begin(), party.reconciled_key.end());
    out << "session " << cfg.session_id << ": +" << party.reconciled_key.size() << " key bits\n";
  }
}

int cmd_chat(const ExperimentSpec& spec, const ChatSpec& chat, std::ostream& out, std::ostream& err) {
  const auto base = spec.session_config();
  std::unique_ptr<transport::TcpTransport> tcp;
  if (chat.role == "alice") {
    if (chat.listen.empty()) throw ConfigError("--role alice needs --listen host:port");
    if (chat.message.empty()) throw ConfigError("--role alice needs --message");
    otp::ascii_encode(chat.message);  // reject unencodable text before connecting
    tcp = transport::TcpTransport::listen(chat.listen);
  } else if (chat.role == "bob") {
    if (chat.connect.empty()) throw ConfigError("--role bob needs --connect host:port");
    tcp = transport::TcpTransport::connect(chat.connect);
  } else {
    throw ConfigError("--role must be alice or bob");
  }

  std::optional<FaultyTransport> faulty;
  transport::Transport* link = tcp.get();
  if (chat.drop_after_frames) link = &faulty.emplace(*tcp, *chat.drop_after_frames);
  transport::Messenger messenger(*link, 1);
  try {
    return chat.role == "alice" ? chat_alice(base, messenger, chat.message, out)
                                : chat_bob(base, messenger, out);
  } catch (const Error& e) {
    tcp->close();
    err << "session aborted: " << e.what() << '\n';
    out << "session aborted; no key used\n";
    return kTransportError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"B92 quantum key distribution simulator"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  auto* session_cmd = app.add_subcommand("session", "run one in-process B92 session");
  add_common(*session_cmd, spec);

  SweepRange range;
  auto* sweep_cmd = app.add_subcommand("sweep", "BER and key rate versus fibre length (CSV)");
  add_common(*sweep_cmd, spec);
  sweep_cmd->add_option("--start", range.start, "first distance, km")->capture_default_str();
  sweep_cmd->add_option("--stop", range.stop, "last distance, km")->capture_default_str();
  sweep_cmd->add_option("--step", range.step, "distance step, km")->capture_default_str();
  sweep_cmd->add_option("--pulses", range.pulses, "Monte Carlo pulses per row")->capture_default_str();

  HistogramSpec hist;
  auto* hist_cmd = app.add_subcommand("histogram", "time-of-arrival spectrum (CSV)");
  add_common(*hist_cmd, spec);
  hist_cmd->add_option("--phase-a", hist.phase_a, "Alice's phase, rad")->capture_default_str();
  hist_cmd->add_option("--phase-b", hist.phase_b, "Bob's phase, rad")->capture_default_str();
  hist_cmd->add_option("--pulses", hist.pulses)->capture_default_str();
  hist_cmd->add_option("--bin-ps", hist.bin_ps)->capture_default_str();

  ChatSpec chat;
  auto* chat_cmd = app.add_subcommand("chat", "send one OTP-encrypted message between two processes");
  add_common(*chat_cmd, spec);
  chat_cmd->add_option("--role", chat.role, "alice | bob")->required();
  chat_cmd->add_option("--listen", chat.listen, "host:port (alice)");
  chat_cmd->add_option("--connect", chat.connect, "host:port (bob)");
  chat_cmd->add_option("--message", chat.message, "printable ASCII text (alice)");
  chat_cmd->add_option("--drop-after-frames", chat.drop_after_frames)->group("");

  std::vector<const char*> argv{"b92"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*session_cmd) return cmd_session(spec, out);
    if (*sweep_cmd) return cmd_sweep(spec, range, out, err);
    if (*hist_cmd) return cmd_histogram(spec, hist, out);
    if (*chat_cmd) return cmd_chat(spec, chat, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ModelValidityError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
    return kTransportError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace b92::cli
