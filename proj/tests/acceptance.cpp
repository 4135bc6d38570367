// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "b92/error.hpp"
#include "b92/hardware.hpp"
#include "b92/otp.hpp"
#include "b92/photonics.hpp"
#include "b92/protocol.hpp"
#include "b92/session.hpp"
#include "oracles.hpp"

using namespace b92;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double sigma_of(double p, double n) { return std::sqrt(p * (1 - p) / n); }

void table1(Verdict& v) {
  RandomStream rng(101);
  const int n = 100000;
  const double want[2][2] = {{0.5, 0.0}, {0.0, 0.5}};
  for (std::uint8_t a = 0; a < 2; ++a) {
    for (std::uint8_t b = 0; b < 2; ++b) {
      const auto psi = protocol::alice_prepare(a);
      const auto p = protocol::bob_projector(b);
      int pass = 0;
      for (int i = 0; i < n; ++i) pass += qstate::measure(psi, p, rng).outcome == qstate::Outcome::Pass;
      const double f = static_cast<double>(pass) / n;
      v.detail << " (" << int(a) << "," << int(b) << ")=" << fmt(f);
      v.check(std::abs(f - want[a][b]) <= 0.01, "cell off by more than 0.01");
    }
  }
}

void sifted_fraction(Verdict& v) {
  protocol::SessionConfig cfg;
  cfg.blocks = 98;  // 100352 raw bits
  const auto r = session::run_session(cfg);
  v.check(!r.aborted, "session aborted");
  v.detail << " pulses=" << r.pulses << " fraction=" << fmt(r.sifted_fraction);
  v.check(std::abs(r.sifted_fraction - 0.25) <= 0.005, "fraction outside 0.25 +- 0.005");
  v.check(r.sifted_key_alice == r.sifted_key_bob, "sifted keys differ");
}

void eavesdropper(Verdict& v) {
  protocol::SessionConfig cfg;
  cfg.eve = protocol::EveStrategy::FixedProjection;
  cfg.blocks = 160;
  const auto r = session::run_session(cfg);
  v.check(!r.aborted, "session aborted");

  const auto& a = r.sifted_key_alice;
  const auto& b = r.sifted_key_bob;
  const double ber = static_cast<double>(hamming_distance(a, b)) / a.size();
  v.detail << " sifted=" << a.size() << " BER=" << fmt(ber);
  v.check(std::abs(ber - 0.25) <= 0.01, "sifted BER not within 0.25 +- 0.01");

  double g0 = 0, g0_ok = 0, g1 = 0, g1_ok = 0;
  for (const auto& log : r.logs) {
    if (*log.eve_guess == 0) {
      ++g0;
      g0_ok += log.alice_bit == 0;
    } else {
      ++g1;
      g1_ok += log.alice_bit == 1;
    }
  }
  const double n = static_cast<double>(r.logs.size());
  v.detail << " guess1_correct=" << fmt(g1_ok / g1) << " guess1_cover=" << fmt(g1 / n)
           << " guess0_correct=" << fmt(g0_ok / g0);
  v.check(g1_ok == g1, "a '1' guess was wrong");
  v.check(std::abs(g1 / n - 0.25) <= 0.01, "'1' guesses do not cover 25% +- 1%");
  v.check(std::abs(g0_ok / g0 - 0.75) <= 0.01, "'0' guesses not 75% +- 1% correct");

  const double bias = protocol::zero_bias(b);
  v.detail << " zero_bias=" << fmt(bias);
  v.check(bias > 0.5 + 3 * sigma_of(0.5, b.size()), "zero bias not above 0.5 + 3 sigma");
  v.detail << " alarm=" << (r.alarm ? r.alarm_reason : "none");
  v.check(r.alarm, "alarm did not fire");
}

void interferometer(Verdict& v) {
  using namespace photonics;
  const InterferometerConfig lossless;
  double worst = 0;
  for (std::uint8_t a = 0; a < 2; ++a) {
    for (std::uint8_t b = 0; b < 2; ++b) {
      const PhasePair p(b92_phase(Party::Alice, a), b92_phase(Party::Bob, b));
      const double mz = mz_detect_prob(p);
      const double central = tm_window_distribution(p, lossless).at(Port::Detector, Window::Central);
      worst = std::max({worst, std::abs(mz - (a == b ? 0.5 : 0.0)), std::abs(central - mz / 4)});
    }
  }
  v.detail << " max_deviation=" << worst;
  v.check(worst <= 1e-12, "deviation above 1e-12");
}

void visibility_ber(Verdict& v) {
  protocol::SessionConfig cfg;
  cfg.mode = protocol::Mode::Physical;
  cfg.blocks = 330;
  cfg.hardware.interferometer.visibility = 0.995;
  cfg.hardware.detector.dark_rate = 0;
  cfg.hardware.detector.efficiency = 1;
  cfg.hardware.source.ideal_single_photon = true;
  const auto r = session::run_session(cfg);
  v.check(!r.aborted, "session aborted");
  const auto& a = r.sifted_key_alice;
  const double ber = static_cast<double>(hamming_distance(a, r.sifted_key_bob)) / a.size();
  v.detail << " sifted=" << a.size() << " BER=" << fmt(ber) << " sampled_BER=" << fmt(r.ber_estimate);
  v.check(a.size() >= 20000, "fewer than 2e4 sifted bits");
  v.check(std::abs(ber - 0.005) <= 0.002, "BER outside 0.005 +- 0.002");
}

void key_rate(Verdict& v) {
  protocol::SessionConfig cfg;
  cfg.mode = protocol::Mode::Physical;
  cfg.hardware.fiber.length_km = 10;
  cfg.hardware.fiber.attenuation_db_per_km = 10 * std::log10(4.0) / 10;
  const auto k = protocol::predict_key_rate(cfg);
  const double product = 0.1 * 0.25 * (1.0 / 16) * 0.2;
  v.detail << " predicted=" << k.bits_per_pulse << " (1/" << fmt(1 / k.bits_per_pulse) << ")";
  v.check(std::abs(k.bits_per_pulse - product) <= 1e-15, "prediction differs from the analytic product");
  v.check(std::abs(k.bits_per_pulse - 3.125e-4) <= 1e-15, "prediction is not 3.125e-4");

  cfg.blocks = 1000;
  const auto r = session::run_session(cfg);
  v.check(!r.aborted, "session aborted");
  const double sigma = std::sqrt(k.bits_per_pulse / r.pulses);
  v.detail << " monte_carlo=" << fmt(r.key_rate_bits_per_pulse) << " sigma=" << fmt(sigma);
  v.check(std::abs(r.key_rate_bits_per_pulse - k.bits_per_pulse) <= 3 * sigma,
          "Monte Carlo rate outside 3 sigma");

  auto ideal = cfg;
  ideal.hardware.source.ideal_single_photon = true;
  const double ratio = protocol::predict_key_rate(ideal).bits_per_pulse / k.bits_per_pulse;
  v.detail << " ideal_ratio=" << ratio;
  v.check(std::abs(ratio - 10.0) <= 1e-12, "ideal source ratio is not 10");
}

void dark_counts(Verdict& v) {
  hardware::DetectorParams d;
  d.dark_rate = 50e3;
  d.gate_window = 100e-12;
  const double p = hardware::dark_probability(d);
  v.detail << " p=" << p;
  v.check(std::abs(p - 5e-6) <= 1e-18, "dark probability is not 5e-6");
}

void distance_sweep(Verdict& v) {
  protocol::SessionConfig cfg;
  cfg.mode = protocol::Mode::Physical;
  double prev = -1;
  bool monotone = true;
  std::vector<double> thresholds{0.05, 0.1, 0.25, 0.4, 0.45, 0.49};
  std::vector<double> crossing(thresholds.size(), -1);
  const double floor_ber = protocol::analytic_link_budget(cfg).ber;
  for (double km = 0; km <= 400; km += 1) {
    cfg.hardware.fiber.length_km = km;
    const double ber = protocol::analytic_link_budget(cfg).ber;
    monotone = monotone && ber >= prev;
    prev = ber;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (crossing[i] < 0 && ber > thresholds[i]) crossing[i] = km;
    }
  }
  v.detail << " floor=" << fmt(floor_ber) << " crossings_km=";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    v.detail << (i ? "/" : "") << crossing[i];
    v.check(crossing[i] >= 0, "threshold " + fmt(thresholds[i]) + " never crossed");
  }
  v.check(monotone, "BER decreased with distance");

  double worst = 0;
  for (double km = 0; km <= 200; km += 5) {
    const double t0 = hardware::fiber_transmission({km, 0.3});
    const double t1 = hardware::fiber_transmission({km + 10, 0.3});
    worst = std::max(worst, std::abs(t1 / t0 - std::pow(10.0, -0.3)));
  }
  v.detail << " halving_ratio=" << fmt(std::pow(10.0, -0.3)) << " dev=" << worst;
  v.check(worst <= 1e-12, "transmission ratio per 10 km deviates");
}

void histogram(Verdict& v) {
  using namespace photonics;
  const InterferometerConfig cfg;
  const std::size_t pulses = 100000;
  const double mu = 1.0;

  RandomStream rng(109);
  const auto h = arrival_histogram(PhasePair(0, 0), cfg, pulses, mu, rng);
  const double centers[3] = {0.0, cfg.delta_t, 2 * cfg.delta_t};
  v.detail << " peaks_ns=";
  for (int k = 0; k < 3; ++k) {
    std::size_t best = 0;
    std::uint64_t best_count = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (std::abs(h.bin_center(i) - centers[k]) < cfg.delta_t / 2 && h.counts[i] > best_count) {
        best = i;
        best_count = h.counts[i];
      }
    }
    v.detail << (k ? "/" : "") << fmt(h.bin_center(best) * 1e9);
    v.check(std::abs(h.bin_center(best) - centers[k]) <= cfg.pulse_width, "peak misplaced");
  }

  std::vector<double> obs, pred;
  for (int s = 0; s < 8; ++s) {
    const double delta = 2 * kPi * s / 8;
    const auto hs = arrival_histogram(PhasePair(delta, 0), cfg, pulses, mu, rng);
    obs.push_back(static_cast<double>(peak_masses(hs, cfg.delta_t).central) / (mu * pulses));
    pred.push_back((1 + std::cos(delta)) / 8);
  }
  double mean = 0;
  for (double o : obs) mean += o / obs.size();
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ss_res += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    ss_tot += (obs[i] - mean) * (obs[i] - mean);
  }
  const double r2 = 1 - ss_res / ss_tot;
  v.detail << " R2=" << fmt(r2);
  v.check(r2 > 0.99, "central peak does not follow (1/8)(1 + cos delta)");

  InterferometerConfig lossy = cfg;
  lossy.long_path_loss_a = 0.3;
  lossy.long_path_loss_b = 0.3;
  const auto hl = arrival_histogram(PhasePair(0, 0), lossy, pulses, mu, rng);
  const auto m = peak_masses(hl, cfg.delta_t);
  const double ratio = static_cast<double>(m.delayed) / m.prompt;
  v.detail << " lossy_delayed/prompt=" << fmt(ratio);
  v.check(std::abs(ratio - 0.49) < 0.05, "unequal side peaks not reproduced");
}

void conservation(Verdict& v) {
  using namespace photonics;
  RandomStream rng(110);
  double worst_sum = 0, worst_unitary = 0;
  for (int k = 0; k < 1000; ++k) {
    InterferometerConfig cfg;
    cfg.visibility = rng.uniform();
    const PhasePair p(2 * kPi * rng.uniform(), 2 * kPi * rng.uniform());
    worst_sum = std::max(worst_sum, std::abs(tm_window_distribution(p, cfg).total() - 1));
    const std::complex<double> a(rng.normal(0, 1), rng.normal(0, 1)), b(rng.normal(0, 1), rng.normal(0, 1));
    const auto o = beamsplitter(a, b, 2 * kPi * rng.uniform());
    const double in = std::norm(a) + std::norm(b);
    worst_unitary = std::max(worst_unitary, std::abs(std::norm(o.out1) + std::norm(o.out2) - in) / in);
  }
  v.detail << " window_sum_dev=" << worst_sum << " unitarity_dev=" << worst_unitary;
  v.check(worst_sum <= 1e-12, "window distribution does not sum to 1");
  v.check(worst_unitary <= 1e-12, "beamsplitter not unitary");
}

void one_time_pad(Verdict& v) {
  RandomStream rng(111);
  bool roundtrip = true;
  for (otp::Symbol base : {2u, 10u, 26u, 256u}) {
    for (int t = 0; t < 100; ++t) {
      std::vector<otp::Symbol> p(64), k(64);
      for (auto& x : p) x = static_cast<otp::Symbol>(rng.next() % base);
      for (auto& x : k) x = static_cast<otp::Symbol>(rng.next() % base);
      otp::Pad ea(k, base), da(k, base);
      const otp::Message m(p, base);
      roundtrip = roundtrip && otp::decrypt(otp::encrypt(m, ea), da) == m;
    }
  }
  v.check(roundtrip, "round trip failed");

  const otp::Message plain = otp::letters_encode("Q");
  std::vector<double> counts(26, 0.0);
  for (int i = 0; i < 10000; ++i) {
    otp::Pad pad({static_cast<otp::Symbol>(rng.next() % 26)}, 26);
    counts[otp::encrypt(plain, pad).symbols()[0]] += 1;
  }
  const double p = oracle::chi_square_p(counts, std::vector<double>(26, 10000 / 26.0));
  v.detail << " uniformity_p=" << fmt(p);
  v.check(p > 0.01, "ciphertext not uniform");

  otp::Pad pad({1, 2, 3}, 10);
  otp::encrypt(otp::Message({4, 4, 4}, 10), pad);
  bool refused = false;
  try {
    otp::encrypt(otp::Message({4}, 10), pad);
  } catch (const PadDepletedError&) {
    refused = true;
  }
  v.detail << " reuse_refused=" << (refused ? "yes" : "no");
  v.check(refused, "pad reuse not refused");
}

void reconciliation(Verdict& v) {
  RandomStream rng(112);
  const auto a = protocol::generate_bits(100000, rng);
  BitString b = a;
  for (auto& x : b) x ^= static_cast<std::uint8_t>(rng.bernoulli(0.01));
  const auto r = protocol::reconcile_block_parity(a, b, 8);
  const auto o = oracle::brute_reconcile(a, b, 8);
  v.detail << " kept=" << r.alice_key.size() << " dropped_blocks=" << r.blocks_dropped
           << " residual_errors=" << hamming_distance(r.alice_key, r.bob_key);
  v.check(r.alice_key == o.alice && r.bob_key == o.bob, "keys differ from the brute-force oracle");
  v.check(r.blocks_dropped == o.dropped, "dropped-block count differs");
}

std::string run_capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  if (status != 0) out += "\n<exit status " + std::to_string(status) + ">";
  return out;
}

void end_to_end(Verdict& v) {
  const std::string exe = B92_CLI_PATH;
  const std::string session_cmd = exe + " session --eve fixed --seed-alice 11 --seed-bob 12 --seed-physics 13";
  const std::string first = run_capture(session_cmd);
  const std::string second = run_capture(session_cmd);
  v.detail << " report_bytes=" << first.size();
  v.check(!first.empty() && first == second, "session reports differ");

  const std::string message = "Quantum keys make secrets safer!";  // 32 characters
  const std::string ep = "127.0.0.1:47421";
  FILE* alice = popen((exe + " chat --role alice --listen " + ep + " --message '" + message + "'").c_str(), "r");
  const std::string bob = run_capture(exe + " chat --role bob --connect " + ep);
  std::string alice_out;
  if (alice) {
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), alice)) > 0) alice_out.append(buf.data(), n);
    pclose(alice);
  }
  const bool delivered = bob.find("message: " + message + "\n") != std::string::npos;
  v.detail << " chat_delivered=" << (delivered ? "yes" : "no");
  v.check(message.size() == 32 && delivered, "chat did not round-trip the message");
  v.check(alice_out.find("ciphertext: ") != std::string::npos, "Alice reported no ciphertext");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"table 1 pass frequencies", table1},
      {"sifted fraction", sifted_fraction},
      {"eavesdropper signature", eavesdropper},
      {"interferometer equivalence", interferometer},
      {"visibility BER", visibility_ber},
      {"key-rate factor", key_rate},
      {"dark-count arithmetic", dark_counts},
      {"distance sweep", distance_sweep},
      {"histogram shape", histogram},
      {"probability conservation", conservation},
      {"one-time pad", one_time_pad},
      {"reconciliation oracle", reconciliation},
      {"end-to-end determinism", end_to_end},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > 60) v.check(false, "took longer than 60 s");
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ":"
              << v.detail.str() << " (" << fmt(secs) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
