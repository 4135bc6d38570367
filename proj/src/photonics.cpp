#include "b92/photonics.hpp"

#include <cmath>
#include <ostream>

#include "b92/error.hpp"

namespace b92::photonics {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFwhmToSigma = 1.0 / 2.355;

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

double reduce_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

PhasePair::PhasePair(double alice, double bob)
    : alice_(reduce_phase(alice)), bob_(reduce_phase(bob)) {}

void InterferometerConfig::validate() const {
  if (!(pulse_width > 0.0)) throw ConfigError("pulse_width must be positive");
  if (!(delta_t > pulse_width)) {
    throw ConfigError("delta_t must exceed pulse_width so arrival windows do not overlap");
  }
  if (!in_unit_interval(visibility)) throw ConfigError("visibility must lie in [0, 1]");
  if (!in_unit_interval(long_path_loss_a) || !in_unit_interval(long_path_loss_b)) {
    throw ConfigError("long-path losses must lie in [0, 1]");
  }
}

double WindowDistribution::total() const {
  double s = alice_side_exit;
  for (const auto& port : prob) {
    for (double p : port) s += p;
  }
  return s;
}

BeamsplitterOutput beamsplitter(std::complex<double> in1, std::complex<double> in2, double phi) {
  const std::complex<double> i(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  return {s * (in1 + i * in2), std::polar(1.0, phi) * s * (in2 + i * in1)};
}

double b92_phase(Party party, std::uint8_t bit) {
  if (party == Party::Alice) return bit ? kPi / 2.0 : 0.0;
  return bit ? kPi : 3.0 * kPi / 2.0;
}

double mz_detect_prob(const PhasePair& phases) {
  const double c = std::cos(phases.difference() / 2.0);
  return c * c;
}

// Each of the four paths (short/long at Alice, then short/long at Bob)
// carries amplitude 1/4 into either of Bob's output ports. Short-short and
// long-long arrive alone in the prompt and delayed windows; the two mixed
// paths coincide in the central window and interfere. The unused output of
// Alice's second coupler takes the other half of the light.
WindowDistribution tm_window_distribution(const PhasePair& phases,
                                          const InterferometerConfig& cfg) {
  cfg.validate();
  const double ta = 1.0 - cfg.long_path_loss_a;  // intensity transmission of the long arms
  const double tb = 1.0 - cfg.long_path_loss_b;
  const double fringe = 2.0 * cfg.visibility * std::sqrt(ta * tb) * std::cos(phases.difference());

  WindowDistribution d;
  for (int port = 0; port < 2; ++port) {
    const double sign = port == 0 ? 1.0 : -1.0;
    d.prob[port][static_cast<int>(Window::Prompt)] = 1.0 / 16.0;
    d.prob[port][static_cast<int>(Window::Central)] = (ta + tb + sign * fringe) / 16.0;
    d.prob[port][static_cast<int>(Window::Delayed)] = ta * tb / 16.0;
  }
  d.alice_side_exit = (1.0 + ta) / 4.0;
  return d;
}

double effective_hit_prob(std::uint8_t alice_bit, std::uint8_t bob_bit, double visibility) {
  InterferometerConfig cfg;
  cfg.visibility = visibility;
  const PhasePair phases(b92_phase(Party::Alice, alice_bit), b92_phase(Party::Bob, bob_bit));
  return tm_window_distribution(phases, cfg).at(Port::Detector, Window::Central);
}

double voltage_to_phase(double volts, const ModulatorParams& m) {
  if (!(m.v_pi > 0.0)) throw ConfigError("v_pi must be positive");
  if (std::abs(volts) > m.v_pi) throw OutOfRangeError("modulator voltage exceeds v_pi");
  return std::acos(volts / m.v_pi);
}

double encoded_phase(const qstate::StateVector& state) {
  // Remove the global phase so the leading non-zero amplitude is real.
  const auto& a = state.amplitudes();
  const std::complex<double> ref = std::abs(a(0)) > 1e-12 ? a(0) : a(1);
  const std::complex<double> rot = std::conj(ref) / std::abs(ref);
  const std::complex<double> up = a(0) * rot;
  const std::complex<double> down = a(1) * rot;
  if (std::abs(up.imag()) > 1e-9 || std::abs(down.imag()) > 1e-9) {
    throw InvalidStateError("state has no real representative; it lies off the phase-encoding circle");
  }
  return reduce_phase(2.0 * std::atan2(down.real(), up.real()));
}

std::uint64_t Histogram::mass(double t0, double t1) const {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = bin_center(i);
    if (c >= t0 && c < t1) m += counts[i];
  }
  return m;
}

void Histogram::write_csv(std::ostream& os) const {
  os << "time_bin_seconds,counts\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    os << bin_center(i) << ',' << counts[i] << '\n';
  }
}

Histogram arrival_histogram(const PhasePair& phases, const InterferometerConfig& cfg,
                            std::size_t n_pulses, double mean_photons, RandomStream& rng,
                            double bin_width) {
  if (n_pulses == 0) throw ConfigError("n_pulses must be positive");
  if (!(bin_width > 0.0)) throw ConfigError("bin_width must be positive");
  const WindowDistribution d = tm_window_distribution(phases, cfg);

  Histogram h;
  h.bin_width = bin_width;
  h.origin = -cfg.delta_t;
  const auto n_bins = static_cast<std::size_t>(std::ceil(4.0 * cfg.delta_t / bin_width));
  h.counts.assign(n_bins, 0);

  const double p_prompt = d.at(Port::Detector, Window::Prompt);
  const double p_central = d.at(Port::Detector, Window::Central);
  const double p_delayed = d.at(Port::Detector, Window::Delayed);
  const double sigma = cfg.pulse_width * kFwhmToSigma;

  for (std::size_t pulse = 0; pulse < n_pulses; ++pulse) {
    const unsigned photons = rng.poisson(mean_photons);
    for (unsigned k = 0; k < photons; ++k) {
      const double u = rng.uniform();
      double center;
      if (u < p_prompt) {
        center = 0.0;
      } else if (u < p_prompt + p_central) {
        center = cfg.delta_t;
      } else if (u < p_prompt + p_central + p_delayed) {
        center = 2.0 * cfg.delta_t;
      } else {
        continue;  // left through another port or was absorbed
      }
      const double t = rng.normal(center, sigma);
      const double bin = std::floor((t - h.origin) / bin_width);
      if (bin >= 0.0 && bin < static_cast<double>(n_bins)) {
        ++h.counts[static_cast<std::size_t>(bin)];
      }
    }
  }
  return h;
}

PeakMasses peak_masses(const Histogram& h, double delta_t) {
  const double half = delta_t / 2.0;
  return {h.mass(-half, half), h.mass(delta_t - half, delta_t + half),
          h.mass(2.0 * delta_t - half, 2.0 * delta_t + half)};
}

}  // namespace b92::photonics
