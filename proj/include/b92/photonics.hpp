#pragma once

// Phase-encoded realisation of B92: beamsplitter algebra, the single
// Mach-Zehnder detection law, and the time-multiplexed pair of unequal-arm
// interferometers with its prompt / central / delayed arrival windows.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "b92/qstate.hpp"
#include "b92/random.hpp"

namespace b92::photonics {

inline constexpr double kPi = 3.14159265358979323846;

// Phases are kept reduced into [0, 2*pi).
class PhasePair {
 public:
  PhasePair(double alice, double bob);
  double alice() const { return alice_; }
  double bob() const { return bob_; }
  double difference() const { return alice_ - bob_; }

 private:
  double alice_;
  double bob_;
};

double reduce_phase(double phi);

struct InterferometerConfig {
  double delta_t = 8.5e-9;      // s, long minus short path transit time
  double visibility = 1.0;
  double long_path_loss_a = 0.0;
  double long_path_loss_b = 0.0;
  double pulse_width = 300e-12;  // s, FWHM

  void validate() const;
};

struct ModulatorParams {
  double v_pi = 1.0;  // V
};

enum class Party { Alice, Bob };
enum class Port { Detector = 0, Complementary = 1 };
enum class Window { Prompt = 0, Central = 1, Delayed = 2 };

struct WindowDistribution {
  // [port][window]
  double prob[2][3] = {};
  double alice_side_exit = 0.0;

  double at(Port port, Window w) const {
    return prob[static_cast<int>(port)][static_cast<int>(w)];
  }
  double total() const;
};

struct BeamsplitterOutput {
  std::complex<double> out1;
  std::complex<double> out2;
};

// Lossless 50/50 splitter with an adjustable phase on the second output.
BeamsplitterOutput beamsplitter(std::complex<double> in1, std::complex<double> in2, double phi);

double b92_phase(Party party, std::uint8_t bit);

// Photon detection probability of the simple Mach-Zehnder: cos^2(dphi / 2).
double mz_detect_prob(const PhasePair& phases);

WindowDistribution tm_window_distribution(const PhasePair& phases,
                                          const InterferometerConfig& cfg);

// Detector-port central-window probability for a pair of B92 bits with
// otherwise lossless optics.
double effective_hit_prob(std::uint8_t alice_bit, std::uint8_t bob_bit, double visibility);

// Implements phi = arccos(v / v_pi).
double voltage_to_phase(double volts, const ModulatorParams& m);

// Interferometer phase carried by a real qubit state: |up> -> 0,
// |right> -> pi/2, |down> -> pi, |left> -> 3pi/2. Detection probability
// against Bob's phase then reproduces the projector pass probability.
double encoded_phase(const qstate::StateVector& state);

struct Histogram {
  double origin = 0.0;     // s, left edge of bin 0
  double bin_width = 0.0;  // s
  std::vector<std::uint64_t> counts;

  double bin_center(std::size_t i) const { return origin + (i + 0.5) * bin_width; }
  // Counts whose bin centre lies in [t0, t1).
  std::uint64_t mass(double t0, double t1) const;
  void write_csv(std::ostream& os) const;
};

struct PeakMasses {
  std::uint64_t prompt = 0;
  std::uint64_t central = 0;
  std::uint64_t delayed = 0;
};

// Monte Carlo time-of-arrival spectrum at the detector port: Poisson photon
// numbers per pulse, one window per photon drawn from the window
// distribution, Gaussian timing jitter with sigma = pulse_width / 2.355.
Histogram arrival_histogram(const PhasePair& phases, const InterferometerConfig& cfg,
                            std::size_t n_pulses, double mean_photons, RandomStream& rng,
                            double bin_width = 50e-12);

// Integrates each peak over +-delta_t/2 about 0, delta_t and 2 delta_t.
PeakMasses peak_masses(const Histogram& h, double delta_t);

}  // namespace b92::photonics
