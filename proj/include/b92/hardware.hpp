#pragma once

// Stochastic physical layer: attenuated-laser source, fibre loss and a gated
// avalanche photodiode with dark counts and afterpulsing.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "b92/photonics.hpp"
#include "b92/random.hpp"

namespace b92::hardware {

struct SourceParams {
  double mean_photons = 0.1;  // photons per pulse
  double pulse_rate = 1e4;    // Hz, one pulse per bit attempt
  bool ideal_single_photon = false;
};

struct FiberParams {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.3;  // 1.3 um telecom window
};

// Alternate attenuation constant for the 600-800 nm window.
inline constexpr double kVisibleAttenuationDbPerKm = 3.0;

struct DetectorParams {
  double efficiency = 0.2;
  double dark_rate = 50e3;       // Hz
  double gate_window = 100e-12;  // s
  double afterpulse_prob0 = 0.0;
  double afterpulse_tau = 3e-6;  // s
  double max_gate_rate = 100e3;  // Hz
};

// Afterpulse trap occupancy. The hazard at time t is
// afterpulse_prob0 * trap_charge * exp(-(t - updated_at) / tau), which
// after a single avalanche equals prob0 * exp(-(t - last_avalanche) / tau).
struct DetectorState {
  double trap_charge = 0.0;
  double last_avalanche_time = 0.0;
  double updated_at = 0.0;
};

struct HardwareProfile {
  SourceParams source;
  FiberParams fiber;
  DetectorParams detector;
  photonics::InterferometerConfig interferometer;
  photonics::ModulatorParams modulator;

  void validate() const;
};

unsigned sample_photon_count(const SourceParams& src, RandomStream& rng);

double fiber_transmission(const FiberParams& f);

unsigned thin_photons(unsigned n, double transmission, RandomStream& rng);

// Probability of a dark count inside one gate. Only meaningful while the
// product is small; rejects products of 0.1 or more.
double dark_probability(const DetectorParams& d);

double afterpulse_probability(const DetectorParams& d, const DetectorState& st, double now);

struct GateResult {
  bool hit = false;
  DetectorState state;
};

// One gate of the detector. Each of `photons` arriving photons reaches the
// active area with optical_prob and is registered with the detector
// efficiency; signal, dark count and afterpulse combine as independent
// Bernoulli hazards.
GateResult gate_detector(unsigned photons, double optical_prob, const DetectorParams& d,
                         const DetectorState& st, double now, RandomStream& rng);

// Flat key=value loader; keys are the field names above, '#' starts a
// comment. Unknown keys and malformed values raise ConfigError.
HardwareProfile parse_profile(std::istream& in, HardwareProfile base = {});
HardwareProfile load_profile(const std::filesystem::path& path, HardwareProfile base = {});
void write_profile(std::ostream& out, const HardwareProfile& p);

}  // namespace b92::hardware
