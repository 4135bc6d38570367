#include "b92/hardware.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "b92/error.hpp"

namespace b92::hardware {

void HardwareProfile::validate() const {
  if (!(source.mean_photons >= 0.0)) throw ConfigError("mean_photons must be >= 0");
  if (!(source.pulse_rate > 0.0)) throw ConfigError("pulse_rate must be positive");
  if (!(fiber.length_km >= 0.0)) throw ConfigError("length_km must be >= 0");
  if (!(fiber.attenuation_db_per_km >= 0.0)) throw ConfigError("attenuation_db_per_km must be >= 0");
  if (!(detector.efficiency >= 0.0 && detector.efficiency <= 1.0)) {
    throw ConfigError("efficiency must lie in [0, 1]");
  }
  if (!(detector.dark_rate >= 0.0)) throw ConfigError("dark_rate must be >= 0");
  if (!(detector.gate_window >= 0.0)) throw ConfigError("gate_window must be >= 0");
  if (!(detector.afterpulse_prob0 >= 0.0 && detector.afterpulse_prob0 <= 1.0)) {
    throw ConfigError("afterpulse_prob0 must lie in [0, 1]");
  }
  if (!(detector.afterpulse_tau > 0.0)) throw ConfigError("afterpulse_tau must be positive");
  if (!(detector.max_gate_rate > 0.0)) throw ConfigError("max_gate_rate must be positive");
  if (source.pulse_rate > detector.max_gate_rate) {
    throw ConfigError("pulse_rate exceeds the detector's maximum gate rate");
  }
  if (!(modulator.v_pi > 0.0)) throw ConfigError("v_pi must be positive");
  interferometer.validate();
  dark_probability(detector);
}

unsigned sample_photon_count(const SourceParams& src, RandomStream& rng) {
  if (src.ideal_single_photon) return 1;
  return rng.poisson(src.mean_photons);
}

double fiber_transmission(const FiberParams& f) {
  return std::pow(10.0, -f.attenuation_db_per_km * f.length_km / 10.0);
}

unsigned thin_photons(unsigned n, double transmission, RandomStream& rng) {
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw OutOfRangeError("transmission must lie in [0, 1]");
  }
  return rng.binomial(n, transmission);
}

double dark_probability(const DetectorParams& d) {
  const double p = d.dark_rate * d.gate_window;
  if (p >= 0.1) throw ModelValidityError("dark_rate * gate_window must be << 1");
  return p;
}

double afterpulse_probability(const DetectorParams& d, const DetectorState& st, double now) {
  return d.afterpulse_prob0 * st.trap_charge * std::exp(-(now - st.updated_at) / d.afterpulse_tau);
}

GateResult gate_detector(unsigned photons, double optical_prob, const DetectorParams& d,
                         const DetectorState& st, double now, RandomStream& rng) {
  const double per_photon = optical_prob * d.efficiency;
  const double p_signal = photons == 0 ? 0.0 : 1.0 - std::pow(1.0 - per_photon, photons);
  const double p_dark = dark_probability(d);
  const double p_after = afterpulse_probability(d, st, now);
  const double p_hit = 1.0 - (1.0 - p_signal) * (1.0 - p_dark) * (1.0 - p_after);

  GateResult r;
  r.hit = rng.uniform() < p_hit;
  if (r.hit) {
    r.state = {1.0, now, now};
  } else {
    const double decay = std::exp(-(now - st.updated_at) / d.afterpulse_tau);
    r.state = {st.trap_charge * decay, st.last_avalanche_time, now};
  }
  return r;
}

namespace {

using Setter = std::function<void(HardwareProfile&, const std::string&)>;

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("invalid number for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("invalid flag for " + key + ": '" + v + "'");
}

#define B92_REAL_KEY(name, member) \
  {name, [](HardwareProfile& p, const std::string& v) { p.member = parse_double(name, v); }}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      B92_REAL_KEY("mean_photons", source.mean_photons),
      B92_REAL_KEY("pulse_rate", source.pulse_rate),
      {"ideal_single_photon",
       [](HardwareProfile& p, const std::string& v) {
         p.source.ideal_single_photon = parse_bool("ideal_single_photon", v);
       }},
      B92_REAL_KEY("length_km", fiber.length_km),
      B92_REAL_KEY("attenuation_db_per_km", fiber.attenuation_db_per_km),
      B92_REAL_KEY("efficiency", detector.efficiency),
      B92_REAL_KEY("dark_rate", detector.dark_rate),
      B92_REAL_KEY("gate_window", detector.gate_window),
      B92_REAL_KEY("afterpulse_prob0", detector.afterpulse_prob0),
      B92_REAL_KEY("afterpulse_tau", detector.afterpulse_tau),
      B92_REAL_KEY("max_gate_rate", detector.max_gate_rate),
      B92_REAL_KEY("delta_t", interferometer.delta_t),
      B92_REAL_KEY("visibility", interferometer.visibility),
      B92_REAL_KEY("long_path_loss_a", interferometer.long_path_loss_a),
      B92_REAL_KEY("long_path_loss_b", interferometer.long_path_loss_b),
      B92_REAL_KEY("pulse_width", interferometer.pulse_width),
      B92_REAL_KEY("v_pi", modulator.v_pi),
  };
  return table;
}

#undef B92_REAL_KEY

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

HardwareProfile parse_profile(std::istream& in, HardwareProfile base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->second(base, value);
  }
  base.validate();
  return base;
}

HardwareProfile load_profile(const std::filesystem::path& path, HardwareProfile base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile " + path.string());
  return parse_profile(in, base);
}

void write_profile(std::ostream& out, const HardwareProfile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "mean_photons = " << p.source.mean_photons << '\n'
     << "pulse_rate = " << p.source.pulse_rate << '\n'
     << "ideal_single_photon = " << (p.source.ideal_single_photon ? "true" : "false") << '\n'
     << "length_km = " << p.fiber.length_km << '\n'
     << "attenuation_db_per_km = " << p.fiber.attenuation_db_per_km << '\n'
     << "efficiency = " << p.detector.efficiency << '\n'
     << "dark_rate = " << p.detector.dark_rate << '\n'
     << "gate_window = " << p.detector.gate_window << '\n'
     << "afterpulse_prob0 = " << p.detector.afterpulse_prob0 << '\n'
     << "afterpulse_tau = " << p.detector.afterpulse_tau << '\n'
     << "max_gate_rate = " << p.detector.max_gate_rate << '\n'
     << "delta_t = " << p.interferometer.delta_t << '\n'
     << "visibility = " << p.interferometer.visibility << '\n'
     << "long_path_loss_a = " << p.interferometer.long_path_loss_a << '\n'
     << "long_path_loss_b = " << p.interferometer.long_path_loss_b << '\n'
     << "pulse_width = " << p.interferometer.pulse_width << '\n'
     << "v_pi = " << p.modulator.v_pi << '\n';
  out << os.str();
}

}  // namespace b92::hardware
