#pragma once

#include <cstdint>
#include <random>

namespace b92 {

// Seedable source of randomness handed explicitly to every stochastic
// operation. Nothing in the library draws from global state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  unsigned poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<unsigned>(mean)(engine_);
  }

  unsigned binomial(unsigned n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<unsigned>(n, p)(engine_);
  }

  double normal(double mean, double sigma) {
    return std::normal_distribution<double>(mean, sigma)(engine_);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace b92
