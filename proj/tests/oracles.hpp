#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's implementation paths it is compared against.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

using cd = std::complex<double>;
using Vec = std::array<cd, 2>;

inline double born(const Vec& psi, const Vec& onto) {
  const cd amp = std::conj(onto[0]) * psi[0] + std::conj(onto[1]) * psi[1];
  return std::norm(amp);
}

inline const double kH = 1.0 / std::sqrt(2.0);
inline const Vec kUp{cd(1), cd(0)};
inline const Vec kDown{cd(0), cd(1)};
inline const Vec kRight{cd(kH), cd(kH)};
inline const Vec kLeft{cd(kH), cd(-kH)};

// Exact statistics of the fixed-projection intercept-resend attack in the
// ideal channel, by enumerating Alice's bit, Eve's outcome and Bob's bit.
struct EveExact {
  double hit_rate = 0;             // sifted fraction
  double sifted_ber = 0;           // errors / hits
  double zero_bias = 0;            // zeros in Bob's sifted bits
  double p_alice0_given_guess0 = 0;
  double p_guess1 = 0;
  double eve_accuracy = 0;         // P(guess == Alice's bit)
  double hit_given_bits_differ = 0;
};

inline EveExact enumerate_fixed_projection_eve() {
  const Vec prep[2] = {kUp, kRight};
  const Vec bob_onto[2] = {kLeft, kDown};
  double hits = 0, errors = 0, bob_zero_hits = 0, guess0 = 0, guess0_correct = 0, guess1 = 0;
  double correct = 0, diff_hits = 0;
  for (int a = 0; a < 2; ++a) {
    const double p_pass = born(prep[a], kUp);
    const struct { double p; int guess; Vec fwd; } branches[2] = {{p_pass, 0, kUp},
                                                                   {1 - p_pass, 1, kDown}};
    for (const auto& br : branches) {
      const double w = 0.5 * br.p;
      if (br.guess == 0) {
        guess0 += w;
        if (a == 0) guess0_correct += w;
      } else {
        guess1 += w;
      }
      if (br.guess == a) correct += w;
      for (int b = 0; b < 2; ++b) {
        const double h = 0.5 * w * born(br.fwd, bob_onto[b]);
        hits += h;
        if (a != b) {
          errors += h;
          diff_hits += h;
        }
        if (b == 0) bob_zero_hits += h;
      }
    }
  }
  EveExact e;
  e.hit_rate = hits;
  e.sifted_ber = errors / hits;
  e.zero_bias = bob_zero_hits / hits;
  e.p_alice0_given_guess0 = guess0_correct / guess0;
  e.p_guess1 = guess1;
  e.eve_accuracy = correct;
  e.hit_given_bits_differ = diff_hits / 0.5;
  return e;
}

// Brute-force block-parity reconciliation written directly from the rule:
// compare the XOR of each block; drop mismatched blocks; from matched
// blocks keep every bit except the last.
struct BruteReconcile {
  std::vector<std::uint8_t> alice, bob;
  std::size_t dropped = 0;
};

inline BruteReconcile brute_reconcile(const std::vector<std::uint8_t>& a,
                                      const std::vector<std::uint8_t>& b, std::size_t block) {
  BruteReconcile r;
  std::size_t i = 0;
  while (i < a.size()) {
    const std::size_t len = std::min(block, a.size() - i);
    int pa = 0, pb = 0;
    for (std::size_t k = 0; k < len; ++k) {
      pa += a[i + k];
      pb += b[i + k];
    }
    if (pa % 2 == pb % 2) {
      for (std::size_t k = 0; k + 1 < len; ++k) {
        r.alice.push_back(a[i + k]);
        r.bob.push_back(b[i + k]);
      }
    } else {
      ++r.dropped;
    }
    i += len;
  }
  return r;
}

// Upper-tail p-value of Pearson's chi-square statistic for the given
// observed counts against the expected counts.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected,
                           int extra_constraints = 0) {
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const double dof = static_cast<double>(observed.size()) - 1.0 - extra_constraints;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

inline double poisson_pmf(unsigned k, double mean) {
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

}  // namespace oracle
