#pragma once

// Two-dimensional Hilbert-space core: qubit states, rank-1 projectors,
// Born-rule probabilities and projective-measurement collapse.
//
// Everything is templated on the real scalar type; the double-precision
// aliases at the bottom are what the rest of the library uses.

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <limits>

#include "b92/error.hpp"
#include "b92/random.hpp"

namespace b92::qstate {

template <typename Scalar>
inline constexpr Scalar kTolerance =
    std::max(Scalar(1e-12), Scalar(100) * std::numeric_limits<Scalar>::epsilon());

template <typename Scalar>
using Amplitudes = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

template <typename Scalar>
using Operator = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

// Normalised qubit state in the {|up>, |down>} basis.
template <typename Scalar>
class BasicStateVector {
 public:
  using Complex = std::complex<Scalar>;

  BasicStateVector(Complex up, Complex down) : amps_(up, down) { validate(); }
  explicit BasicStateVector(const Amplitudes<Scalar>& amps) : amps_(amps) { validate(); }

  // Rescales an arbitrary non-zero vector onto the unit sphere.
  static BasicStateVector normalized(const Amplitudes<Scalar>& v) {
    const Scalar n = v.norm();
    if (!(n > Scalar(0))) throw InvalidStateError("cannot normalise the zero vector");
    return BasicStateVector(Amplitudes<Scalar>(v / n));
  }

  Complex up() const { return amps_(0); }
  Complex down() const { return amps_(1); }
  const Amplitudes<Scalar>& amplitudes() const { return amps_; }

 private:
  void validate() const {
    if (std::abs(amps_.squaredNorm() - Scalar(1)) > kTolerance<Scalar> * 10) {
      throw InvalidStateError("state vector is not normalised");
    }
  }

  Amplitudes<Scalar> amps_;
};

// Rank-1 orthogonal projector |v><v|.
template <typename Scalar>
class BasicProjector {
 public:
  explicit BasicProjector(const BasicStateVector<Scalar>& v)
      : matrix_(v.amplitudes() * v.amplitudes().adjoint()) {}

  // Accepts a raw matrix after checking it is Hermitian, idempotent and of
  // unit trace.
  static BasicProjector from_matrix(const Operator<Scalar>& m) {
    const Scalar tol = kTolerance<Scalar>;
    if ((m - m.adjoint()).norm() > tol) throw InvalidStateError("projector is not Hermitian");
    if ((m * m - m).norm() > tol) throw InvalidStateError("projector is not idempotent");
    if (std::abs(m.trace() - std::complex<Scalar>(1)) > tol) {
      throw InvalidStateError("projector does not have unit trace");
    }
    return BasicProjector(m);
  }

  const Operator<Scalar>& matrix() const { return matrix_; }

  Operator<Scalar> complement() const { return Operator<Scalar>::Identity() - matrix_; }

 private:
  explicit BasicProjector(const Operator<Scalar>& m) : matrix_(m) {}

  Operator<Scalar> matrix_;
};

template <typename Scalar>
struct BasicPauliSet {
  Operator<Scalar> sigma1;
  Operator<Scalar> sigma2;
  Operator<Scalar> sigma3;

  const Operator<Scalar>& operator[](int i) const {
    return i == 0 ? sigma1 : (i == 1 ? sigma2 : sigma3);
  }
};

template <typename Scalar = double>
BasicPauliSet<Scalar> pauli() {
  using C = std::complex<Scalar>;
  BasicPauliSet<Scalar> s;
  s.sigma1 << C(0), C(1), C(1), C(0);
  s.sigma2 << C(0), C(0, -1), C(0, 1), C(0);
  s.sigma3 << C(1), C(0), C(0), C(-1);
  return s;
}

// Levi-Civita symbol on indices {0, 1, 2}.
constexpr int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((i + 1) % 3 == j) ? 1 : -1;
}

template <typename Scalar>
struct BasicBasisStates {
  BasicStateVector<Scalar> up;
  BasicStateVector<Scalar> down;
  BasicStateVector<Scalar> right;
  BasicStateVector<Scalar> left;
};

template <typename Scalar = double>
BasicBasisStates<Scalar> basis_states() {
  using C = std::complex<Scalar>;
  const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
  return {BasicStateVector<Scalar>(C(1), C(0)), BasicStateVector<Scalar>(C(0), C(1)),
          BasicStateVector<Scalar>(C(h), C(h)), BasicStateVector<Scalar>(C(h), C(-h))};
}

template <typename Scalar>
std::complex<Scalar> inner(const BasicStateVector<Scalar>& a, const BasicStateVector<Scalar>& b) {
  return a.amplitudes().dot(b.amplitudes());  // conjugate-linear in a
}

template <typename Scalar>
Scalar norm(const BasicStateVector<Scalar>& v) {
  return v.amplitudes().norm();
}

// Equality up to an unobservable global phase.
template <typename Scalar>
bool same_ray(const BasicStateVector<Scalar>& a, const BasicStateVector<Scalar>& b,
              Scalar tol = kTolerance<Scalar>) {
  return std::abs(std::abs(inner(a, b)) - Scalar(1)) <= tol;
}

template <typename Scalar>
Scalar pass_probability(const BasicStateVector<Scalar>& psi, const BasicProjector<Scalar>& p) {
  const std::complex<Scalar> e = psi.amplitudes().dot(p.matrix() * psi.amplitudes());
  assert(std::abs(e.imag()) <= kTolerance<Scalar>);
  return std::clamp(e.real(), Scalar(0), Scalar(1));
}

enum class Outcome { Pass, Fail };

template <typename Scalar>
struct BasicMeasurement {
  Outcome outcome;
  BasicStateVector<Scalar> collapsed;
};

// Projective measurement: Pass with the Born probability, then the state
// collapses onto the image of P (Pass) or of 1 - P (Fail).
template <typename Scalar>
BasicMeasurement<Scalar> measure(const BasicStateVector<Scalar>& psi,
                                 const BasicProjector<Scalar>& p, RandomStream& rng) {
  const Scalar prob = pass_probability(psi, p);
  const bool pass = rng.uniform() < static_cast<double>(prob);
  const Amplitudes<Scalar> image =
      pass ? Amplitudes<Scalar>(p.matrix() * psi.amplitudes())
           : Amplitudes<Scalar>(p.complement() * psi.amplitudes());
  // A branch is only sampled when its probability, the squared norm of
  // image, is strictly positive.
  assert(image.norm() > Scalar(0));
  return {pass ? Outcome::Pass : Outcome::Fail, BasicStateVector<Scalar>::normalized(image)};
}

template <typename Scalar>
Scalar commutator_norm(const BasicProjector<Scalar>& a, const BasicProjector<Scalar>& b) {
  return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
}

using StateVector = BasicStateVector<double>;
using Projector = BasicProjector<double>;
using PauliSet = BasicPauliSet<double>;
using BasisStates = BasicBasisStates<double>;
using Measurement = BasicMeasurement<double>;

}  // namespace b92::qstate
