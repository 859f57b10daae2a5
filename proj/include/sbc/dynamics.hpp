#pragma once

// Regularized vector field, the extended-phase-space Hamiltonian Gamma,
// and the unregularized reduced Newton field used for cross-checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <ranges>

#include "sbc/model.hpp"

namespace sbc {

// Integration vector: (Q1, Q2, P1, P2, t), independent variable s.
template <typename Real>
using RegularizedVector = std::array<Real, 5>;

template <typename Real>
RegularizedVector<Real> pack(const BasicReducedState<Real>& z) {
  return {z.Q1, z.Q2, z.P1, z.P2, z.t};
}

template <typename Real>
BasicReducedState<Real> unpack(const RegularizedVector<Real>& y, Real s) {
  return {y[0], y[1], y[2], y[3], s, y[4]};
}

template <typename Real>
Real gamma(Real Q1, Real Q2, Real P1, Real P2, Real E) {
  using std::sqrt;
  const Real a = Q1 * Q1;
  const Real b = Q2 * Q2;
  if (a == 0 && b == 0) throw DomainError("gamma: total collapse Q1 = Q2 = 0");
  const Real s2 = constants::sqrt2<Real>;
  const Real root = sqrt(a * a + b * b);
  return (P1 * P1 * b + P2 * P2 * a) / 16 - s2 * (a + b) - s2 * a * b / root - a * b * E;
}

template <typename Real>
Real gamma(const BasicReducedState<Real>& z, Real E) {
  return gamma(z.Q1, z.Q2, z.P1, z.P2, E);
}

/// d(Q1, Q2, P1, P2, t)/ds. Each momentum equation is written term by term.
template <typename Real>
RegularizedVector<Real> regularized_rhs(const RegularizedVector<Real>& y, Real E) {
  using std::sqrt;
  const Real Q1 = y[0], Q2 = y[1], P1 = y[2], P2 = y[3];
  const Real Q1sq = Q1 * Q1;
  const Real Q2sq = Q2 * Q2;
  if (Q1sq == 0 && Q2sq == 0) throw DomainError("regularized_rhs: total collapse Q1 = Q2 = 0");
  const Real s2 = constants::sqrt2<Real>;
  const Real root = sqrt(Q1sq * Q1sq + Q2sq * Q2sq);
  const Real root3 = root * root * root;
  const Real Q1p5 = Q1sq * Q1sq * Q1;
  const Real Q2p5 = Q2sq * Q2sq * Q2;

  RegularizedVector<Real> d;
  d[0] = P1 * Q2sq / 8;
  d[1] = P2 * Q1sq / 8;
  d[2] = -P2 * P2 * Q1 / 8 + 2 * s2 * Q1 + 2 * s2 * Q1 * Q2sq / root -
         2 * s2 * Q1p5 * Q2sq / root3 + 2 * E * Q1 * Q2sq;
  d[3] = -P1 * P1 * Q2 / 8 + 2 * s2 * Q2 + 2 * s2 * Q2 * Q1sq / root -
         2 * s2 * Q2p5 * Q1sq / root3 + 2 * E * Q2 * Q1sq;
  d[4] = Q1sq * Q2sq;
  return d;
}

template <typename Real>
RegularizedVector<Real> regularized_rhs(const BasicReducedState<Real>& z, Real E) {
  return regularized_rhs(pack(z), E);
}

/// Callable form for the integrator.
template <typename Real>
struct RegularizedField {
  Real E{};

  RegularizedVector<Real> operator()(Real /*s*/, const RegularizedVector<Real>& y) const {
    return regularized_rhs(y, E);
  }
};

template <typename Real>
struct BasicAcceleration2 {
  Real a1{};
  Real a2{};
};

/// Acceleration of body 1 at (x1, x2) under the four-fold symmetry.
/// Velocities enter only for signature parity with the full field.
template <typename Real>
BasicAcceleration2<Real> newton_reduced_rhs(Real x1, Real x2, Real /*xdot1*/ = 0,
                                            Real /*xdot2*/ = 0) {
  using std::pow;
  using std::sqrt;
  const Real dm = x1 - x2;
  const Real dp = x1 + x2;
  const Real rho2 = x1 * x1 + x2 * x2;
  if (dm == 0 || dp == 0 || rho2 == 0) {
    throw DomainError("newton_reduced_rhs: collision configuration");
  }
  const Real s2 = constants::sqrt2<Real>;
  const Real rho3 = rho2 * sqrt(rho2);
  const Real a1 = (x2 - x1) / (2 * s2 * dm * dm * dm) - 2 * x1 / (8 * rho3) -
                  dp / (2 * s2 * dp * dp * dp);
  const Real a2 = (x1 - x2) / (2 * s2 * dm * dm * dm) - 2 * x2 / (8 * rho3) -
                  dp / (2 * s2 * dp * dp * dp);
  return {a1, a2};
}

/// Closed form of xddot1 + xddot2; strictly negative on the admissible region.
template <typename Real>
Real newton_reduced_sum(Real x1, Real x2) {
  using std::sqrt;
  const Real dp = x1 + x2;
  const Real rho2 = x1 * x1 + x2 * x2;
  if (dp == 0 || rho2 == 0) throw DomainError("newton_reduced_sum: collision configuration");
  return -dp / (4 * rho2 * sqrt(rho2)) - 1 / (constants::sqrt2<Real> * dp * dp);
}

/// Max |Gamma| over a trajectory.
template <typename Real, std::ranges::input_range R>
Real gamma_residual(const R& trajectory, Real E) {
  if (std::ranges::empty(trajectory)) throw DomainError("gamma_residual: empty trajectory");
  using std::abs;
  Real worst = 0;
  for (const BasicReducedState<Real>& z : trajectory) worst = std::max(worst, abs(gamma(z, E)));
  return worst;
}

}  // namespace sbc
