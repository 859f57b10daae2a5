#pragma once

// Domain types and coordinate maps for the symmetric planar four-body
// problem with simultaneous binary collisions.
//
// Four representations of the same point of phase space are used:
//   Cartesian   four bodies in the plane (PhysicalFrame)
//   reduced     body 1 at (x1, x2) with conjugate momenta w_i = 4 xdot_i
//   intermediate q1 = x1 - x2, q2 = x1 + x2 with momenta p_i
//   regularized q_i = Q_i^2, P_i = 2 Q_i p_i, time ds = dt / (q1 q2)
//
// All masses are 1 and G = 1.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace sbc {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Real>
struct Vec2 {
  Real x{};
  Real y{};

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Real s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

template <typename Real>
Real norm(Vec2<Real> a) {
  using std::hypot;
  return hypot(a.x, a.y);
}

namespace constants {

template <typename Real>
inline constexpr Real sqrt2 = std::numbers::sqrt2_v<Real>;

// Potential energy of the unit square configuration, 2 sqrt(2) + 1.
template <typename Real>
inline constexpr Real initial_potential = 2 * sqrt2<Real> + 1;

// |P1| at any simultaneous binary collision on the zero-Gamma shell,
// 4 * 2^(1/4).
template <typename Real>
inline const Real collision_momentum = 4 * std::sqrt(sqrt2<Real>);

}  // namespace constants

/// Speed giving zero total energy for the square configuration.
template <typename Real = double>
Real v_max() {
  using std::sqrt;
  return sqrt(constants::initial_potential<Real> / 2);
}

/// Total energy for initial speed `v`: kinetic 4 * v^2 / 2 minus U(0).
template <typename Real>
Real energy_from_v(Real v) {
  if (!(v >= 0)) throw DomainError("energy_from_v: speed must be nonnegative");
  return 2 * v * v - constants::initial_potential<Real>;
}

template <typename Real>
Real theta_to_v(Real theta) {
  if (!(theta >= 0 && theta <= 1)) {
    throw DomainError("theta_to_v: theta must lie in [0, 1], got " + std::to_string(theta));
  }
  return theta * v_max<Real>();
}

template <typename Real>
struct BasicSystemParams {
  Real v{};
  Real E{};
  Real theta{};

  static BasicSystemParams from_theta(Real theta) {
    Real v = theta_to_v(theta);
    return {v, energy_from_v(v), theta};
  }
  static BasicSystemParams from_v(Real v) { return {v, energy_from_v(v), v / v_max<Real>()}; }

  bool bound() const { return E < 0; }
};

// Regularized phase-space point plus regularized time s and physical time t.
template <typename Real>
struct BasicReducedState {
  Real Q1{};
  Real Q2{};
  Real P1{};
  Real P2{};
  Real s{};
  Real t{};

  std::array<Real, 4> phase() const { return {Q1, Q2, P1, P2}; }
  friend bool operator==(const BasicReducedState&, const BasicReducedState&) = default;
};

template <typename Real>
struct BasicIntermediateState {
  Real q1{};
  Real q2{};
  Real p1{};
  Real p2{};
};

template <typename Real>
struct BasicPhysicalFrame {
  Real t{};
  std::array<Vec2<Real>, 4> positions{};
  // Empty when the frame was taken at a collision, where the relative
  // velocity of the colliding pair is unbounded.
  std::optional<std::array<Vec2<Real>, 4>> velocities{};
  // xdot1 + xdot2 = p2 / 2, finite even at Q1 = 0.
  Real velocity_sum{};
};

using SystemParams = BasicSystemParams<double>;
using ReducedState = BasicReducedState<double>;
using IntermediateState = BasicIntermediateState<double>;
using PhysicalFrame = BasicPhysicalFrame<double>;

template <typename Real>
BasicReducedState<Real> initial_reduced_state(Real v) {
  if (!(v > 0)) throw DomainError("initial_reduced_state: speed must be positive");
  return {1, 1, -4 * v, 4 * v, 0, 0};
}

/// Choose the representative with Q1, Q2 >= 0.
///
/// (Q_i, P_i) and (-Q_i, -P_i) map to the same q_i and p_i, so the
/// regularized chart double covers each pair coordinate. The flow runs
/// straight through Q_i = 0 and leaves the Q_i >= 0 sheet after every
/// collision; this folds it back without touching s or t.
template <typename Real>
BasicReducedState<Real> canonical_chart(BasicReducedState<Real> z) {
  if (z.Q1 < 0) {
    z.Q1 = -z.Q1;
    z.P1 = -z.P1;
  }
  if (z.Q2 < 0) {
    z.Q2 = -z.Q2;
    z.P2 = -z.P2;
  }
  return z;
}

// Reduced (x1, x2, w1, w2) for body 1.
template <typename Real>
struct BasicReducedCoords {
  Real x1{};
  Real x2{};
  Real w1{};
  Real w2{};
};
using ReducedCoords = BasicReducedCoords<double>;

template <typename Real>
BasicIntermediateState<Real> to_intermediate(const BasicReducedCoords<Real>& r) {
  // w1 = p1 + p2, w2 = p2 - p1
  return {r.x1 - r.x2, r.x1 + r.x2, (r.w1 - r.w2) / 2, (r.w1 + r.w2) / 2};
}

template <typename Real>
BasicReducedCoords<Real> coords_from_intermediate(const BasicIntermediateState<Real>& s) {
  return {(s.q1 + s.q2) / 2, (s.q2 - s.q1) / 2, s.p1 + s.p2, s.p2 - s.p1};
}

/// q_i = Q_i^2, p_i = P_i / (2 Q_i). Throws at Q_i = 0.
template <typename Real>
BasicIntermediateState<Real> to_intermediate(const BasicReducedState<Real>& z) {
  if (z.Q1 == 0 || z.Q2 == 0) {
    throw DomainError("to_intermediate: momentum p_i is singular at Q_i = 0");
  }
  return {z.Q1 * z.Q1, z.Q2 * z.Q2, z.P1 / (2 * z.Q1), z.P2 / (2 * z.Q2)};
}

/// Inverse of to_intermediate(ReducedState) on the Q_i > 0 sheet; s and t are passed through.
template <typename Real>
BasicReducedState<Real> state_from_intermediate(const BasicIntermediateState<Real>& i, Real s = 0,
                                          Real t = 0) {
  if (!(i.q1 > 0 && i.q2 > 0)) {
    throw DomainError("state_from_intermediate: q_i must be positive");
  }
  using std::sqrt;
  Real Q1 = sqrt(i.q1);
  Real Q2 = sqrt(i.q2);
  return {Q1, Q2, 2 * Q1 * i.p1, 2 * Q2 * i.p2, s, t};
}

template <typename Real>
BasicReducedState<Real> physical_to_reduced(const BasicReducedCoords<Real>& r, Real s = 0,
                                            Real t = 0) {
  return state_from_intermediate(to_intermediate(r), s, t);
}

template <typename Real>
std::array<Vec2<Real>, 4> symmetric_bodies(Real x1, Real x2) {
  return {{{x1, x2}, {x2, x1}, {-x1, -x2}, {-x2, -x1}}};
}

/// Recover all four bodies from a regularized state.
///
/// Positions and velocity_sum are always filled. Full velocities are
/// omitted when Q1 or Q2 is zero, or throw if `require_velocities` is set.
template <typename Real>
BasicPhysicalFrame<Real> reduced_to_physical(const BasicReducedState<Real>& z,
                                             bool require_velocities = false) {
  if (z.Q1 == 0 && z.Q2 == 0) throw DomainError("reduced_to_physical: total collapse");
  const Real q1 = z.Q1 * z.Q1;
  const Real q2 = z.Q2 * z.Q2;
  BasicPhysicalFrame<Real> frame;
  frame.t = z.t;
  const Real x1 = (q1 + q2) / 2;
  const Real x2 = (q2 - q1) / 2;
  frame.positions = symmetric_bodies(x1, x2);

  if (z.Q1 == 0 || z.Q2 == 0) {
    if (require_velocities) {
      throw DomainError("reduced_to_physical: velocities requested at a binary collision");
    }
    // Only the non-colliding pair has a finite momentum there.
    if (z.Q2 != 0) frame.velocity_sum = z.P2 / (4 * z.Q2);
    return frame;
  }
  const auto inter = to_intermediate(z);
  const auto coords = coords_from_intermediate(inter);
  const Real xd1 = coords.w1 / 4;
  const Real xd2 = coords.w2 / 4;
  frame.velocities = symmetric_bodies(xd1, xd2);
  frame.velocity_sum = inter.p2 / 2;
  return frame;
}

template <typename Real>
BasicReducedCoords<Real> reduced_coords(const BasicReducedState<Real>& z) {
  return coords_from_intermediate(to_intermediate(z));
}

/// Hamiltonian of the symmetry-reduced system in (x1, x2, w1, w2).
template <typename Real>
Real hamiltonian_physical(const BasicReducedCoords<Real>& r) {
  using std::sqrt;
  const Real dm = r.x1 - r.x2;
  const Real dp = r.x1 + r.x2;
  const Real rho2 = r.x1 * r.x1 + r.x2 * r.x2;
  if (dm == 0 || dp == 0 || rho2 == 0) {
    throw DomainError("hamiltonian_physical: collision configuration");
  }
  const Real s2 = constants::sqrt2<Real>;
  return (r.w1 * r.w1 + r.w2 * r.w2) / 8 - s2 / dm - s2 / dp - 1 / sqrt(rho2);
}

template <typename Real>
Real hamiltonian_physical(const BasicReducedState<Real>& z) {
  return hamiltonian_physical(reduced_coords(z));
}

}  // namespace sbc
