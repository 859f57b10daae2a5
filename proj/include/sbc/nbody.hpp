#pragma once

// Planar equal-mass n-body problem for even n: bodies start on the unit
// circle with equal tangential speeds of alternating orientation, and are
// integrated until bodies 1 and 2 meet.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbc/integrator.hpp"
#include "sbc/model.hpp"
#include "sbc/parallel.hpp"
#include "sbc/search.hpp"

namespace sbc::nbody {

template <typename Real>
struct BasicCartesianSystem {
  int n = 0;
  std::vector<Vec2<Real>> positions;
  std::vector<Vec2<Real>> velocities;
  Real t{};
};
using CartesianSystem = BasicCartesianSystem<double>;

inline void require_even_n(int n) {
  if (n < 4 || n % 2 != 0) {
    throw DomainError("nbody: n must be even and at least 4, got " + std::to_string(n));
  }
}

template <typename Real>
std::vector<Vec2<Real>> ring_positions(int n) {
  using std::cos;
  using std::sin;
  std::vector<Vec2<Real>> p(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Real a = 2 * std::numbers::pi_v<Real> * Real(k) / Real(n);
    p[static_cast<std::size_t>(k)] = {cos(a), sin(a)};
  }
  return p;
}

/// Sum over pairs of 1 / |r_i - r_j|.
template <typename Real>
Real potential_energy(const std::vector<Vec2<Real>>& positions) {
  Real u = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const Real d = norm(positions[i] - positions[j]);
      if (d == 0) throw DomainError("potential_energy: coincident bodies");
      u += 1 / d;
    }
  }
  return u;
}

template <typename Real>
Real potential_energy(const BasicCartesianSystem<Real>& sys) {
  return potential_energy(sys.positions);
}

template <typename Real>
Real kinetic_energy(const BasicCartesianSystem<Real>& sys) {
  Real k = 0;
  for (const auto& v : sys.velocities) k += (v.x * v.x + v.y * v.y) / 2;
  return k;
}

template <typename Real>
Real total_energy(const BasicCartesianSystem<Real>& sys) {
  return kinetic_energy(sys) - potential_energy(sys);
}

template <typename Real>
Vec2<Real> linear_momentum(const BasicCartesianSystem<Real>& sys) {
  Vec2<Real> p{};
  for (const auto& v : sys.velocities) p = p + v;
  return p;
}

template <typename Real>
Real angular_momentum(const BasicCartesianSystem<Real>& sys) {
  Real l = 0;
  for (std::size_t i = 0; i < sys.positions.size(); ++i) {
    l += sys.positions[i].x * sys.velocities[i].y - sys.positions[i].y * sys.velocities[i].x;
  }
  return l;
}

/// Equal speed that makes the total energy of the ring zero: sqrt(2 U / n).
template <typename Real = double>
Real v_max_n(int n) {
  require_even_n(n);
  using std::sqrt;
  return sqrt(2 * potential_energy(ring_positions<Real>(n)) / Real(n));
}

template <typename Real>
BasicCartesianSystem<Real> initial_config(int n, Real theta) {
  require_even_n(n);
  if (!(theta > 0 && theta < 1)) throw DomainError("initial_config: theta must lie in (0, 1)");
  BasicCartesianSystem<Real> sys;
  sys.n = n;
  sys.positions = ring_positions<Real>(n);
  const Real speed = theta * v_max_n<Real>(n);
  sys.velocities.resize(sys.positions.size());
  for (int k = 0; k < n; ++k) {
    const auto& p = sys.positions[static_cast<std::size_t>(k)];
    // Counter-clockwise tangent for even k, clockwise for odd k.
    const Real orient = (k % 2 == 0) ? Real(1) : Real(-1);
    sys.velocities[static_cast<std::size_t>(k)] = {-orient * speed * p.y, orient * speed * p.x};
  }
  return sys;
}

/// Pairwise Newtonian accelerations, G = m = 1.
template <typename Real>
std::vector<Vec2<Real>> cartesian_rhs(const std::vector<Vec2<Real>>& positions) {
  using std::sqrt;
  std::vector<Vec2<Real>> acc(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const Vec2<Real> d = positions[j] - positions[i];
      const Real r2 = d.x * d.x + d.y * d.y;
      if (r2 == 0) throw DomainError("cartesian_rhs: coincident bodies");
      const Real inv3 = 1 / (r2 * sqrt(r2));
      acc[i] = acc[i] + inv3 * d;
      acc[j] = acc[j] - inv3 * d;
    }
  }
  return acc;
}

template <typename Real>
std::vector<Vec2<Real>> cartesian_rhs(const BasicCartesianSystem<Real>& sys) {
  return cartesian_rhs(sys.positions);
}

// Flat layout [x0, y0, ..., x_{n-1}, y_{n-1}, vx0, vy0, ...].
template <typename Real>
std::vector<Real> flatten(const BasicCartesianSystem<Real>& sys) {
  const std::size_t n = sys.positions.size();
  std::vector<Real> y(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[2 * i] = sys.positions[i].x;
    y[2 * i + 1] = sys.positions[i].y;
    y[2 * n + 2 * i] = sys.velocities[i].x;
    y[2 * n + 2 * i + 1] = sys.velocities[i].y;
  }
  return y;
}

template <typename Real>
BasicCartesianSystem<Real> unflatten(const std::vector<Real>& y, Real t) {
  const std::size_t n = y.size() / 4;
  BasicCartesianSystem<Real> sys;
  sys.n = static_cast<int>(n);
  sys.t = t;
  sys.positions.resize(n);
  sys.velocities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sys.positions[i] = {y[2 * i], y[2 * i + 1]};
    sys.velocities[i] = {y[2 * n + 2 * i], y[2 * n + 2 * i + 1]};
  }
  return sys;
}

template <typename Real>
struct CartesianField {
  std::vector<Real> operator()(Real /*t*/, const std::vector<Real>& y) const {
    const std::size_t n = y.size() / 4;
    std::vector<Real> d(4 * n);
    std::vector<Vec2<Real>> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = {y[2 * i], y[2 * i + 1]};
    const auto acc = cartesian_rhs(pos);
    for (std::size_t i = 0; i < 2 * n; ++i) d[i] = y[2 * n + i];
    for (std::size_t i = 0; i < n; ++i) {
      d[2 * n + 2 * i] = acc[i].x;
      d[2 * n + 2 * i + 1] = acc[i].y;
    }
    return d;
  }
};

/// Time weight w = (sum d_ij^-3 / w0)^(-1/2), smooth and ~ d_min^(3/2)
/// near a close pair. w0 normalises the initial ring to w = 1.
template <typename Real>
Real time_weight(const std::vector<Real>& y, Real w0) {
  using std::sqrt;
  const std::size_t n = (y.size() - 1) / 4;
  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real dx = y[2 * i] - y[2 * j];
      const Real dy = y[2 * i + 1] - y[2 * j + 1];
      const Real r2 = dx * dx + dy * dy;
      sum += 1 / (r2 * sqrt(r2));
    }
  }
  return 1 / sqrt(sum / w0);
}

/// Newton's equations in fictitious time tau with dt/dtau = time_weight.
/// Layout: the flat Cartesian state followed by t.
template <typename Real>
struct TimeScaledCartesianField {
  Real w0{};

  std::vector<Real> operator()(Real /*tau*/, const std::vector<Real>& y) const {
    const std::size_t m = y.size() - 1;
    const std::vector<Real> phys(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<Real> d = CartesianField<Real>{}(y[m], phys);
    const Real w = time_weight(y, w0);
    for (auto& x : d) x *= w;
    d.push_back(w);
    return d;
  }
};

template <typename Real>
Real pair_distance(const std::vector<Real>& y, std::size_t i, std::size_t j) {
  using std::hypot;
  return hypot(y[2 * i] - y[2 * j], y[2 * i + 1] - y[2 * j + 1]);
}

template <typename Real>
Real min_pair_distance(const std::vector<Real>& y) {
  const std::size_t n = y.size() / 4;
  Real best = std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, pair_distance(y, i, j));
  }
  return best;
}

template <typename Real>
struct BasicCollisionReport {
  Real t_collision{};
  std::pair<int, int> pair{1, 2};
  Vec2<Real> net_velocity{};
  Real signed_magnitude{};
  Real min_distance_reached{};
  bool components_share_sign = true;
  long steps = 0;
  BasicCartesianSystem<Real> final_state;
};
using CollisionReport = BasicCollisionReport<double>;

struct CollisionOptions {
  double eps_collision = 1e-8;
  double t_max = 1e3;
  // Called after each accepted step with (t, state); used by tests.
  std::function<void(double, const std::vector<double>&)> observer;
};

class UnexpectedPairError : public std::runtime_error {
 public:
  UnexpectedPairError(const std::string& what, int i, int j)
      : std::runtime_error(what), i(i), j(j) {}
  int i, j;
};

/// Bodies 2k and 2k+1 (0-based) are the pairs that should meet. Returns the
/// first other pair (1-based) closer than eps, if any. `y` may carry a
/// trailing time component.
template <typename Real>
std::optional<std::pair<int, int>> first_unexpected_pair(const std::vector<Real>& y, Real eps) {
  const std::size_t nb = y.size() / 4;
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = i + 1; j < nb; ++j) {
      if (i % 2 == 0 && j == i + 1) continue;
      if (pair_distance(y, i, j) <= eps) return std::pair<int, int>(int(i + 1), int(j + 1));
    }
  }
  return std::nullopt;
}

/// Integrate until |r1 - r2| = eps_collision and read off v1 + v2 there.
///
/// The integration runs in fictitious time tau with dt/dtau ~ d_min^(3/2),
/// so physical steps shrink with the closest approach while tau steps stay
/// of order one; error control acts on the tau steps.
template <typename Real>
BasicCollisionReport<Real> integrate_to_first_collision(int n, Real theta,
                                                        const CollisionOptions& opts = {},
                                                        const IntegratorConfig& cfg = {}) {
  if (!(opts.eps_collision > 0)) throw DomainError("eps_collision must be positive");
  using State = std::vector<Real>;
  const auto sys0 = initial_config(n, theta);
  State y0 = flatten(sys0);
  y0.push_back(Real(0));
  Real w0 = 0;
  {
    using std::sqrt;
    const auto ring = sys0.positions;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      for (std::size_t j = i + 1; j < ring.size(); ++j) {
        const Real d = norm(ring[i] - ring[j]);
        w0 += 1 / (d * d * d);
      }
    }
  }
  const std::size_t m = y0.size() - 1;
  DormandPrince54<State, TimeScaledCartesianField<Real>> stepper(TimeScaledCartesianField<Real>{w0},
                                                                 cfg);
  stepper.reset(Real(0), y0);

  const Real eps = Real(opts.eps_collision);
  auto g = [eps](Real, const State& y) { return pair_distance(y, 0, 1) - eps; };
  auto check_other_pairs = [&](const State& y) {
    if (auto bad = first_unexpected_pair(y, eps)) {
      throw UnexpectedPairError("integrate_to_first_collision: bodies " + std::to_string(bad->first) +
                                    " and " + std::to_string(bad->second) +
                                    " collided before 1 and 2",
                                bad->first, bad->second);
    }
  };
  auto physical = [m](const State& y) {
    return unflatten(State(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m)), y[m]);
  };

  Real g_prev = g(0, stepper.y());
  try {
    for (;;) {
      stepper.step();
      const State& y = stepper.y();
      const Real g_now = g(stepper.s(), y);
      if (crosses(g_prev, g_now, Crossing::Falling)) {
        // Distance is resolved to a part in 1e6 of eps.
        auto ev = locate_in_last_step(stepper, g, g_prev, g_now, 1e-6 * double(eps));
        check_other_pairs(ev.y);
        BasicCollisionReport<Real> rep;
        rep.final_state = physical(ev.y);
        rep.t_collision = rep.final_state.t;
        const auto& v = rep.final_state.velocities;
        rep.net_velocity = v[0] + v[1];
        using std::abs;
        rep.components_share_sign =
            (rep.net_velocity.x >= 0) == (rep.net_velocity.y >= 0) ||
            std::min(abs(rep.net_velocity.x), abs(rep.net_velocity.y)) < Real(1e-9);
        const Real mag = norm(rep.net_velocity);
        rep.signed_magnitude = (rep.net_velocity.x + rep.net_velocity.y) < 0 ? -mag : mag;
        rep.min_distance_reached = pair_distance(ev.y, 0, 1);
        rep.steps = stepper.steps();
        return rep;
      }
      check_other_pairs(y);
      if (opts.observer) opts.observer(double(y[m]), State(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m)));
      if (y[m] >= Real(opts.t_max)) {
        throw IntegrationError(IntegrationError::Kind::NoEvent,
                               "integrate_to_first_collision: no collision before t_max");
      }
      g_prev = g_now;
    }
  } catch (const IntegrationError& e) {
    if (e.kind() == IntegrationError::Kind::MaxSteps) {
      throw IntegrationError(IntegrationError::Kind::NoEvent,
                             std::string("integrate_to_first_collision: no collision; ") + e.what());
    }
    throw;
  }
}

inline std::vector<SweepRecord> sweep_n(int n, const std::vector<double>& grid,
                                        const CollisionOptions& opts = {},
                                        const IntegratorConfig& cfg = {}, unsigned threads = 0) {
  require_even_n(n);
  return parallel_map(
      grid,
      [&](double theta) {
        SweepRecord rec;
        rec.n = n;
        rec.theta = theta;
        try {
          const auto rep = integrate_to_first_collision(n, theta, opts, cfg);
          rec.signed_magnitude = rep.signed_magnitude;
          rec.t_collision = rep.t_collision;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
        return rec;
      },
      threads);
}

/// Critical theta for n bodies by bisection on the signed collision magnitude.
inline ShootingResult find_theta_n(int n, double lo, double hi, double tol,
                                   const CollisionOptions& opts = {},
                                   const IntegratorConfig& cfg = {}) {
  require_even_n(n);
  if (!(lo > 0 && hi < 1)) throw DomainError("find_theta_n: bracket must lie inside (0, 1)");
  auto f = [&](double th) { return integrate_to_first_collision(n, th, opts, cfg).signed_magnitude; };
  auto bis = bisect(f, lo, hi, tol);
  ShootingResult out;
  out.theta_star = bis.root;
  out.v_star = bis.root * v_max_n(n);
  const auto rep = integrate_to_first_collision(n, bis.root, opts, cfg);
  out.t0 = rep.t_collision;
  out.s0 = std::numeric_limits<double>::quiet_NaN();
  out.residual = std::abs(rep.signed_magnitude);
  out.bracket_history = std::move(bis.bracket_history);
  out.iterations = bis.iterations;
  return out;
}

}  // namespace sbc::nbody
