#pragma once

// Shooting on the initial velocity ratio theta: the first simultaneous
// binary collision is launched toward a zero of the net momentum of
// bodies 1 and 2, p2(t0) = P2(s0) / (2 Q2(s0)).

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbc/integrator.hpp"
#include "sbc/model.hpp"
#include "sbc/parallel.hpp"

namespace sbc {

class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi)
      : std::runtime_error(what), lo(lo), hi(hi), f_lo(f_lo), f_hi(f_hi) {}
  double lo, hi, f_lo, f_hi;
};

template <typename Real>
struct BasicBisection {
  Real root{};
  std::vector<std::pair<Real, Real>> bracket_history;
  int iterations = 0;
};

/// Plain bisection on a sign change. Stops when hi - lo <= tol or when the
/// midpoint no longer separates the endpoints in floating point.
template <typename Real, typename Fn>
BasicBisection<Real> bisect(Fn&& f, Real lo, Real hi, Real tol) {
  if (!(lo < hi)) {
    throw BracketError("bisect: degenerate bracket (need lo < hi)", double(lo), double(hi), 0, 0);
  }
  if (!(tol > 0)) throw std::invalid_argument("bisect: tolerance must be positive");
  Real f_lo = f(lo);
  Real f_hi = f(hi);
  if ((f_lo > 0) == (f_hi > 0) || f_lo == 0 || f_hi == 0) {
    if (f_lo == 0 || f_hi == 0) {
      Real r = f_lo == 0 ? lo : hi;
      return {r, {{lo, hi}}, 0};
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "bisect: no sign change on [" << lo << ", " << hi << "]: f(lo) = " << f_lo
        << ", f(hi) = " << f_hi;
    throw BracketError(msg.str(), double(lo), double(hi), double(f_lo), double(f_hi));
  }
  BasicBisection<Real> out;
  out.bracket_history.emplace_back(lo, hi);
  while (hi - lo > tol) {
    const Real mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    const Real f_mid = f(mid);
    ++out.iterations;
    if (f_mid == 0) {
      lo = hi = mid;
      out.bracket_history.emplace_back(lo, hi);
      break;
    }
    if ((f_mid > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    out.bracket_history.emplace_back(lo, hi);
  }
  out.root = lo + (hi - lo) / 2;
  return out;
}

template <typename Real>
struct BasicShootingResult {
  Real theta_star{};
  Real v_star{};
  Real s0{};
  Real t0{};
  Real residual{};
  std::vector<std::pair<Real, Real>> bracket_history;
  int iterations = 0;
};
using ShootingResult = BasicShootingResult<double>;

/// One row of a net-velocity-at-collision curve.
struct SweepRecord {
  int n = 4;
  double theta = 0;
  double signed_magnitude = std::numeric_limits<double>::quiet_NaN();
  double t_collision = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

/// p2 at the first collision; negative when bodies 1 and 2 move toward the origin.
template <typename Real>
Real shooting_function(Real theta, const IntegratorConfig& cfg = {}) {
  if (!(theta > 0 && theta < 1)) throw DomainError("shooting_function: theta must lie in (0, 1)");
  const auto ev = integrate_until_sbc(theta_to_v(theta), cfg);
  return ev.state_at_event.P2 / (2 * ev.state_at_event.Q2);
}

/// Signed magnitude of v1 + v2 at the first collision. The vector lies on
/// y = x with length sqrt(2) (xdot1 + xdot2) = p2 / sqrt(2).
template <typename Real>
Real net_velocity_magnitude(const BasicEventResult<Real>& ev) {
  return ev.state_at_event.P2 / (2 * ev.state_at_event.Q2) / constants::sqrt2<Real>;
}

template <typename Real>
BasicShootingResult<Real> find_theta(Real lo = Real(0.1), Real hi = Real(0.9), Real tol = Real(1e-14),
                                     const IntegratorConfig& cfg = {}) {
  if (!(lo > 0 && hi < 1)) throw DomainError("find_theta: bracket must lie inside (0, 1)");
  auto f = [&](Real th) { return shooting_function(th, cfg); };
  auto bis = bisect(f, lo, hi, tol);
  BasicShootingResult<Real> out;
  out.theta_star = bis.root;
  out.v_star = theta_to_v(bis.root);
  const auto ev = integrate_until_sbc(out.v_star, cfg);
  out.s0 = ev.s_event;
  out.t0 = ev.t_event;
  using std::abs;
  out.residual = abs(ev.state_at_event.P2 / (2 * ev.state_at_event.Q2));
  out.bracket_history = std::move(bis.bracket_history);
  out.iterations = bis.iterations;
  return out;
}

/// Shooting function over a grid; failures are kept as rows with `error` set.
inline std::vector<SweepRecord> sweep_theta(const std::vector<double>& grid,
                                            const IntegratorConfig& cfg = {}, unsigned threads = 0) {
  return parallel_map(
      grid,
      [&cfg](double theta) {
        SweepRecord rec;
        rec.n = 4;
        rec.theta = theta;
        try {
          if (!(theta > 0 && theta < 1)) throw DomainError("theta must lie in (0, 1)");
          const auto ev = integrate_until_sbc(theta_to_v(theta), cfg);
          rec.signed_magnitude = net_velocity_magnitude(ev);
          rec.t_collision = ev.t_event;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
        return rec;
      },
      threads);
}

/// theta_k = k / (count + 1), k = 1..count.
inline std::vector<double> uniform_open_grid(std::size_t count) {
  std::vector<double> g;
  g.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) g.push_back(double(k) / double(count + 1));
  return g;
}

/// Number of sign changes between consecutive successful rows.
inline int count_sign_changes(const std::vector<SweepRecord>& rows) {
  int changes = 0;
  std::optional<bool> prev;
  for (const auto& r : rows) {
    if (!r.ok() || r.signed_magnitude == 0) continue;
    const bool pos = r.signed_magnitude > 0;
    if (prev && *prev != pos) ++changes;
    prev = pos;
  }
  return changes;
}

}  // namespace sbc
