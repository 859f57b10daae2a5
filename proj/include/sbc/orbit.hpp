#pragma once

// Periodicity and reversal-symmetry diagnostics for the symmetric orbit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sbc/dynamics.hpp"
#include "sbc/integrator.hpp"
#include "sbc/model.hpp"

namespace sbc {

template <typename Real>
Real max_abs_diff(const std::array<Real, 4>& a, const std::array<Real, 4>& b) {
  using std::abs;
  Real m = 0;
  for (std::size_t i = 0; i < 4; ++i) m = std::max(m, abs(a[i] - b[i]));
  return m;
}

struct HalfPeriodSymmetry {
  // max |Z_i(s) + Z_i(2 s0 - s)| over all four slots.
  double negation_defect = 0;
  // Reversal actually satisfied by the flow about s0:
  // (Q1, Q2, P1, P2)(s) = (-Q1, Q2, P1, -P2)(2 s0 - s).
  double reversal_defect = 0;
  std::array<double, 4> negation_by_slot{};
};

/// Compare Z(s_k) with Z(2 s0 - s_k) on `samples` equally spaced points of [0, 2 s0].
inline HalfPeriodSymmetry half_period_symmetry(double v, double s0, std::size_t samples,
                                               const IntegratorConfig& cfg = {}) {
  const auto traj = integrate_span(v, 2 * s0, samples, cfg);
  HalfPeriodSymmetry out;
  const std::size_t n = traj.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto a = traj[k].phase();
    const auto b = traj[n - 1 - k].phase();
    for (std::size_t i = 0; i < 4; ++i) {
      out.negation_by_slot[i] = std::max(out.negation_by_slot[i], std::abs(a[i] + b[i]));
    }
    const std::array<double, 4> reflected{-b[0], b[1], b[2], -b[3]};
    out.reversal_defect = std::max(out.reversal_defect, max_abs_diff(a, reflected));
  }
  out.negation_defect = *std::max_element(out.negation_by_slot.begin(), out.negation_by_slot.end());
  return out;
}

/// Largest |H - E| over samples at least `min_q` away from either collision.
inline double energy_residual(const std::vector<ReducedState>& traj, double E, double min_q = 0.05) {
  double worst = 0;
  for (const auto& z : traj) {
    if (std::min(z.Q1 * z.Q1, z.Q2 * z.Q2) < min_q) continue;
    worst = std::max(worst, std::abs(hamiltonian_physical(z) - E));
  }
  return worst;
}

struct OrbitReport {
  double theta = 0;
  double v = 0;
  double E = 0;
  double s0 = 0;
  double t0 = 0;
  double period_s = 0;  // 4 s0
  double period_t = 0;  // physical time at 4 s0
  // sup-norm of canonical_chart(Z(4 s0)) - Z(0)
  double periodicity_defect = 0;
  double raw_periodicity_defect = 0;   // Z(4 s0) - Z(0), no chart folding
  double raw_antiperiodicity_defect = 0;  // Z(4 s0) + Z(0)
  HalfPeriodSymmetry half_period;
  double gamma_residual = 0;
  double energy_residual = 0;
  std::size_t collisions_per_period = 0;
  bool periodic = false;
};

inline constexpr double periodicity_threshold = 1e-6;

inline OrbitReport analyze_orbit(double theta, std::size_t samples = 400,
                                 const IntegratorConfig& cfg = {}) {
  OrbitReport r;
  r.theta = theta;
  r.v = theta_to_v(theta);
  r.E = energy_from_v(r.v);
  const auto ev = integrate_until_sbc(r.v, cfg);
  r.s0 = ev.s_event;
  r.t0 = ev.t_event;
  r.period_s = 4 * r.s0;

  const auto z0 = initial_reduced_state(r.v);
  const auto z4 = integrate_to(r.v, r.period_s, cfg);
  r.period_t = z4.t;
  r.periodicity_defect = max_abs_diff(canonical_chart(z4).phase(), z0.phase());
  r.raw_periodicity_defect = max_abs_diff(z4.phase(), z0.phase());
  const auto p0 = z0.phase();
  r.raw_antiperiodicity_defect =
      max_abs_diff(z4.phase(), std::array<double, 4>{-p0[0], -p0[1], -p0[2], -p0[3]});

  r.half_period = half_period_symmetry(r.v, r.s0, 100, cfg);

  const auto traj = integrate_span(r.v, r.period_s, std::max<std::size_t>(samples, 2), cfg);
  r.gamma_residual = gamma_residual(traj, r.E);
  r.energy_residual = energy_residual(traj, r.E);
  // Stop just short of 4 s0 so the crossing at the period end is not double counted.
  r.collisions_per_period = collision_events(r.v, r.period_s * (1 - 1e-9), cfg).size();
  r.periodic = r.periodicity_defect <= periodicity_threshold;
  return r;
}

}  // namespace sbc
