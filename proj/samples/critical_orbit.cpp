// Minimal use of the library: find the critical launch ratio, print the
// first collision and a few points of the periodic orbit.

#include <cstdio>

#include "sbc/integrator.hpp"
#include "sbc/model.hpp"
#include "sbc/search.hpp"

int main() {
  const auto r = sbc::find_theta(0.1, 0.9, 1e-12);
  std::printf("theta* = %.15f, v* = %.15f, E = %.15f\n", r.theta_star, r.v_star,
              sbc::energy_from_v(r.v_star));

  const auto ev = sbc::integrate_until_sbc(r.v_star);
  const auto& z = ev.state_at_event;
  std::printf("first collision at s0 = %.12f (t0 = %.12f): Q2 = %.12f, P1 = %.12f, P2 = %.3e\n",
              ev.s_event, ev.t_event, z.Q2, z.P1, z.P2);

  for (const auto& p : sbc::integrate_span(r.v_star, 4 * ev.s_event, 9)) {
    const auto f = sbc::reduced_to_physical(p);
    std::printf("s = %7.4f  t = %7.4f  body 1 at (% .6f, % .6f)\n", p.s, p.t, f.positions[0].x,
                f.positions[0].y);
  }
}
