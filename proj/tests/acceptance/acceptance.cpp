// Acceptance gates. Prints one PASS/FAIL line per criterion with the
// measured numbers. With arguments, runs only the named criteria.
//
//   sbc_acceptance [name ...]
//
// Exit status is 0 when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "sbc/dynamics.hpp"
#include "sbc/integrator.hpp"
#include "sbc/nbody.hpp"
#include "sbc/orbit.hpp"
#include "sbc/search.hpp"

using namespace sbc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Computed once and shared by the criteria that need the critical orbit.
const ShootingResult& critical() {
  static const ShootingResult r = find_theta(0.1, 0.9, 1e-14);
  return r;
}

Outcome theta_regression() {
  const double expected = 0.46449539554694;
  const auto& r = critical();
  const double diff = std::abs(r.theta_star - expected);
  return {diff <= 1e-8, format("theta = %.17g, expected %.14g, |diff| = %.3e (tol 1e-8), "
                               "residual |p2| = %.2e after %d steps",
                               r.theta_star, expected, diff, r.residual, r.iterations)};
}

Outcome collision_invariant() {
  const double target = -4 * std::pow(2.0, 0.25);
  double worst = 0;
  std::string parts;
  for (double theta : {0.2, 0.4645, 0.8}) {
    const auto ev = integrate_until_sbc(theta_to_v(theta));
    const double d = std::abs(ev.state_at_event.P1 - target);
    worst = std::max(worst, d);
    parts += format(" theta=%.4g: P1=%.15f;", theta, ev.state_at_event.P1);
  }
  return {worst <= 1e-6, format("max |P1 + 4*2^(1/4)| = %.3e (tol 1e-6);", worst) + parts};
}

Outcome periodicity() {
  const auto rep = analyze_orbit(critical().theta_star);
  // Q -> -Q is the same physical state; the chart with Q1, Q2 >= 0 removes that sign.
  return {rep.periodicity_defect <= 1e-6,
          format("|state(4 s0) - state(0)|_inf = %.3e with Q folded to Q >= 0 (tol 1e-6); "
                 "unfolded: |Z(4s0) - Z(0)| = %.3f, |Z(4s0) + Z(0)| = %.3e",
                 rep.periodicity_defect, rep.raw_periodicity_defect,
                 rep.raw_antiperiodicity_defect)};
}

Outcome half_period_antisymmetry() {
  const auto& c = critical();
  const auto hp = half_period_symmetry(c.v_star, c.s0, 100);
  const auto& s = hp.negation_by_slot;
  return {hp.negation_defect <= 1e-6,
          format("max |Z(s) + Z(2 s0 - s)| = %.3e (tol 1e-6); per slot Q1 %.2e Q2 %.2e P1 %.2e "
                 "P2 %.2e; reversal (-Q1, Q2, P1, -P2) holds to %.2e",
                 hp.negation_defect, s[0], s[1], s[2], s[3], hp.reversal_defect)};
}

Outcome conservation() {
  const auto& c = critical();
  const double E = energy_from_v(c.v_star);
  const auto traj = integrate_span(c.v_star, 4 * c.s0, 2001);
  const double g = gamma_residual(traj, E);
  const double h = energy_residual(traj, E, 0.05);

  const auto to_sbc = integrate_span(c.v_star, c.s0, 1001);
  bool decreasing = true;
  double prev = reduced_to_physical(to_sbc.front()).velocity_sum;
  for (std::size_t k = 1; k < to_sbc.size(); ++k) {
    const double now = reduced_to_physical(to_sbc[k]).velocity_sum;
    if (!(now < prev)) decreasing = false;
    prev = now;
  }
  return {g <= 1e-9 && h <= 1e-8 && decreasing,
          format("Gamma residual %.3e (tol 1e-9), |H - E| %.3e (tol 1e-8), "
                 "xdot1 + xdot2 strictly decreasing to first collision: %s",
                 g, h, decreasing ? "yes" : "no")};
}

Outcome field_vs_hamiltonian() {
  std::mt19937_64 rng(20240601);
  const double h = 1e-5;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = oracle::random_shell_point(rng);
    auto G = [&](const std::array<double, 4>& x) { return gamma(x[0], x[1], x[2], x[3], p.E); };
    const std::array<double, 4> x{p.Q1, p.Q2, p.P1, p.P2};
    const auto f = regularized_rhs(RegularizedVector<double>{p.Q1, p.Q2, p.P1, p.P2, 0}, p.E);
    const double fd[4] = {oracle::central_difference(G, x, 2, h),
                          oracle::central_difference(G, x, 3, h),
                          -oracle::central_difference(G, x, 0, h),
                          -oracle::central_difference(G, x, 1, h)};
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(f[k] - fd[k]));
  }
  return {worst <= 1e-6, format("max componentwise |field - FD| = %.3e over 1000 shell states "
                                "(tol 1e-6)", worst)};
}

Outcome potential_oracles() {
  const double u4 = nbody::potential_energy(nbody::ring_positions<double>(4));
  const double u6 = nbody::potential_energy(nbody::ring_positions<double>(6));
  const double d4 = std::abs(u4 - (2 * std::sqrt(2.0) + 1));
  const double d6 = std::abs(u6 - oracle::ring_potential(6));
  return {d4 <= 1e-14 && d6 <= 1e-12,
          format("|U(4) - (2 sqrt2 + 1)| = %.2e (tol 1e-14), |U(6) - chord sum| = %.2e (tol 1e-12)",
                 d4, d6)};
}

Outcome cross_formulation() {
  const auto grid = uniform_open_grid(20);
  const auto cart = nbody::sweep_n(4, grid);
  const auto reg = sweep_theta(grid);
  double dm = 0, dt = 0;
  bool all_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!cart[i].ok() || !reg[i].ok()) {
      all_ok = false;
      continue;
    }
    dm = std::max(dm, std::abs(cart[i].signed_magnitude - reg[i].signed_magnitude));
    dt = std::max(dt, std::abs(cart[i].t_collision - reg[i].t_collision));
  }
  return {all_ok && dm <= 1e-4 && dt <= 1e-5,
          format("20-point grid: max |signed magnitude diff| = %.3e (tol 1e-4), max |t diff| = "
                 "%.3e (tol 1e-5), all rows ok: %s",
                 dm, dt, all_ok ? "yes" : "no")};
}

Outcome ring_ordering() {
  const auto grid = uniform_open_grid(50);
  const std::vector<int> ns{4, 6, 8, 10, 12};
  std::vector<std::vector<SweepRecord>> curves;
  std::string changes;
  bool one_change = true;
  for (int n : ns) {
    curves.push_back(nbody::sweep_n(n, grid));
    const int c = count_sign_changes(curves.back());
    changes += format(" n=%d:%d", n, c);
    for (const auto& r : curves.back()) one_change = one_change && r.ok();
    one_change = one_change && c == 1;
  }
  int violations = 0;
  double first_bad = std::nan(""), last_bad = std::nan("");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    bool ordered = true;
    for (std::size_t j = 1; j < ns.size(); ++j) {
      if (!(curves[j][k].signed_magnitude < curves[j - 1][k].signed_magnitude)) ordered = false;
    }
    if (!ordered) {
      ++violations;
      if (std::isnan(first_bad)) first_bad = grid[k];
      last_bad = grid[k];
    }
  }
  std::string where = violations ? format(" (theta in [%.4f, %.4f])", first_bad, last_bad) : "";
  return {one_change && violations == 0,
          format("sign changes:%s; grid points breaking the n-ordering: %d of %zu", changes.c_str(),
                 violations, grid.size()) +
              where};
}

Outcome collision_threshold_convergence() {
  nbody::CollisionOptions a, b;
  a.eps_collision = 1e-6;
  b.eps_collision = 1e-8;
  const double ma = nbody::integrate_to_first_collision(6, 0.5, a).signed_magnitude;
  const double mb = nbody::integrate_to_first_collision(6, 0.5, b).signed_magnitude;
  const double d = std::abs(ma - mb);
  return {d <= 1e-3, format("n=6 theta=0.5: eps 1e-6 -> %.10f, eps 1e-8 -> %.10f, |diff| = %.3e "
                            "(tol 1e-3)",
                            ma, mb, d)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"theta_regression", theta_regression},
      {"collision_invariant", collision_invariant},
      {"periodicity", periodicity},
      {"half_period_antisymmetry", half_period_antisymmetry},
      {"conservation", conservation},
      {"field_vs_hamiltonian", field_vs_hamiltonian},
      {"potential_oracles", potential_oracles},
      {"cross_formulation", cross_formulation},
      {"ring_ordering", ring_ordering},
      {"collision_threshold_convergence", collision_threshold_convergence},
  };
  std::vector<const Criterion*> selected;
  if (argc == 1) {
    for (const auto& c : all) selected.push_back(&c);
  } else {
    for (int i = 1; i < argc; ++i) {
      const Criterion* found = nullptr;
      for (const auto& c : all) {
        if (argv[i] == std::string(c.name)) found = &c;
      }
      if (!found) {
        std::fprintf(stderr, "unknown criterion: %s\n", argv[i]);
        return 2;
      }
      selected.push_back(found);
    }
  }
  int failures = 0;
  for (const auto* c : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c->run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c->name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
