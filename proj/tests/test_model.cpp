#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sbc/integrator.hpp"
#include "sbc/model.hpp"

using namespace sbc;

TEST(Energy, FromSpeed) {
  EXPECT_NEAR(energy_from_v(0.0), -(2 * std::sqrt(2.0) + 1), 1e-15);
  EXPECT_NEAR(energy_from_v(1.0), 2 - (2 * std::sqrt(2.0) + 1), 1e-15);
  EXPECT_NEAR(energy_from_v(v_max<double>()), 0.0, 1e-14);
  EXPECT_THROW(energy_from_v(-0.1), DomainError);
}

TEST(Energy, ThetaToSpeed) {
  EXPECT_EQ(theta_to_v(0.0), 0.0);
  EXPECT_NEAR(theta_to_v(1.0), 1.3835510696656972, 1e-15);
  EXPECT_NEAR(theta_to_v(0.46449539554694), 0.642653101364, 1e-11);
  EXPECT_THROW(theta_to_v(-0.01), DomainError);
  EXPECT_THROW(theta_to_v(1.01), DomainError);
  EXPECT_THROW(theta_to_v(std::nan("")), DomainError);
}

TEST(Energy, BoundBelowEscapeSpeed) {
  EXPECT_TRUE(SystemParams::from_theta(0.999).bound());
  EXPECT_FALSE(SystemParams::from_v(1.4).bound());
  const auto p = SystemParams::from_v(0.5);
  EXPECT_NEAR(p.theta * v_max<double>(), 0.5, 1e-15);
}

TEST(InitialState, Values) {
  const auto z = initial_reduced_state(0.5);
  EXPECT_EQ(z.Q1, 1.0);
  EXPECT_EQ(z.Q2, 1.0);
  EXPECT_EQ(z.P1, -2.0);
  EXPECT_EQ(z.P2, 2.0);
  EXPECT_EQ(z.s, 0.0);
  EXPECT_EQ(z.t, 0.0);
  EXPECT_THROW(initial_reduced_state(0.0), DomainError);
  EXPECT_THROW(initial_reduced_state(-1.0), DomainError);
}

TEST(InitialState, PhysicalFrame) {
  const double v = 0.7;
  const auto f = reduced_to_physical(initial_reduced_state(v), true);
  ASSERT_TRUE(f.velocities.has_value());
  const std::array<Vec2<double>, 4> pos{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  const std::array<Vec2<double>, 4> vel{{{0, v}, {v, 0}, {0, -v}, {-v, 0}}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(f.positions[i].x, pos[i].x, 1e-15) << i;
    EXPECT_NEAR(f.positions[i].y, pos[i].y, 1e-15) << i;
    EXPECT_NEAR((*f.velocities)[i].x, vel[i].x, 1e-15) << i;
    EXPECT_NEAR((*f.velocities)[i].y, vel[i].y, 1e-15) << i;
  }
  EXPECT_NEAR(f.velocity_sum, v, 1e-15);
}

TEST(InitialState, EnergyMatchesHamiltonian) {
  for (double v : {0.1, 0.5, 1.0, 1.3}) {
    EXPECT_NEAR(hamiltonian_physical(initial_reduced_state(v)), energy_from_v(v), 1e-14);
  }
}

TEST(PhysicalFrame, AtBinaryCollision) {
  ReducedState z{0.0, 1.3, -4.7, 0.2, 1.0, 0.5};
  const auto f = reduced_to_physical(z);
  const double c2 = 1.3 * 1.3;
  EXPECT_NEAR(f.positions[0].x, c2 / 2, 1e-15);
  EXPECT_NEAR(f.positions[0].y, c2 / 2, 1e-15);
  EXPECT_NEAR(f.positions[1].x, c2 / 2, 1e-15);
  EXPECT_NEAR(f.positions[1].y, c2 / 2, 1e-15);
  EXPECT_FALSE(f.velocities.has_value());
  EXPECT_NEAR(f.velocity_sum, 0.2 / (4 * 1.3), 1e-15);
  EXPECT_THROW(reduced_to_physical(z, true), DomainError);
  EXPECT_THROW(reduced_to_physical(ReducedState{0, 0, 1, 1}), DomainError);
}

TEST(Coordinates, RoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uq(0.05, 2.0), up(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double Q1 = uq(rng), Q2 = uq(rng);
    ReducedState z{Q1, Q2, up(rng), up(rng)};
    const auto back = physical_to_reduced(reduced_coords(z));
    EXPECT_NEAR(back.Q1, z.Q1, 1e-12 * std::max(1.0, std::abs(z.Q1)));
    EXPECT_NEAR(back.Q2, z.Q2, 1e-12 * std::max(1.0, std::abs(z.Q2)));
    EXPECT_NEAR(back.P1, z.P1, 1e-12 * std::max(1.0, std::abs(z.P1)));
    EXPECT_NEAR(back.P2, z.P2, 1e-12 * std::max(1.0, std::abs(z.P2)));
  }
}

TEST(Coordinates, RejectsCollision) {
  EXPECT_THROW(to_intermediate(ReducedState{0, 1, 0, 0}), DomainError);
  EXPECT_THROW(physical_to_reduced(ReducedCoords{0.5, 0.5, 0, 0}), DomainError);
}

TEST(Coordinates, CanonicalChartPreservesPositions) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    ReducedState z{u(rng), u(rng), u(rng), u(rng)};
    const auto c = canonical_chart(z);
    EXPECT_GE(c.Q1, 0);
    EXPECT_GE(c.Q2, 0);
    const auto a = reduced_to_physical(z, true), b = reduced_to_physical(c, true);
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(a.positions[k].x, b.positions[k].x, 1e-14);
      EXPECT_NEAR(a.positions[k].y, b.positions[k].y, 1e-14);
      EXPECT_NEAR((*a.velocities)[k].x, (*b.velocities)[k].x, 1e-12);
      EXPECT_NEAR((*a.velocities)[k].y, (*b.velocities)[k].y, 1e-12);
    }
  }
}

TEST(Hamiltonian, Examples) {
  // Square of side sqrt2 at rest: -(2 sqrt2 + 1).
  EXPECT_NEAR(hamiltonian_physical(ReducedCoords{1, 0, 0, 0}), -(2 * std::sqrt(2.0) + 1), 1e-15);
  // Kinetic part alone: w1^2/8 with w = (4, 0) gives 2.
  EXPECT_NEAR(hamiltonian_physical(ReducedCoords{1, 0, 4, 0}) -
                  hamiltonian_physical(ReducedCoords{1, 0, 0, 0}),
              2.0, 1e-14);
  EXPECT_THROW(hamiltonian_physical(ReducedCoords{1, 1, 0, 0}), DomainError);
  EXPECT_THROW(hamiltonian_physical(ReducedCoords{1, -1, 0, 0}), DomainError);
}

TEST(Hamiltonian, ConservedAlongOrbit) {
  const double v = theta_to_v(0.46526470597557651);
  const double E = energy_from_v(v);
  const auto ev = integrate_until_sbc(v);
  const auto traj = integrate_span(v, 4 * ev.s_event, 801);
  int checked = 0;
  for (const auto& z : traj) {
    if (std::min(z.Q1 * z.Q1, z.Q2 * z.Q2) < 0.05) continue;
    EXPECT_NEAR(hamiltonian_physical(z), E, 1e-9) << "s = " << z.s;
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(Symmetry, BodyMap) {
  const auto b = symmetric_bodies(0.3, -0.8);
  EXPECT_EQ(b[0], (Vec2<double>{0.3, -0.8}));
  EXPECT_EQ(b[1], (Vec2<double>{-0.8, 0.3}));
  EXPECT_EQ(b[2], (Vec2<double>{-0.3, 0.8}));
  EXPECT_EQ(b[3], (Vec2<double>{0.8, -0.3}));
  double cx = 0, cy = 0;
  for (auto p : b) cx += p.x, cy += p.y;
  EXPECT_NEAR(cx, 0, 1e-15);
  EXPECT_NEAR(cy, 0, 1e-15);
}
