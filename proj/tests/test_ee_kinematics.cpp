#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "graphite/ee_kinematics.hpp"

using namespace graphite;

TEST_CASE("zero input leaves the state unchanged") {
  const EndEffectorState s{0.1, -0.2, 0.3, 0.4};
  const auto next = step(s, {}, 0.008);
  CHECK(next.x_m == s.x_m);
  CHECK(next.y_m == s.y_m);
  CHECK(next.z_m == s.z_m);
  CHECK(next.psi_rad == s.psi_rad);
}

TEST_CASE("one sampling step at unit velocity") {
  const auto next = step({}, {1, 0, 0, 0}, 0.008);
  CHECK(next.x_m == doctest::Approx(0.008).epsilon(1e-15));
  CHECK(next.y_m == 0.0);
  CHECK(next.z_m == 0.0);
  CHECK(next.psi_rad == 0.0);
}

TEST_CASE("a matched opposite input returns to the origin") {
  const EndEffectorState s{1, 2, 3, 0.5};
  const InputSample u{-1 / 0.008, -2 / 0.008, -3 / 0.008, -0.5 / 0.008};
  const auto next = step(s, u, 0.008);
  CHECK(next.x_m == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.y_m == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.z_m == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.psi_rad == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("boxes are closed sets") {
  BoxConstraints c;
  c.state_lower = {-1, -1, -1, -1};
  c.state_upper = {1, 1, 1, 1};
  c.input_lower = {-2, -2, -2, -2};
  c.input_upper = {2, 2, 2, 2};

  CHECK(check_feasible({1, -1, 1, -1}, {2, -2, 2, -2}, c));
  CHECK(check_feasible({0, 0, 0, 0}, {0, 0, 0, 0}, c));
  const double above = std::nextafter(2.0, 3.0);
  CHECK_FALSE(input_feasible({above, 0, 0, 0}, c));
  CHECK_FALSE(state_feasible({std::nextafter(1.0, 2.0), 0, 0, 0}, c));
}

TEST_CASE("superposition of inputs") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> num(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const EndEffectorState s{num(rng), num(rng), num(rng), num(rng)};
    const InputSample u1{num(rng), num(rng), num(rng), num(rng)};
    const InputSample u2{num(rng), num(rng), num(rng), num(rng)};
    const InputSample sum{u1.vx_mps + u2.vx_mps, u1.vy_mps + u2.vy_mps, u1.vz_mps + u2.vz_mps,
                          u1.wpsi_radps + u2.wpsi_radps};
    const auto direct = step(s, sum, 0.008);
    const auto chained = step(step(s, u1, 0.008), u2, 0.008);
    CHECK(direct.x_m == doctest::Approx(chained.x_m).epsilon(1e-12));
    CHECK(direct.y_m == doctest::Approx(chained.y_m).epsilon(1e-12));
    CHECK(direct.z_m == doctest::Approx(chained.z_m).epsilon(1e-12));
    CHECK(direct.psi_rad == doctest::Approx(chained.psi_rad).epsilon(1e-12));
  }
}

TEST_CASE("rollout telescopes to the input sum") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> num(-0.05, 0.05);
  const double dt = 0.008;
  EndEffectorState s{0.01, -0.02, 0.003, 0.1};
  double sums[4] = {0, 0, 0, 0};
  EndEffectorState rolled = s;
  for (int k = 0; k < 200; ++k) {
    const InputSample u{num(rng), num(rng), num(rng), num(rng)};
    sums[0] += u.vx_mps;
    sums[1] += u.vy_mps;
    sums[2] += u.vz_mps;
    sums[3] += u.wpsi_radps;
    rolled = step(rolled, u, dt);
  }
  CHECK(rolled.x_m == doctest::Approx(s.x_m + dt * sums[0]).epsilon(1e-12));
  CHECK(rolled.y_m == doctest::Approx(s.y_m + dt * sums[1]).epsilon(1e-12));
  CHECK(rolled.z_m == doctest::Approx(s.z_m + dt * sums[2]).epsilon(1e-12));
  CHECK(rolled.psi_rad == doctest::Approx(s.psi_rad + dt * sums[3]).epsilon(1e-12));
}
