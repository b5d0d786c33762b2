#pragma once

#include <array>
#include <limits>

namespace graphite {

/// End-effector pose: xyz position plus the heading angle of the tip
/// footprint's minor axis relative to the local stroke tangent.
struct EndEffectorState {
  double x_m{0};
  double y_m{0};
  double z_m{0};
  double psi_rad{0};
};

/// Velocity command held over one sampling interval.
struct InputSample {
  double vx_mps{0};
  double vy_mps{0};
  double vz_mps{0};
  double wpsi_radps{0};
};

/// Axis-aligned state and input boxes, closed on both sides.
struct BoxConstraints {
  std::array<double, 4> state_lower{};
  std::array<double, 4> state_upper{};
  std::array<double, 4> input_lower{};
  std::array<double, 4> input_upper{};

  static BoxConstraints unbounded() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    BoxConstraints b;
    b.state_lower = {-inf, -inf, -inf, -inf};
    b.state_upper = {inf, inf, inf, inf};
    b.input_lower = {-inf, -inf, -inf, -inf};
    b.input_upper = {inf, inf, inf, inf};
    return b;
  }
};

/// One step of the discrete single integrator: state + dt * input.
EndEffectorState step(const EndEffectorState& state, const InputSample& input, double dt_s);

bool state_feasible(const EndEffectorState& state, const BoxConstraints& c);
bool input_feasible(const InputSample& input, const BoxConstraints& c);
bool check_feasible(const EndEffectorState& state, const InputSample& input,
                    const BoxConstraints& c);

}  // namespace graphite
