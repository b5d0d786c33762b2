#include "graphite/ee_kinematics.hpp"

namespace graphite {

EndEffectorState step(const EndEffectorState& state, const InputSample& input, double dt_s) {
  return {state.x_m + dt_s * input.vx_mps, state.y_m + dt_s * input.vy_mps,
          state.z_m + dt_s * input.vz_mps, state.psi_rad + dt_s * input.wpsi_radps};
}

bool state_feasible(const EndEffectorState& state, const BoxConstraints& c) {
  const std::array<double, 4> v{state.x_m, state.y_m, state.z_m, state.psi_rad};
  for (int i = 0; i < 4; ++i) {
    if (v[i] < c.state_lower[i] || v[i] > c.state_upper[i]) {
      return false;
    }
  }
  return true;
}

bool input_feasible(const InputSample& input, const BoxConstraints& c) {
  const std::array<double, 4> v{input.vx_mps, input.vy_mps, input.vz_mps, input.wpsi_radps};
  for (int i = 0; i < 4; ++i) {
    if (v[i] < c.input_lower[i] || v[i] > c.input_upper[i]) {
      return false;
    }
  }
  return true;
}

bool check_feasible(const EndEffectorState& state, const InputSample& input,
                    const BoxConstraints& c) {
  return state_feasible(state, c) && input_feasible(input, c);
}

}  // namespace graphite
