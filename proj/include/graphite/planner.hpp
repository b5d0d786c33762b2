#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "graphite/ee_kinematics.hpp"
#include "graphite/force_model.hpp"
#include "graphite/ref_stroke.hpp"
#include "graphite/tool_geometry.hpp"

namespace graphite {

struct PlannerConfig {
  Eigen::Matrix3d q_weight =
      Eigen::Vector3d(1e6, 1e6, 1e8).asDiagonal();  // tracking weights on (x, y, W)
  double kappa_m{1e-5};                             // width smoothing temperature
  int max_iterations{400};
  double step_tolerance{1e-7};  // relative cost decrease that counts as converged
  int restarts{4};              // perturbed warm starts tried after the plain one
  std::uint64_t seed{1};
  WidthConvention width_convention{WidthConvention::major_on_cos};
  double nominal_depth_m{5e-4};  // warm-start penetration depth
};

/// Batch open-loop plan plus the forward-model quantities it predicts.
struct Plan {
  std::vector<InputSample> inputs;                 // N
  std::vector<EndEffectorState> predicted_states;  // N + 1
  std::vector<double> predicted_widths;            // N + 1, exact (unsmoothed)
  double predicted_cost{0};
};

/// Forward simulation of the model chain: integrator, contact force, wear,
/// contact-ellipse width. Widths use the exact projection maximum; samples
/// out of contact (or with a zero-offset tip) deposit zero width.
struct RolloutResult {
  std::vector<EndEffectorState> states;  // N + 1
  std::vector<double> tip_offsets_m;     // N + 1
  std::vector<double> forces_n;          // N + 1 (sample N reported, not worn)
  std::vector<double> widths_m;          // N + 1
};

RolloutResult rollout(const EndEffectorState& initial, const ToolTipState& tip0,
                      const std::vector<InputSample>& inputs, const ForceModelParams& params,
                      const SurfaceMap& surface, double dt_s,
                      WidthConvention convention = WidthConvention::major_on_cos);

/// Quadratic tracking cost over s(t) = (x, y, W) against the reference.
double cost(const std::vector<EndEffectorState>& states, const std::vector<double>& widths_m,
            const ReferenceStroke& stroke, const Eigen::Matrix3d& q_weight);

/// Packages an explicit input sequence as a Plan (rollout + exact cost).
Plan make_plan(const std::vector<InputSample>& inputs, const EndEffectorState& initial,
               const ToolTipState& tip0, const ForceModelParams& params,
               const SurfaceMap& surface, const ReferenceStroke& stroke,
               const Eigen::Matrix3d& q_weight,
               WidthConvention convention = WidthConvention::major_on_cos);

/// Solves the finite-horizon tracking problem over the whole input sequence:
/// single shooting, analytic objective gradient, box handling by projection,
/// multi-start from perturbed kinematic warm starts. The returned plan is
/// feasible, reproducible from its inputs, and never worse than the warm
/// start. Throws InfeasibleStart when the initial state violates the state
/// box; requires the input box to contain zero so projection is always
/// feasible.
Plan plan_stroke(const ReferenceStroke& stroke, const EndEffectorState& initial,
                 const ToolTipState& tip0, const ForceModelParams& params,
                 const SurfaceMap& surface, const BoxConstraints& constraints,
                 const PlannerConfig& config);

namespace detail {

/// Smoothed tracking objective and its gradient with respect to the flattened
/// input sequence. Exposed for the finite-difference validation tests.
/// z_ref is pinned to the reference path (one entry per sample).
double smoothed_objective(const std::vector<InputSample>& inputs,
                          const EndEffectorState& initial, const ToolTipState& tip0,
                          const ForceModelParams& params, const std::vector<double>& z_ref_m,
                          const ReferenceStroke& stroke, const PlannerConfig& config,
                          std::vector<double>* gradient);

}  // namespace detail

}  // namespace graphite
