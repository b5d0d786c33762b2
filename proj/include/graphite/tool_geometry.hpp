#pragma once

namespace graphite {

/// Conical tip truncated by the work surface. The surface cuts the cone at
/// vertical offset `offset_m` from the apex; `plane_slope` is tan(tilt angle)
/// and stays fixed for the whole task, so the contact patch stays an ellipse
/// as long as |plane_slope| < cone_slope.
struct ToolTipState {
  double cone_slope{1};        // m, > 0
  double plane_slope{0};       // a = tan(gamma)
  double offset_m{0};          // d, wear state, 0 <= d <= offset_max_m
  double wear_gain_per_n{0};   // K_d, meters of offset per newton-meter rubbed
  double offset_max_m{1e-2};   // saturation bound on d
};

/// Full major/minor axis lengths of the elliptical contact patch.
struct EllipseAxes {
  double major_m{0};  // alpha
  double minor_m{0};  // beta
};

/// Which axis the cosine of the heading projects onto. `major_on_cos` is the
/// geometric reading (heading 0 puts the major axis across the stroke);
/// `major_on_sin` is the swapped variant kept for comparison runs.
enum class WidthConvention { major_on_cos, major_on_sin };

/// Validates invariants and fills a tip state. gamma is the mounting tilt in
/// radians. Throws ConfigError on invalid parameters.
ToolTipState make_tool_tip(double cone_slope, double gamma_rad, double d0_m,
                           double wear_gain_per_n, double d_max_m);

/// Contact ellipse axes for the current offset. Throws DegenerateTip when the
/// offset is zero (no contact patch yet); callers treat that as zero width.
EllipseAxes axes(const ToolTipState& tip);

/// Wear step: the offset grows by gain * force * distance, saturating at
/// offset_max_m. Force and distance must be nonnegative.
ToolTipState degrade(const ToolTipState& tip, double force_n, double step_len_m);

/// Deposited width across the stroke: the larger of the two axis projections
/// at heading psi.
double deposition_width(const EllipseAxes& axes, double psi_rad,
                        WidthConvention convention = WidthConvention::major_on_cos);

/// Log-sum-exp relaxation of deposition_width with temperature kappa:
/// W <= smooth <= W + kappa*log(2). Used inside the planner objective.
double smooth_deposition_width(const EllipseAxes& axes, double psi_rad, double kappa_m,
                               WidthConvention convention = WidthConvention::major_on_cos);

/// Signed in-plane distance from the tool axis to the ellipse center, along
/// the tilt direction: a*d/(m^2 - a^2).
double footprint_center_offset(const ToolTipState& tip);

/// Implicit form of the contact ellipse in tool-centered coordinates
/// (u along the tilt direction, w perpendicular): <= 0 inside, 0 on the
/// boundary. Derived from the cone-plane intersection coefficients, not from
/// axes(), so it doubles as an independent oracle for stamped footprints.
double footprint_implicit(const ToolTipState& tip, double u_m, double w_m);

}  // namespace graphite
