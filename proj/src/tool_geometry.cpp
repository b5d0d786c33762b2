#include "graphite/tool_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "graphite/errors.hpp"

namespace graphite {

ToolTipState make_tool_tip(double cone_slope, double gamma_rad, double d0_m,
                           double wear_gain_per_n, double d_max_m) {
  ToolTipState tip;
  tip.cone_slope = cone_slope;
  tip.plane_slope = std::tan(gamma_rad);
  tip.offset_m = d0_m;
  tip.wear_gain_per_n = wear_gain_per_n;
  tip.offset_max_m = d_max_m;
  if (!(cone_slope > 0)) {
    throw ConfigError("cone slope must be positive");
  }
  if (!(std::abs(tip.plane_slope) < cone_slope)) {
    throw ConfigError("tilt too steep: |tan(gamma)| must stay below the cone slope");
  }
  if (d0_m < 0 || d0_m > d_max_m) {
    throw ConfigError("initial offset must lie in [0, d_max]");
  }
  if (wear_gain_per_n < 0) {
    throw ConfigError("wear gain must be nonnegative");
  }
  return tip;
}

EllipseAxes axes(const ToolTipState& tip) {
  if (!(tip.offset_m > 0)) {
    throw DegenerateTip("zero plane offset: contact patch has no area");
  }
  const double m = tip.cone_slope;
  const double a = tip.plane_slope;
  // beta first, then alpha as beta times the axis ratio. The ratio is exactly
  // 1 when a == 0, which keeps the circular case bit-exact.
  const double s = std::sqrt(m * m - a * a);
  const double minor = 2.0 * tip.offset_m / s;
  const double major = minor * (m * std::sqrt(1.0 + a * a) / s);
  return {major, minor};
}

ToolTipState degrade(const ToolTipState& tip, double force_n, double step_len_m) {
  ToolTipState out = tip;
  const double increment = tip.wear_gain_per_n * std::max(force_n, 0.0) * std::max(step_len_m, 0.0);
  out.offset_m = std::min(tip.offset_m + increment, tip.offset_max_m);
  return out;
}

namespace {

struct Projections {
  double on_cos;
  double on_sin;
};

Projections axis_projections(const EllipseAxes& axes, double psi_rad,
                             WidthConvention convention) {
  const double c = std::abs(std::cos(psi_rad));
  const double s = std::abs(std::sin(psi_rad));
  if (convention == WidthConvention::major_on_cos) {
    return {axes.major_m * c, axes.minor_m * s};
  }
  return {axes.major_m * s, axes.minor_m * c};
}

}  // namespace

double deposition_width(const EllipseAxes& axes, double psi_rad, WidthConvention convention) {
  const auto p = axis_projections(axes, psi_rad, convention);
  return std::max(p.on_cos, p.on_sin);
}

double smooth_deposition_width(const EllipseAxes& axes, double psi_rad, double kappa_m,
                               WidthConvention convention) {
  const auto p = axis_projections(axes, psi_rad, convention);
  // Shifted log-sum-exp so the exponentials never overflow at small kappa.
  const double hi = std::max(p.on_cos, p.on_sin);
  const double lo = std::min(p.on_cos, p.on_sin);
  return hi + kappa_m * std::log1p(std::exp((lo - hi) / kappa_m));
}

double footprint_center_offset(const ToolTipState& tip) {
  const double m = tip.cone_slope;
  const double a = tip.plane_slope;
  return a * tip.offset_m / (m * m - a * a);
}

double footprint_implicit(const ToolTipState& tip, double u_m, double w_m) {
  const double m = tip.cone_slope;
  const double a = tip.plane_slope;
  const double d = tip.offset_m;
  const double mm_aa = m * m - a * a;
  const double du = u_m - a * d / mm_aa;
  // u runs along the tilt direction in the work plane, so the projected
  // coordinate of the cone frame picks up a 1/(1+a^2) factor.
  return mm_aa * mm_aa * du * du / ((1.0 + a * a) * m * m * d * d) +
         mm_aa * w_m * w_m / (d * d) - 1.0;
}

}  // namespace graphite
