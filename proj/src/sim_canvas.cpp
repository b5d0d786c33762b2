#include "graphite/sim_canvas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "graphite/errors.hpp"

namespace graphite {

Canvas make_canvas(double x0_m, double y0_m, double x1_m, double y1_m, double scale_m_per_px) {
  if (!(scale_m_per_px > 0) || !(x1_m > x0_m) || !(y1_m > y0_m)) {
    throw ConfigError("canvas rectangle must be nonempty with positive scale");
  }
  Canvas c;
  c.geometry = {scale_m_per_px, x0_m, y0_m};
  c.width_px = static_cast<int>(std::ceil((x1_m - x0_m) / scale_m_per_px)) + 1;
  c.height_px = static_cast<int>(std::ceil((y1_m - y0_m) / scale_m_per_px)) + 1;
  c.pixels.assign(static_cast<std::size_t>(c.width_px) * c.height_px, 0);
  return c;
}

double GroundTruth::force_at(double penetration_m) const {
  const double lin = linear.theta_n_per_m * penetration_m + linear.theta0_n;
  return std::max(lin + quad_n_per_m2 * penetration_m * penetration_m, 0.0);
}

void stamp_ellipse(Canvas& canvas, double center_x_m, double center_y_m, double semi_u_m,
                   double semi_w_m, double axis_u_azimuth_rad) {
  if (!(semi_u_m > 0) || !(semi_w_m > 0)) {
    return;  // zero-area patch deposits nothing
  }
  const double scale = canvas.geometry.scale_m_per_px;
  const double ox = canvas.geometry.origin_x_m;
  const double oy = canvas.geometry.origin_y_m;
  const double cphi = std::cos(axis_u_azimuth_rad);
  const double sphi = std::sin(axis_u_azimuth_rad);

  // Axis-aligned bounding box of the rotated ellipse.
  const double ext_x = std::hypot(semi_u_m * cphi, semi_w_m * sphi);
  const double ext_y = std::hypot(semi_u_m * sphi, semi_w_m * cphi);
  if (center_x_m - ext_x < ox || center_y_m - ext_y < oy ||
      center_x_m + ext_x > ox + scale * (canvas.width_px - 1) ||
      center_y_m + ext_y > oy + scale * (canvas.height_px - 1)) {
    throw CanvasOverflow("footprint leaves the canvas");
  }

  const double inv_u2 = 1.0 / (semi_u_m * semi_u_m);
  const double inv_w2 = 1.0 / (semi_w_m * semi_w_m);
  // Quadratic coefficients of the implicit form in the world frame.
  const double qxx = cphi * cphi * inv_u2 + sphi * sphi * inv_w2;
  const double qyy = sphi * sphi * inv_u2 + cphi * cphi * inv_w2;
  const double qxy = cphi * sphi * (inv_u2 - inv_w2);

  const int iy_lo = std::max(0, static_cast<int>(std::floor((center_y_m - ext_y - oy) / scale)));
  const int iy_hi = std::min(canvas.height_px - 1,
                             static_cast<int>(std::ceil((center_y_m + ext_y - oy) / scale)));
  for (int iy = iy_lo; iy <= iy_hi; ++iy) {
    const double dy = canvas.pixel_y_m(iy) - center_y_m;
    // Solve qxx*dx^2 + 2*qxy*dy*dx + qyy*dy^2 - 1 <= 0 for the dx span.
    const double half_b = qxy * dy;
    const double c0 = qyy * dy * dy - 1.0;
    const double disc = half_b * half_b - qxx * c0;
    if (disc < 0) {
      continue;
    }
    const double root = std::sqrt(disc);
    const double dx_lo = (-half_b - root) / qxx;
    const double dx_hi = (-half_b + root) / qxx;
    int ix_lo = static_cast<int>(std::floor((center_x_m + dx_lo - ox) / scale)) - 1;
    int ix_hi = static_cast<int>(std::ceil((center_x_m + dx_hi - ox) / scale)) + 1;
    ix_lo = std::max(ix_lo, 0);
    ix_hi = std::min(ix_hi, canvas.width_px - 1);
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      const double dx = canvas.pixel_x_m(ix) - center_x_m;
      // Exact center-inside predicate; the span above only prunes the scan.
      const double u = dx * cphi + dy * sphi;
      const double w = -dx * sphi + dy * cphi;
      if (u * u * inv_u2 + w * w * inv_w2 <= 1.0) {
        canvas.set(ix, iy, 255);
      }
    }
  }
}

ExecutionTrace execute(const Plan& plan, const GroundTruth& truth, const ToolTipState& tip0,
                       Canvas& canvas) {
  if (plan.predicted_states.empty()) {
    throw ConfigError("plan has no states");
  }
  const std::size_t n = plan.inputs.size();
  ExecutionTrace trace;
  trace.states.resize(n + 1);
  trace.true_forces_n.resize(n + 1);
  trace.true_tip_offsets_m.resize(n + 1);

  // The arm tracks velocity commands exactly; mismatch lives in force/wear.
  trace.states[0] = plan.predicted_states[0];
  ToolTipState tip = tip0;
  tip.wear_gain_per_n = truth.wear_gain_per_n;

  std::mt19937_64 rng(truth.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double last_azimuth = 0.0;
  for (std::size_t t = 0; t <= n; ++t) {
    if (t > 0) {
      trace.states[t] = plan.predicted_states[t];
    }
    const auto& s = trace.states[t];
    double azimuth = last_azimuth;
    if (t < n) {
      const double mx = plan.predicted_states[t + 1].x_m - s.x_m;
      const double my = plan.predicted_states[t + 1].y_m - s.y_m;
      if (mx != 0 || my != 0) {
        azimuth = std::atan2(my, mx);
        last_azimuth = azimuth;
      }
    }
    const double z_ref = truth.surface.height_clamped(s.x_m, s.y_m);
    const double pen = s.z_m - z_ref;
    const double noise = truth.noise_sd_n > 0 ? truth.noise_sd_n * gauss(rng) : 0.0;
    const double realized =
        pen <= 0 ? std::max(truth.force_at(pen) + noise, 0.0) : 0.0;
    trace.true_forces_n[t] = realized;
    trace.true_tip_offsets_m[t] = tip.offset_m;

    if (pen <= 0 && tip.offset_m > 0) {
      const EllipseAxes ax = axes(tip);
      const double tilt_azimuth = azimuth + s.psi_rad + std::numbers::pi / 2;
      const double off = footprint_center_offset(tip);
      stamp_ellipse(canvas, s.x_m + off * std::cos(tilt_azimuth),
                    s.y_m + off * std::sin(tilt_azimuth), ax.major_m / 2, ax.minor_m / 2,
                    tilt_azimuth);
    }
    if (t < n) {
      const double step_len = std::hypot(plan.predicted_states[t + 1].x_m - s.x_m,
                                         plan.predicted_states[t + 1].y_m - s.y_m);
      tip = degrade(tip, realized, step_len);
    }
  }
  trace.final_tip = tip;
  return trace;
}

void write_canvas(const Canvas& canvas, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "P2\n" << canvas.width_px << " " << canvas.height_px << "\n255\n";
  for (int iy = 0; iy < canvas.height_px; ++iy) {
    for (int ix = 0; ix < canvas.width_px; ++ix) {
      out << static_cast<int>(canvas.at(ix, iy)) << (ix + 1 < canvas.width_px ? ' ' : '\n');
    }
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

Canvas read_canvas(const std::filesystem::path& path, const CanvasGeometry& geometry) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw IoError("truncated PGM file " + path.string());
  };
  if (next_token() != "P2") {
    throw IoError("not an ASCII PGM: " + path.string());
  }
  Canvas c;
  c.geometry = geometry;
  c.width_px = std::stoi(next_token());
  c.height_px = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (c.width_px <= 0 || c.height_px <= 0 || maxval != 255) {
    throw IoError("unsupported PGM header in " + path.string());
  }
  c.pixels.resize(static_cast<std::size_t>(c.width_px) * c.height_px);
  for (auto& px : c.pixels) {
    px = static_cast<std::uint8_t>(std::stoi(next_token()));
  }
  return c;
}

}  // namespace graphite
