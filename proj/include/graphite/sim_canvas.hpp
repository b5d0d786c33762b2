#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "graphite/force_model.hpp"
#include "graphite/planner.hpp"
#include "graphite/tool_geometry.hpp"

namespace graphite {

struct CanvasGeometry {
  double scale_m_per_px{1e-5};
  double origin_x_m{0};  // world coordinates of the center of pixel (0, 0)
  double origin_y_m{0};
};

/// Binary grayscale raster: 0 blank, 255 deposited. Pixel (ix, iy) has its
/// center at origin + (ix, iy) * scale; y grows with the row index.
struct Canvas {
  int width_px{0};
  int height_px{0};
  CanvasGeometry geometry;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int ix, int iy) const { return pixels[static_cast<std::size_t>(iy) * width_px + ix]; }
  void set(int ix, int iy, std::uint8_t v) { pixels[static_cast<std::size_t>(iy) * width_px + ix] = v; }
  double pixel_x_m(int ix) const { return geometry.origin_x_m + ix * geometry.scale_m_per_px; }
  double pixel_y_m(int iy) const { return geometry.origin_y_m + iy * geometry.scale_m_per_px; }
};

/// Blank canvas covering the world rectangle [x0, x1] x [y0, y1].
Canvas make_canvas(double x0_m, double y0_m, double x1_m, double y1_m, double scale_m_per_px);

/// What the physical system actually does, as opposed to what the planner
/// believes: true force map (linear plus optional quadratic term and gaussian
/// sensor noise), true wear gain, true surface.
struct GroundTruth {
  ForceModelParams linear;
  double quad_n_per_m2{0};
  double noise_sd_n{0};
  double wear_gain_per_n{0};
  SurfaceMap surface;
  std::uint64_t seed{0};

  /// Noiseless true force at a penetration (z - z_ref <= 0), floored at 0.
  double force_at(double penetration_m) const;
};

struct ExecutionTrace {
  std::vector<EndEffectorState> states;   // N + 1, open-loop executed
  std::vector<double> true_forces_n;      // N + 1 sensor readings
  std::vector<double> true_tip_offsets_m; // N + 1
  ToolTipState final_tip;                 // worn tip after the stroke
};

/// Fills all pixels whose center satisfies the ellipse inequality
/// ((p-c)·e_u / semi_u)^2 + ((p-c)·e_w / semi_w)^2 <= 1, where e_u points at
/// `axis_u_azimuth_rad`. Throws CanvasOverflow if the ellipse bounding box
/// leaves the canvas.
void stamp_ellipse(Canvas& canvas, double center_x_m, double center_y_m, double semi_u_m,
                   double semi_w_m, double axis_u_azimuth_rad);

/// Executes a plan open-loop against the ground truth, depositing the true
/// contact ellipse at every penetrating sample: axes from the true tip
/// offset, center pushed along the tilt direction by the cone-plane center
/// offset, minor axis at angle psi from the local motion tangent. The true
/// tip wears with the true force; the canvas only ever gains pixels.
ExecutionTrace execute(const Plan& plan, const GroundTruth& truth, const ToolTipState& tip0,
                       Canvas& canvas);

/// Plain ASCII PGM (P2), max value 255. Round-trips exactly.
void write_canvas(const Canvas& canvas, const std::filesystem::path& path);
Canvas read_canvas(const std::filesystem::path& path, const CanvasGeometry& geometry);

}  // namespace graphite
