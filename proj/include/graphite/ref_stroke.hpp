#pragma once

#include <array>
#include <filesystem>
#include <vector>

namespace graphite {

struct StrokeSample {
  double x_m{0};
  double y_m{0};
  double w_m{0};  // target deposition width, > 0
};

/// Reference stroke sampled at one point per control step: N input steps,
/// N + 1 samples.
struct ReferenceStroke {
  std::vector<StrokeSample> samples;
  double dt_s{0.008};

  int horizon() const { return static_cast<int>(samples.size()) - 1; }
};

/// Local frame at a stroke sample: unit tangent and its +90° rotation.
struct StrokeFrame {
  double tx{1}, ty{0};
  double nx{0}, ny{1};
};

/// Wraps pre-sampled polyline data into a stroke. Throws LengthMismatch if
/// points and widths differ in length, NonPositiveWidth if any width <= 0.
ReferenceStroke build_polyline_stroke(const std::vector<std::array<double, 2>>& points_m,
                                      const std::vector<double>& widths_m, double dt_s);

/// Two-leg stroke: rightward leg of length `leg_right_m` and width `w_right_m`,
/// then downward leg of length `leg_down_m` and width `w_down_m`, starting at
/// the origin. Samples are spaced `step_m` apart along each leg.
ReferenceStroke build_l_stroke(double leg_right_m, double leg_down_m, double w_right_m,
                               double w_down_m, double step_m, double dt_s);

/// Straight stroke from (x0,y0) to (x1,y1) with constant width, `n_steps`
/// input steps.
ReferenceStroke build_line_stroke(double x0_m, double y0_m, double x1_m, double y1_m,
                                  double w_m, int n_steps, double dt_s);

/// Tangent by central difference (one-sided at the endpoints), normal is the
/// tangent rotated +90°. Throws DegenerateTangent when the difference vector
/// vanishes.
StrokeFrame frame_at(const ReferenceStroke& stroke, int t);

/// CSV with header `x_m,y_m,w_m`, one row per sample. dt travels separately
/// in the experiment config.
void write_stroke_csv(const ReferenceStroke& stroke, const std::filesystem::path& path);
ReferenceStroke read_stroke_csv(const std::filesystem::path& path, double dt_s);

}  // namespace graphite
