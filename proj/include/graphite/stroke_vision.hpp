#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "graphite/ref_stroke.hpp"
#include "graphite/sim_canvas.hpp"

namespace graphite {

/// Binary mask over canvas pixels.
struct Mask {
  int width_px{0};
  int height_px{0};
  std::vector<std::uint8_t> data;  // 0 or 1, row-major

  bool at(int ix, int iy) const {
    return data[static_cast<std::size_t>(iy) * width_px + ix] != 0;
  }
};

/// Pixels at or above `level` count as deposit. Levels above 255 therefore
/// select nothing.
Mask threshold(const Canvas& canvas, int level);

/// Outer boundaries of the 8-connected components, each traced with the
/// Moore neighborhood into a closed pixel sequence (x, y). Throws EmptyMask
/// when no pixel is set.
std::vector<std::vector<std::array<int, 2>>> extract_contour(const Mask& mask);

struct WidthSample {
  double w_a_m{0};
  bool valid{false};
};

struct WidthProfile {
  std::vector<WidthSample> samples;  // aligned with stroke samples
};

/// Measured stroke width per reference sample: a scanline is cast along the
/// stroke normal through the reference point, sampled at one-pixel spacing
/// over +-scan_halfwidth, and the longest contiguous run of deposit pixels
/// on it becomes the width. Samples whose scanline hits no deposit are
/// flagged invalid.
WidthProfile width_profile(const Mask& mask, const ReferenceStroke& stroke,
                           const CanvasGeometry& geometry, double scan_halfwidth_m);

/// Sum of absolute width tracking errors; invalid samples count their full
/// reference width (missing deposit is maximal error).
double error_metric(const WidthProfile& profile, const ReferenceStroke& stroke);

/// CSV `t,w_ref_m,w_a_m,valid`, one row per sample.
void write_profile_csv(const WidthProfile& profile, const ReferenceStroke& stroke,
                       const std::filesystem::path& path);

}  // namespace graphite
