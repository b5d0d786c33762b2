#include "graphite/stroke_vision.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

#include "graphite/errors.hpp"

namespace graphite {

Mask threshold(const Canvas& canvas, int level) {
  Mask mask;
  mask.width_px = canvas.width_px;
  mask.height_px = canvas.height_px;
  mask.data.resize(canvas.pixels.size());
  for (std::size_t i = 0; i < canvas.pixels.size(); ++i) {
    mask.data[i] = canvas.pixels[i] >= level ? 1 : 0;
  }
  return mask;
}

namespace {

// Moore neighborhood in clockwise order (y grows downward).
constexpr std::array<std::array<int, 2>, 8> kRing = {{{-1, 0},
                                                      {-1, -1},
                                                      {0, -1},
                                                      {1, -1},
                                                      {1, 0},
                                                      {1, 1},
                                                      {0, 1},
                                                      {-1, 1}}};

bool mask_at(const Mask& mask, int ix, int iy) {
  return ix >= 0 && iy >= 0 && ix < mask.width_px && iy < mask.height_px && mask.at(ix, iy);
}

int ring_index(const std::array<int, 2>& from, const std::array<int, 2>& to) {
  const std::array<int, 2> d{to[0] - from[0], to[1] - from[1]};
  for (int i = 0; i < 8; ++i) {
    if (kRing[i] == d) {
      return i;
    }
  }
  return 0;
}

// Moore-neighbor tracing from the raster-first pixel of a component, with
// Jacob's stopping criterion.
std::vector<std::array<int, 2>> trace_boundary(const Mask& mask, std::array<int, 2> start,
                                               std::size_t pixel_budget) {
  std::vector<std::array<int, 2>> contour{start};
  std::array<int, 2> current = start;
  std::array<int, 2> backtrack{start[0] - 1, start[1]};  // raster scan came from the west
  const std::array<int, 2> start_backtrack = backtrack;

  for (std::size_t steps = 0; steps < 4 * pixel_budget + 8; ++steps) {
    const int from = ring_index(current, backtrack);
    std::array<int, 2> next{};
    std::array<int, 2> previous = backtrack;
    bool found = false;
    for (int k = 1; k <= 8; ++k) {
      const auto& d = kRing[(from + k) % 8];
      const std::array<int, 2> cand{current[0] + d[0], current[1] + d[1]};
      if (mask_at(mask, cand[0], cand[1])) {
        next = cand;
        found = true;
        break;
      }
      previous = cand;
    }
    if (!found) {
      break;  // isolated pixel
    }
    backtrack = previous;
    current = next;
    if (current == start && backtrack == start_backtrack) {
      break;
    }
    contour.push_back(current);
  }
  return contour;
}

}  // namespace

std::vector<std::vector<std::array<int, 2>>> extract_contour(const Mask& mask) {
  std::vector<std::uint8_t> visited(mask.data.size(), 0);
  std::vector<std::vector<std::array<int, 2>>> contours;
  bool any = false;
  for (int iy = 0; iy < mask.height_px; ++iy) {
    for (int ix = 0; ix < mask.width_px; ++ix) {
      const std::size_t idx = static_cast<std::size_t>(iy) * mask.width_px + ix;
      if (!mask.data[idx] || visited[idx]) {
        continue;
      }
      any = true;
      // Flood-fill the component so later raster hits skip it.
      std::size_t component_size = 0;
      std::deque<std::array<int, 2>> queue{{ix, iy}};
      visited[idx] = 1;
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        ++component_size;
        for (const auto& d : kRing) {
          const int nx = cx + d[0];
          const int ny = cy + d[1];
          if (mask_at(mask, nx, ny)) {
            const std::size_t nidx = static_cast<std::size_t>(ny) * mask.width_px + nx;
            if (!visited[nidx]) {
              visited[nidx] = 1;
              queue.push_back({nx, ny});
            }
          }
        }
      }
      contours.push_back(trace_boundary(mask, {ix, iy}, component_size));
    }
  }
  if (!any) {
    throw EmptyMask("no deposit pixels to outline");
  }
  return contours;
}

WidthProfile width_profile(const Mask& mask, const ReferenceStroke& stroke,
                           const CanvasGeometry& geometry, double scan_halfwidth_m) {
  if (!(scan_halfwidth_m > 0)) {
    throw ConfigError("scan halfwidth must be positive");
  }
  const double scale = geometry.scale_m_per_px;
  const int reach = static_cast<int>(std::ceil(scan_halfwidth_m / scale));
  WidthProfile profile;
  profile.samples.resize(stroke.samples.size());
  for (int t = 0; t <= stroke.horizon(); ++t) {
    const StrokeFrame frame = frame_at(stroke, t);
    const double px = stroke.samples[t].x_m;
    const double py = stroke.samples[t].y_m;
    int best_run = 0;
    int run = 0;
    for (int k = -reach; k <= reach; ++k) {
      const double x = px + k * scale * frame.nx;
      const double y = py + k * scale * frame.ny;
      const int ix = static_cast<int>(std::lround((x - geometry.origin_x_m) / scale));
      const int iy = static_cast<int>(std::lround((y - geometry.origin_y_m) / scale));
      if (mask_at(mask, ix, iy)) {
        ++run;
        best_run = std::max(best_run, run);
      } else {
        run = 0;
      }
    }
    profile.samples[t].valid = best_run > 0;
    profile.samples[t].w_a_m = best_run * scale;
  }
  return profile;
}

double error_metric(const WidthProfile& profile, const ReferenceStroke& stroke) {
  if (profile.samples.size() != stroke.samples.size()) {
    throw LengthMismatch("width profile does not match the stroke");
  }
  double total = 0;
  for (std::size_t t = 0; t < profile.samples.size(); ++t) {
    if (profile.samples[t].valid) {
      total += std::abs(profile.samples[t].w_a_m - stroke.samples[t].w_m);
    } else {
      total += stroke.samples[t].w_m;
    }
  }
  return total;
}

void write_profile_csv(const WidthProfile& profile, const ReferenceStroke& stroke,
                       const std::filesystem::path& path) {
  if (profile.samples.size() != stroke.samples.size()) {
    throw LengthMismatch("width profile does not match the stroke");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "t,w_ref_m,w_a_m,valid\n";
  char buf[128];
  for (std::size_t t = 0; t < profile.samples.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", t, stroke.samples[t].w_m,
                  profile.samples[t].valid ? profile.samples[t].w_a_m : 0.0,
                  profile.samples[t].valid ? 1 : 0);
    out << buf;
  }
}

}  // namespace graphite
