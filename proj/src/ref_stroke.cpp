#include "graphite/ref_stroke.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "graphite/errors.hpp"

namespace graphite {

ReferenceStroke build_polyline_stroke(const std::vector<std::array<double, 2>>& points_m,
                                      const std::vector<double>& widths_m, double dt_s) {
  if (points_m.size() != widths_m.size()) {
    throw LengthMismatch("points and widths differ in length");
  }
  if (points_m.size() < 2) {
    throw LengthMismatch("a stroke needs at least two samples");
  }
  if (dt_s <= 0) {
    throw ConfigError("dt must be positive");
  }
  ReferenceStroke stroke;
  stroke.dt_s = dt_s;
  stroke.samples.reserve(points_m.size());
  for (std::size_t i = 0; i < points_m.size(); ++i) {
    if (!(widths_m[i] > 0)) {
      throw NonPositiveWidth("reference width must be positive");
    }
    if (!std::isfinite(points_m[i][0]) || !std::isfinite(points_m[i][1]) ||
        !std::isfinite(widths_m[i])) {
      throw ConfigError("stroke samples must be finite");
    }
    stroke.samples.push_back({points_m[i][0], points_m[i][1], widths_m[i]});
  }
  return stroke;
}

ReferenceStroke build_l_stroke(double leg_right_m, double leg_down_m, double w_right_m,
                               double w_down_m, double step_m, double dt_s) {
  if (leg_right_m <= 0 || leg_down_m <= 0 || step_m <= 0) {
    throw ConfigError("leg lengths and step must be positive");
  }
  const int n1 = std::max(1, static_cast<int>(std::lround(leg_right_m / step_m)));
  const int n2 = std::max(1, static_cast<int>(std::lround(leg_down_m / step_m)));
  std::vector<std::array<double, 2>> pts;
  std::vector<double> widths;
  pts.reserve(n1 + n2 + 1);
  for (int i = 0; i <= n1; ++i) {
    pts.push_back({leg_right_m * i / n1, 0.0});
    widths.push_back(w_right_m);
  }
  for (int j = 1; j <= n2; ++j) {
    pts.push_back({leg_right_m, -leg_down_m * j / n2});
    widths.push_back(w_down_m);
  }
  return build_polyline_stroke(pts, widths, dt_s);
}

ReferenceStroke build_line_stroke(double x0_m, double y0_m, double x1_m, double y1_m,
                                  double w_m, int n_steps, double dt_s) {
  if (n_steps < 1) {
    throw ConfigError("line stroke needs at least one step");
  }
  std::vector<std::array<double, 2>> pts;
  std::vector<double> widths;
  pts.reserve(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i) {
    const double s = static_cast<double>(i) / n_steps;
    pts.push_back({x0_m + s * (x1_m - x0_m), y0_m + s * (y1_m - y0_m)});
    widths.push_back(w_m);
  }
  return build_polyline_stroke(pts, widths, dt_s);
}

StrokeFrame frame_at(const ReferenceStroke& stroke, int t) {
  const int n = stroke.horizon();
  if (t < 0 || t > n) {
    throw OutOfBounds("sample index outside stroke");
  }
  const auto& s = stroke.samples;
  const int lo = (t == 0) ? 0 : t - 1;
  const int hi = (t == n) ? n : t + 1;
  const double dx = s[hi].x_m - s[lo].x_m;
  const double dy = s[hi].y_m - s[lo].y_m;
  const double len = std::hypot(dx, dy);
  if (len == 0) {
    throw DegenerateTangent("consecutive stroke samples coincide");
  }
  StrokeFrame f;
  f.tx = dx / len;
  f.ty = dy / len;
  f.nx = -f.ty;
  f.ny = f.tx;
  return f;
}

void write_stroke_csv(const ReferenceStroke& stroke, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "x_m,y_m,w_m\n";
  char buf[128];
  for (const auto& s : stroke.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.x_m, s.y_m, s.w_m);
    out << buf;
  }
}

ReferenceStroke read_stroke_csv(const std::filesystem::path& path, double dt_s) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty stroke file " + path.string());
  }
  std::vector<std::array<double, 2>> pts;
  std::vector<double> widths;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double v[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw IoError("malformed stroke row: " + line);
      }
      v[i] = std::stod(cell);
    }
    pts.push_back({v[0], v[1]});
    widths.push_back(v[2]);
  }
  return build_polyline_stroke(pts, widths, dt_s);
}

}  // namespace graphite
