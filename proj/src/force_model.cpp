#include "graphite/force_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include <Eigen/Dense>

#include "graphite/errors.hpp"

namespace graphite {

SurfaceMap::SurfaceMap(double origin_x_m, double origin_y_m, double spacing_m, int nx, int ny,
                       std::vector<double> heights_m)
    : origin_x_(origin_x_m),
      origin_y_(origin_y_m),
      spacing_(spacing_m),
      nx_(nx),
      ny_(ny),
      heights_(std::move(heights_m)) {
  if (nx_ < 2 || ny_ < 2) {
    throw ConfigError("surface grid needs at least 2x2 nodes");
  }
  if (!(spacing_ > 0)) {
    throw ConfigError("surface grid spacing must be positive");
  }
  if (heights_.size() != static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_)) {
    throw ConfigError("surface grid is not rectangular and complete");
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) {
      throw ConfigError("surface heights must be finite");
    }
  }
}

SurfaceMap SurfaceMap::flat(double height_m, double x0_m, double y0_m, double x1_m, double y1_m) {
  const double spacing = std::max(x1_m - x0_m, y1_m - y0_m);
  if (!(spacing > 0)) {
    throw ConfigError("flat surface extent must be positive");
  }
  return SurfaceMap(x0_m, y0_m, spacing, 2, 2, std::vector<double>(4, height_m));
}

namespace {

// Fractional grid coordinate, snapped to the nearest node when within 1e-9 of
// it so node queries return stored heights exactly.
void grid_coord(double value, double origin, double spacing, int n, int& index, double& frac) {
  double t = (value - origin) / spacing;
  const double nearest = std::nearbyint(t);
  if (std::abs(t - nearest) < 1e-9) {
    t = nearest;
  }
  index = static_cast<int>(std::floor(t));
  index = std::clamp(index, 0, n - 2);
  frac = t - index;
}

}  // namespace

double SurfaceMap::height_at(double x_m, double y_m) const {
  if (x_m < origin_x_ || x_m > max_x_m() || y_m < origin_y_ || y_m > max_y_m()) {
    throw OutOfBounds("surface query outside grid");
  }
  return height_clamped(x_m, y_m);
}

double SurfaceMap::height_clamped(double x_m, double y_m) const {
  const double x = std::clamp(x_m, origin_x_, max_x_m());
  const double y = std::clamp(y_m, origin_y_, max_y_m());
  int ix, iy;
  double fx, fy;
  grid_coord(x, origin_x_, spacing_, nx_, ix, fx);
  grid_coord(y, origin_y_, spacing_, ny_, iy, fy);
  const double h00 = heights_[iy * nx_ + ix];
  const double h10 = heights_[iy * nx_ + ix + 1];
  const double h01 = heights_[(iy + 1) * nx_ + ix];
  const double h11 = heights_[(iy + 1) * nx_ + ix + 1];
  const double hx0 = h00 + fx * (h10 - h00);
  const double hx1 = h01 + fx * (h11 - h01);
  return hx0 + fy * (hx1 - hx0);
}

double force(const ForceModelParams& params, double z_m, double z_ref_m) {
  return std::max(params.theta_n_per_m * (z_m - z_ref_m) + params.theta0_n, 0.0);
}

CalibrationSet sweep_calibration(const SurfaceMap& surface,
                                 const std::function<double(double)>& true_force_n,
                                 const std::vector<double>& depths_m, int samples_per_depth,
                                 double noise_sd_n, std::uint64_t seed) {
  if (depths_m.empty()) {
    throw EmptyDepths("calibration needs at least one sweep depth");
  }
  if (samples_per_depth < 1) {
    throw ConfigError("samples_per_depth must be at least 1");
  }
  if (noise_sd_n < 0) {
    throw ConfigError("noise standard deviation must be nonnegative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CalibrationSet out;
  const std::size_t total = depths_m.size() * static_cast<std::size_t>(samples_per_depth);
  out.rows.reserve(total);
  std::size_t k = 0;
  for (double depth : depths_m) {
    if (depth < 0) {
      throw ConfigError("sweep depths are penetration magnitudes and must be >= 0");
    }
    for (int i = 0; i < samples_per_depth; ++i, ++k) {
      // Walk the grid diagonal so the sweep sees the height offsets.
      const double f = total > 1 ? static_cast<double>(k) / (total - 1) : 0.0;
      const double x = surface.origin_x_m() + f * (surface.max_x_m() - surface.origin_x_m());
      const double y = surface.origin_y_m() + f * (surface.max_y_m() - surface.origin_y_m());
      const double z_ref = surface.height_at(x, y);
      const double phase = 2.0 * std::numbers::pi * i / samples_per_depth;
      const double z = z_ref - depth * (1.0 - std::cos(phase)) / 2.0;
      const double pen = z - z_ref;
      const double noise = noise_sd_n > 0 ? noise_sd_n * gauss(rng) : 0.0;
      out.rows.push_back({pen, true_force_n(pen) + noise});
    }
  }
  return out;
}

ForceModelParams fit_force(const CalibrationSet& data) {
  const std::size_t n = data.count();
  if (n < 2) {
    throw RankDeficient("need at least two calibration rows");
  }
  double lo = data.rows.front()[0];
  double hi = lo;
  for (const auto& row : data.rows) {
    lo = std::min(lo, row[0]);
    hi = std::max(hi, row[0]);
  }
  if (hi == lo) {
    throw RankDeficient("all penetrations identical: slope not identifiable");
  }
  Eigen::MatrixXd regressors(n, 2);
  Eigen::VectorXd forces(n);
  for (std::size_t i = 0; i < n; ++i) {
    regressors(i, 0) = data.rows[i][0];
    regressors(i, 1) = 1.0;
    forces(i) = data.rows[i][1];
  }
  const Eigen::Vector2d theta = regressors.colPivHouseholderQr().solve(forces);
  return {theta(0), theta(1)};
}

namespace {

struct WearTracePoint {
  double force_n;
  double step_len_m;
  bool contact;
  double psi_rad;
};

double width_error_for_gain(double kd, const std::vector<WearTracePoint>& trace,
                            const std::vector<std::optional<double>>& widths,
                            const ToolTipState& tip_template, WidthConvention convention) {
  ToolTipState tip = tip_template;
  tip.wear_gain_per_n = kd;
  double err = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (widths[t].has_value()) {
      double w_model = 0;
      if (trace[t].contact && tip.offset_m > 0) {
        w_model = deposition_width(axes(tip), trace[t].psi_rad, convention);
      }
      const double diff = w_model - *widths[t];
      err += diff * diff;
    }
    if (t + 1 < trace.size()) {
      tip = degrade(tip, trace[t].force_n, trace[t].step_len_m);
    }
  }
  return err;
}

}  // namespace

double fit_degradation(const std::vector<std::optional<double>>& widths_measured_m,
                       const std::vector<EndEffectorState>& trajectory,
                       const ToolTipState& tip_template, const ForceModelParams& params,
                       const SurfaceMap& surface, double kd_max_per_n,
                       WidthConvention convention) {
  if (widths_measured_m.size() != trajectory.size()) {
    throw LengthMismatch("width profile and trajectory differ in length");
  }
  if (trajectory.empty()) {
    throw LengthMismatch("empty trajectory");
  }
  if (!(kd_max_per_n > 0)) {
    throw ConfigError("kd search bound must be positive");
  }

  std::vector<WearTracePoint> trace(trajectory.size());
  bool any_contact = false;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const auto& s = trajectory[t];
    const double z_ref = surface.height_clamped(s.x_m, s.y_m);
    const double pen = s.z_m - z_ref;
    const bool contact = pen <= 0;
    any_contact = any_contact || contact;
    trace[t].contact = contact;
    trace[t].psi_rad = s.psi_rad;
    trace[t].force_n = contact ? force(params, s.z_m, z_ref) : 0.0;
    trace[t].step_len_m =
        t + 1 < trajectory.size()
            ? std::hypot(trajectory[t + 1].x_m - s.x_m, trajectory[t + 1].y_m - s.y_m)
            : 0.0;
  }
  if (!any_contact) {
    throw NoContact("trajectory never penetrates the surface");
  }

  const auto objective = [&](double kd) {
    return width_error_for_gain(kd, trace, widths_measured_m, tip_template, convention);
  };

  // Coarse scan to bracket the minimum, then golden-section refinement.
  constexpr int kScanPoints = 65;
  int best = 0;
  double best_err = objective(0.0);
  for (int i = 1; i < kScanPoints; ++i) {
    const double kd = kd_max_per_n * i / (kScanPoints - 1);
    const double err = objective(kd);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  double lo = kd_max_per_n * std::max(best - 1, 0) / (kScanPoints - 1);
  double hi = kd_max_per_n * std::min(best + 1, kScanPoints - 1) / (kScanPoints - 1);

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int i = 0; i < 120 && hi - lo > 1e-15 * kd_max_per_n; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
    }
  }
  return (f1 <= f2) ? x1 : x2;
}

void write_calibration_csv(const CalibrationSet& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "penetration_m,force_n\n";
  char buf[96];
  for (const auto& row : data.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", row[0], row[1]);
    out << buf;
  }
}

CalibrationSet read_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty calibration file " + path.string());
  }
  CalibrationSet out;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::array<double, 2> v{};
    for (int i = 0; i < 2; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw IoError("malformed calibration row: " + line);
      }
      v[i] = std::stod(cell);
    }
    out.rows.push_back(v);
  }
  return out;
}

void write_surface_csv(const SurfaceMap& surface, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  nlohmann::json header = {{"origin_x_m", surface.origin_x_m()},
                           {"origin_y_m", surface.origin_y_m()},
                           {"spacing_m", surface.spacing_m()},
                           {"nx", surface.nx()},
                           {"ny", surface.ny()}};
  out << header.dump() << "\n";
  char buf[64];
  for (int iy = 0; iy < surface.ny(); ++iy) {
    for (int ix = 0; ix < surface.nx(); ++ix) {
      std::snprintf(buf, sizeof(buf), "%.17g", surface.heights()[iy * surface.nx() + ix]);
      out << buf << (ix + 1 < surface.nx() ? "," : "\n");
    }
  }
}

SurfaceMap read_surface_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("missing surface header in " + path.string());
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad surface header: " + std::string(e.what()));
  }
  const int nx = header.at("nx").get<int>();
  const int ny = header.at("ny").get<int>();
  std::vector<double> heights;
  heights.reserve(static_cast<std::size_t>(nx) * ny);
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      heights.push_back(std::stod(cell));
    }
  }
  return SurfaceMap(header.at("origin_x_m").get<double>(), header.at("origin_y_m").get<double>(),
                    header.at("spacing_m").get<double>(), nx, ny, std::move(heights));
}

}  // namespace graphite
