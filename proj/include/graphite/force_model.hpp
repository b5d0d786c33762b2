#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "graphite/ee_kinematics.hpp"
#include "graphite/tool_geometry.hpp"

namespace graphite {

/// Linear contact force map: F = theta * (z - z_ref) + theta0, floored at 0.
/// theta is negative for a downward z axis (deeper penetration, more force).
struct ForceModelParams {
  double theta_n_per_m{0};
  double theta0_n{0};
};

/// Rectangular grid of contact heights with bilinear interpolation, used as
/// per-position offsets to z_ref.
class SurfaceMap {
 public:
  SurfaceMap(double origin_x_m, double origin_y_m, double spacing_m, int nx, int ny,
             std::vector<double> heights_m);

  static SurfaceMap flat(double height_m, double x0_m, double y0_m, double x1_m, double y1_m);

  /// Bilinear interpolation; throws OutOfBounds outside the grid rectangle.
  double height_at(double x_m, double y_m) const;

  /// Same interpolation with the query clamped into the grid rectangle.
  /// Rollouts use this so a trajectory grazing the edge never aborts.
  double height_clamped(double x_m, double y_m) const;

  double origin_x_m() const { return origin_x_; }
  double origin_y_m() const { return origin_y_; }
  double spacing_m() const { return spacing_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double max_x_m() const { return origin_x_ + spacing_ * (nx_ - 1); }
  double max_y_m() const { return origin_y_ + spacing_ * (ny_ - 1); }
  const std::vector<double>& heights() const { return heights_; }

 private:
  double origin_x_, origin_y_, spacing_;
  int nx_, ny_;
  std::vector<double> heights_;  // row-major, [iy * nx + ix]
};

/// Rows of (penetration = z - z_ref, measured force).
struct CalibrationSet {
  std::vector<std::array<double, 2>> rows;

  std::size_t count() const { return rows.size(); }
};

double force(const ForceModelParams& params, double z_m, double z_ref_m);

/// Sweeps the commanded height sinusoidally down to each listed depth and
/// records (penetration, true_force(penetration) + gaussian noise). The
/// sweep positions walk the diagonal of the surface grid so uneven surfaces
/// exercise the height offsets. Deterministic per seed.
CalibrationSet sweep_calibration(const SurfaceMap& surface,
                                 const std::function<double(double)>& true_force_n,
                                 const std::vector<double>& depths_m, int samples_per_depth,
                                 double noise_sd_n, std::uint64_t seed);

/// Ordinary least squares on regressors [penetration, 1]. Throws
/// RankDeficient when the penetrations carry no spread.
ForceModelParams fit_force(const CalibrationSet& data);

/// Fits the scalar wear gain by matching modeled widths against measured ones
/// along an executed trajectory: golden-section search on [0, kd_max] after a
/// coarse bracketing scan. Samples without a measurement are skipped. Throws
/// NoContact when the trajectory never touches the surface.
double fit_degradation(const std::vector<std::optional<double>>& widths_measured_m,
                       const std::vector<EndEffectorState>& trajectory,
                       const ToolTipState& tip_template, const ForceModelParams& params,
                       const SurfaceMap& surface, double kd_max_per_n,
                       WidthConvention convention = WidthConvention::major_on_cos);

void write_calibration_csv(const CalibrationSet& data, const std::filesystem::path& path);
CalibrationSet read_calibration_csv(const std::filesystem::path& path);

/// Grid file: one JSON header line (origin, spacing, dimensions) followed by
/// ny comma-separated rows of heights.
void write_surface_csv(const SurfaceMap& surface, const std::filesystem::path& path);
SurfaceMap read_surface_csv(const std::filesystem::path& path);

}  // namespace graphite
