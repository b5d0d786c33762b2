#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphite/force_model.hpp"
#include "graphite/planner.hpp"
#include "graphite/ref_stroke.hpp"
#include "graphite/sim_canvas.hpp"
#include "graphite/stroke_vision.hpp"

namespace graphite {

struct TipConfig {
  double gamma_deg{0};
  double cone_slope{5.45};
  double d0_m{1e-4};
  double d_max_m{4e-3};
};

struct ArmConfig {
  std::string name;
  TipConfig tip;
};

struct StrokeConfig {
  enum class Kind { l_shape, line, csv } kind{Kind::l_shape};
  // l_shape
  double leg_right_m{6e-3}, leg_down_m{5e-3}, w_right_m{1e-3}, w_down_m{7e-4}, step_m{5e-5};
  // line
  double x0_m{0}, y0_m{0}, x1_m{5e-3}, y1_m{0}, w_m{5e-4};
  int steps{100};
  // csv
  std::filesystem::path path;
};

struct SurfaceConfig {
  enum class Kind { flat, sine, csv } kind{Kind::flat};
  double height_m{0};
  double amplitude_m{0};
  double wavelength_m{5e-3};
  std::filesystem::path path;
};

struct ExperimentConfig {
  std::uint64_t seed{1};
  double dt_s{0.008};
  std::filesystem::path output_dir{"out"};

  StrokeConfig stroke;
  TipConfig tip;
  std::vector<ArmConfig> arms;  // comparison arms; exactly two for `compare`

  // Ground truth (what the simulator actually does).
  ForceModelParams truth_linear{-800.0, 0.3};
  double truth_quad_n_per_m2{0};
  double truth_noise_sd_n{0};
  double truth_kd_per_n{0.02};
  SurfaceConfig surface;

  // Initial model estimates the first plan is built with.
  ForceModelParams model0{-800.0, 0.3};
  double model0_kd_per_n{0};

  BoxConstraints constraints;
  PlannerConfig planner;

  int threshold_level{128};
  double scan_halfwidth_m{2e-3};
  double canvas_scale_m_per_px{1e-5};
  double canvas_margin_m{2.5e-3};

  std::vector<double> calibration_depths_m{5e-4, 1e-3, 1.5e-3};
  int calibration_samples_per_depth{100};
  double calibration_noise_sd_n{0.01};

  int iterations{10};
  bool refit_force{true};
  bool refit_kd{true};
  double kd_max_per_n{0.2};
};

/// Parses the experiment JSON; unknown keys are ignored, missing keys take
/// the defaults above. Throws ConfigError on malformed input.
ExperimentConfig load_config(const std::filesystem::path& path);

ReferenceStroke make_stroke(const ExperimentConfig& config);
ToolTipState tip_from_config(const TipConfig& tip, double wear_gain_per_n);

struct IterationRecord {
  int iteration{0};
  std::string arm;
  double v_m{0};
  double theta_n_per_m{0};
  double theta0_n{0};
  double kd_per_n{0};
  std::filesystem::path plan_csv, canvas_pgm, trace_csv, profile_csv;
};

/// Offline sweep calibration against the ground truth; writes the sweep data
/// and the fitted line, returns the fit.
ForceModelParams run_calibration(const ExperimentConfig& config);

/// Iterative loop for one arm: plan with current estimates, execute on the
/// ground truth (the true tip keeps its wear across iterations; the canvas
/// does not), measure, refit, repeat. Artifacts land under `arm_dir`.
std::vector<IterationRecord> run_iterations(const ExperimentConfig& config, const ArmConfig& arm,
                                            const std::filesystem::path& arm_dir);

struct ComparisonSummary {
  std::vector<IterationRecord> baseline;
  std::vector<IterationRecord> tilted;
  std::vector<double> improvement_pct;  // per iteration, relative to baseline
};

/// Runs both arms on identical ground truth and seeds and writes
/// iterations.csv plus summary.json under the output directory.
ComparisonSummary run_comparison(const ExperimentConfig& config);

/// Single-shot pipeline stages used by the CLI.
std::filesystem::path run_plan(const ExperimentConfig& config);
std::filesystem::path run_execute(const ExperimentConfig& config,
                                  const std::filesystem::path& plan_csv);
double run_measure(const ExperimentConfig& config, const std::filesystem::path& canvas_pgm);

void write_plan_csv(const Plan& plan, const std::filesystem::path& path);
std::vector<InputSample> read_plan_inputs_csv(const std::filesystem::path& path,
                                              EndEffectorState& initial_out);

void write_iterations_csv(const std::vector<IterationRecord>& records,
                          const std::filesystem::path& path);

}  // namespace graphite
