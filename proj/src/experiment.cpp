#include "graphite/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "graphite/errors.hpp"

namespace graphite {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Independent seed streams per iteration; both comparison arms share them.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (j.contains(key)) {
    return j.at(key).get<T>();
  }
  return fallback;
}

TipConfig parse_tip(const json& j, const TipConfig& base) {
  TipConfig tip = base;
  tip.gamma_deg = get_or(j, "gamma_deg", tip.gamma_deg);
  tip.cone_slope = get_or(j, "cone_slope", tip.cone_slope);
  tip.d0_m = get_or(j, "d0_m", tip.d0_m);
  tip.d_max_m = get_or(j, "d_max_m", tip.d_max_m);
  return tip;
}

std::array<double, 4> parse_bounds(const json& j, const char* key,
                                   const std::array<double, 4>& fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 4) {
    throw ConfigError(std::string(key) + " must have 4 entries");
  }
  return {v[0], v[1], v[2], v[3]};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.dt_s = get_or(j, "dt_s", cfg.dt_s);
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir.string());

  if (j.contains("stroke")) {
    const json& s = j.at("stroke");
    const std::string kind = get_or<std::string>(s, "type", "l");
    if (kind == "l") {
      cfg.stroke.kind = StrokeConfig::Kind::l_shape;
      cfg.stroke.leg_right_m = get_or(s, "leg_right_m", cfg.stroke.leg_right_m);
      cfg.stroke.leg_down_m = get_or(s, "leg_down_m", cfg.stroke.leg_down_m);
      cfg.stroke.w_right_m = get_or(s, "w_right_m", cfg.stroke.w_right_m);
      cfg.stroke.w_down_m = get_or(s, "w_down_m", cfg.stroke.w_down_m);
      cfg.stroke.step_m = get_or(s, "step_m", cfg.stroke.step_m);
    } else if (kind == "line") {
      cfg.stroke.kind = StrokeConfig::Kind::line;
      cfg.stroke.x0_m = get_or(s, "x0_m", cfg.stroke.x0_m);
      cfg.stroke.y0_m = get_or(s, "y0_m", cfg.stroke.y0_m);
      cfg.stroke.x1_m = get_or(s, "x1_m", cfg.stroke.x1_m);
      cfg.stroke.y1_m = get_or(s, "y1_m", cfg.stroke.y1_m);
      cfg.stroke.w_m = get_or(s, "w_m", cfg.stroke.w_m);
      cfg.stroke.steps = get_or(s, "steps", cfg.stroke.steps);
    } else if (kind == "csv") {
      cfg.stroke.kind = StrokeConfig::Kind::csv;
      cfg.stroke.path = get_or<std::string>(s, "path", "");
    } else {
      throw ConfigError("unknown stroke type: " + kind);
    }
  }

  if (j.contains("tip")) {
    cfg.tip = parse_tip(j.at("tip"), cfg.tip);
  }
  if (j.contains("arms")) {
    for (const json& a : j.at("arms")) {
      ArmConfig arm;
      arm.name = get_or<std::string>(a, "name", "arm" + std::to_string(cfg.arms.size()));
      arm.tip = parse_tip(a, cfg.tip);
      cfg.arms.push_back(arm);
    }
  } else {
    ArmConfig flat{"flat", cfg.tip};
    flat.tip.gamma_deg = 0;
    ArmConfig tilted{"tilted", cfg.tip};
    cfg.arms = {flat, tilted};
  }

  if (j.contains("truth")) {
    const json& t = j.at("truth");
    cfg.truth_linear.theta_n_per_m = get_or(t, "theta_n_per_m", cfg.truth_linear.theta_n_per_m);
    cfg.truth_linear.theta0_n = get_or(t, "theta0_n", cfg.truth_linear.theta0_n);
    cfg.truth_quad_n_per_m2 = get_or(t, "quad_n_per_m2", cfg.truth_quad_n_per_m2);
    cfg.truth_noise_sd_n = get_or(t, "noise_sd_n", cfg.truth_noise_sd_n);
    cfg.truth_kd_per_n = get_or(t, "kd_per_n", cfg.truth_kd_per_n);
  }

  if (j.contains("surface")) {
    const json& s = j.at("surface");
    const std::string kind = get_or<std::string>(s, "type", "flat");
    if (kind == "flat") {
      cfg.surface.kind = SurfaceConfig::Kind::flat;
      cfg.surface.height_m = get_or(s, "height_m", cfg.surface.height_m);
    } else if (kind == "sine") {
      cfg.surface.kind = SurfaceConfig::Kind::sine;
      cfg.surface.height_m = get_or(s, "height_m", cfg.surface.height_m);
      cfg.surface.amplitude_m = get_or(s, "amplitude_m", cfg.surface.amplitude_m);
      cfg.surface.wavelength_m = get_or(s, "wavelength_m", cfg.surface.wavelength_m);
    } else if (kind == "csv") {
      cfg.surface.kind = SurfaceConfig::Kind::csv;
      cfg.surface.path = get_or<std::string>(s, "path", "");
    } else {
      throw ConfigError("unknown surface type: " + kind);
    }
  }

  if (j.contains("model0")) {
    const json& m = j.at("model0");
    cfg.model0.theta_n_per_m = get_or(m, "theta_n_per_m", cfg.truth_linear.theta_n_per_m);
    cfg.model0.theta0_n = get_or(m, "theta0_n", cfg.truth_linear.theta0_n);
    cfg.model0_kd_per_n = get_or(m, "kd_per_n", cfg.model0_kd_per_n);
  } else {
    cfg.model0 = cfg.truth_linear;
  }

  // Defaults sized for strokes a few millimetres across.
  cfg.constraints.state_lower = {-0.5, -0.5, -2e-3, -7.0};
  cfg.constraints.state_upper = {0.5, 0.5, 0.05, 7.0};
  cfg.constraints.input_lower = {-0.05, -0.05, -0.05, -25.0};
  cfg.constraints.input_upper = {0.05, 0.05, 0.05, 25.0};
  if (j.contains("constraints")) {
    const json& c = j.at("constraints");
    cfg.constraints.state_lower = parse_bounds(c, "state_lower", cfg.constraints.state_lower);
    cfg.constraints.state_upper = parse_bounds(c, "state_upper", cfg.constraints.state_upper);
    cfg.constraints.input_lower = parse_bounds(c, "input_lower", cfg.constraints.input_lower);
    cfg.constraints.input_upper = parse_bounds(c, "input_upper", cfg.constraints.input_upper);
  }

  if (j.contains("planner")) {
    const json& p = j.at("planner");
    if (p.contains("q_diag")) {
      const auto q = p.at("q_diag").get<std::vector<double>>();
      if (q.size() != 3) {
        throw ConfigError("q_diag must have 3 entries");
      }
      cfg.planner.q_weight = Eigen::Vector3d(q[0], q[1], q[2]).asDiagonal();
    }
    cfg.planner.kappa_m = get_or(p, "kappa_m", cfg.planner.kappa_m);
    cfg.planner.max_iterations = get_or(p, "max_iterations", cfg.planner.max_iterations);
    cfg.planner.step_tolerance = get_or(p, "step_tolerance", cfg.planner.step_tolerance);
    cfg.planner.restarts = get_or(p, "restarts", cfg.planner.restarts);
    cfg.planner.nominal_depth_m = get_or(p, "nominal_depth_m", cfg.planner.nominal_depth_m);
    const std::string conv = get_or<std::string>(p, "width_convention", "major_on_cos");
    if (conv == "major_on_cos") {
      cfg.planner.width_convention = WidthConvention::major_on_cos;
    } else if (conv == "major_on_sin") {
      cfg.planner.width_convention = WidthConvention::major_on_sin;
    } else {
      throw ConfigError("unknown width convention: " + conv);
    }
  }
  cfg.planner.seed = cfg.seed;

  if (j.contains("measure")) {
    const json& m = j.at("measure");
    cfg.threshold_level = get_or(m, "threshold_level", cfg.threshold_level);
    cfg.scan_halfwidth_m = get_or(m, "scan_halfwidth_m", cfg.scan_halfwidth_m);
  }
  if (j.contains("canvas")) {
    const json& c = j.at("canvas");
    cfg.canvas_scale_m_per_px = get_or(c, "scale_m_per_px", cfg.canvas_scale_m_per_px);
    cfg.canvas_margin_m = get_or(c, "margin_m", cfg.canvas_margin_m);
  }
  if (j.contains("calibration")) {
    const json& c = j.at("calibration");
    cfg.calibration_depths_m =
        get_or(c, "depths_m", cfg.calibration_depths_m);
    cfg.calibration_samples_per_depth =
        get_or(c, "samples_per_depth", cfg.calibration_samples_per_depth);
    cfg.calibration_noise_sd_n = get_or(c, "noise_sd_n", cfg.calibration_noise_sd_n);
  }
  cfg.iterations = get_or(j, "iterations", cfg.iterations);
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    cfg.refit_force = get_or(f, "refit_force", cfg.refit_force);
    cfg.refit_kd = get_or(f, "refit_kd", cfg.refit_kd);
    cfg.kd_max_per_n = get_or(f, "kd_max_per_n", cfg.kd_max_per_n);
  }
  if (cfg.iterations < 1) {
    throw ConfigError("iterations must be at least 1");
  }
  return cfg;
}

struct WorldRect {
  double x0, y0, x1, y1;
};

WorldRect canvas_rect(const ReferenceStroke& stroke, double margin_m) {
  double x0 = stroke.samples[0].x_m, x1 = x0;
  double y0 = stroke.samples[0].y_m, y1 = y0;
  for (const auto& s : stroke.samples) {
    x0 = std::min(x0, s.x_m);
    x1 = std::max(x1, s.x_m);
    y0 = std::min(y0, s.y_m);
    y1 = std::max(y1, s.y_m);
  }
  return {x0 - margin_m, y0 - margin_m, x1 + margin_m, y1 + margin_m};
}

SurfaceMap make_surface(const ExperimentConfig& cfg, const WorldRect& rect) {
  switch (cfg.surface.kind) {
    case SurfaceConfig::Kind::flat:
      return SurfaceMap::flat(cfg.surface.height_m, rect.x0, rect.y0, rect.x1, rect.y1);
    case SurfaceConfig::Kind::sine: {
      const double wavelength = cfg.surface.wavelength_m;
      if (!(wavelength > 0)) {
        throw ConfigError("sine surface needs a positive wavelength");
      }
      const double spacing = wavelength / 16.0;
      const int nx = std::max(2, static_cast<int>(std::ceil((rect.x1 - rect.x0) / spacing)) + 1);
      const int ny = std::max(2, static_cast<int>(std::ceil((rect.y1 - rect.y0) / spacing)) + 1);
      std::vector<double> heights(static_cast<std::size_t>(nx) * ny);
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          const double x = rect.x0 + ix * spacing;
          const double y = rect.y0 + iy * spacing;
          heights[static_cast<std::size_t>(iy) * nx + ix] =
              cfg.surface.height_m + cfg.surface.amplitude_m *
                                         std::sin(2 * kPi * x / wavelength) *
                                         std::sin(2 * kPi * y / wavelength);
        }
      }
      return SurfaceMap(rect.x0, rect.y0, spacing, nx, ny, std::move(heights));
    }
    case SurfaceConfig::Kind::csv:
      return read_surface_csv(cfg.surface.path);
  }
  throw ConfigError("unreachable surface kind");
}

GroundTruth make_truth(const ExperimentConfig& cfg, SurfaceMap surface, std::uint64_t seed) {
  return GroundTruth{cfg.truth_linear, cfg.truth_quad_n_per_m2, cfg.truth_noise_sd_n,
                     cfg.truth_kd_per_n, std::move(surface), seed};
}

void write_trace_csv(const ExecutionTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "t,x,y,z,psi,F_true,d_true\n";
  char buf[256];
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    const auto& s = trace.states[t];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, s.x_m, s.y_m,
                  s.z_m, s.psi_rad, trace.true_forces_n[t], trace.true_tip_offsets_m[t]);
    out << buf;
  }
}

// Rolls the believed wear model along an executed trajectory so the next
// iteration plans from the tip offset the model thinks it now has.
double roll_model_offset(double d0, double kd, const ForceModelParams& params,
                         const SurfaceMap& surface, const std::vector<EndEffectorState>& states,
                         double d_max) {
  double d = d0;
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    const double z_ref = surface.height_clamped(states[t].x_m, states[t].y_m);
    const double pen = states[t].z_m - z_ref;
    const double f = pen <= 0 ? force(params, states[t].z_m, z_ref) : 0.0;
    const double len =
        std::hypot(states[t + 1].x_m - states[t].x_m, states[t + 1].y_m - states[t].y_m);
    d = std::min(d + kd * f * len, d_max);
  }
  return d;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config field error: " + std::string(e.what()));
  }
}

ReferenceStroke make_stroke(const ExperimentConfig& config) {
  switch (config.stroke.kind) {
    case StrokeConfig::Kind::l_shape:
      return build_l_stroke(config.stroke.leg_right_m, config.stroke.leg_down_m,
                            config.stroke.w_right_m, config.stroke.w_down_m,
                            config.stroke.step_m, config.dt_s);
    case StrokeConfig::Kind::line:
      return build_line_stroke(config.stroke.x0_m, config.stroke.y0_m, config.stroke.x1_m,
                               config.stroke.y1_m, config.stroke.w_m, config.stroke.steps,
                               config.dt_s);
    case StrokeConfig::Kind::csv:
      return read_stroke_csv(config.stroke.path, config.dt_s);
  }
  throw ConfigError("unreachable stroke kind");
}

ToolTipState tip_from_config(const TipConfig& tip, double wear_gain_per_n) {
  return make_tool_tip(tip.cone_slope, deg_to_rad(tip.gamma_deg), tip.d0_m, wear_gain_per_n,
                       tip.d_max_m);
}

ForceModelParams run_calibration(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const ReferenceStroke stroke = make_stroke(config);
  const WorldRect rect = canvas_rect(stroke, config.canvas_margin_m);
  const SurfaceMap surface = make_surface(config, rect);
  const GroundTruth truth = make_truth(config, surface, 0);

  const auto true_force = [&truth](double pen) { return truth.force_at(pen); };
  const CalibrationSet data = sweep_calibration(
      surface, true_force, config.calibration_depths_m, config.calibration_samples_per_depth,
      config.calibration_noise_sd_n, mix_seed(config.seed, 0xca11b));
  write_calibration_csv(data, config.output_dir / "calibration.csv");

  const ForceModelParams fit = fit_force(data);
  nlohmann::json out = {{"theta_n_per_m", fit.theta_n_per_m}, {"theta0_n", fit.theta0_n}};
  std::ofstream f(config.output_dir / "force_fit.json");
  f << out.dump(2) << "\n";
  return fit;
}

void write_plan_csv(const Plan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "t,vx,vy,vz,wpsi,x,y,z,psi,w_pred\n";
  char buf[352];
  for (std::size_t t = 0; t < plan.predicted_states.size(); ++t) {
    const InputSample u = t < plan.inputs.size() ? plan.inputs[t] : InputSample{};
    const auto& s = plan.predicted_states[t];
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, u.vx_mps,
                  u.vy_mps, u.vz_mps, u.wpsi_radps, s.x_m, s.y_m, s.z_m, s.psi_rad,
                  plan.predicted_widths[t]);
    out << buf;
  }
}

std::vector<InputSample> read_plan_inputs_csv(const std::filesystem::path& path,
                                              EndEffectorState& initial_out) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty plan file " + path.string());
  }
  std::vector<std::array<double, 10>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::array<double, 10> v{};
    for (int i = 0; i < 10; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw IoError("malformed plan row: " + line);
      }
      v[i] = std::stod(cell);
    }
    rows.push_back(v);
  }
  if (rows.empty()) {
    throw IoError("plan file has no samples: " + path.string());
  }
  initial_out = {rows[0][5], rows[0][6], rows[0][7], rows[0][8]};
  std::vector<InputSample> inputs;
  inputs.reserve(rows.size() - 1);
  for (std::size_t t = 0; t + 1 < rows.size(); ++t) {
    inputs.push_back({rows[t][1], rows[t][2], rows[t][3], rows[t][4]});
  }
  return inputs;
}

void write_iterations_csv(const std::vector<IterationRecord>& records,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "iteration,arm,V_m,theta,theta0,kd\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.arm.c_str(), r.v_m, r.theta_n_per_m, r.theta0_n, r.kd_per_n);
    out << buf;
  }
}

std::vector<IterationRecord> run_iterations(const ExperimentConfig& config, const ArmConfig& arm,
                                            const std::filesystem::path& arm_dir) {
  std::filesystem::create_directories(arm_dir);
  const ReferenceStroke stroke = make_stroke(config);
  const WorldRect rect = canvas_rect(stroke, config.canvas_margin_m);
  const SurfaceMap surface = make_surface(config, rect);

  ToolTipState true_tip = tip_from_config(arm.tip, config.truth_kd_per_n);
  ForceModelParams params = config.model0;
  double kd_hat = config.model0_kd_per_n;
  double d0_hat = arm.tip.d0_m;

  std::vector<IterationRecord> records;
  for (int iter = 1; iter <= config.iterations; ++iter) {
    Canvas canvas =
        make_canvas(rect.x0, rect.y0, rect.x1, rect.y1, config.canvas_scale_m_per_px);

    const ToolTipState model_tip = make_tool_tip(
        arm.tip.cone_slope, deg_to_rad(arm.tip.gamma_deg),
        std::clamp(d0_hat, 0.0, arm.tip.d_max_m), kd_hat, arm.tip.d_max_m);

    PlannerConfig pcfg = config.planner;
    pcfg.seed = mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(iter));

    EndEffectorState start;
    start.x_m = stroke.samples[0].x_m;
    start.y_m = stroke.samples[0].y_m;
    start.z_m = surface.height_clamped(start.x_m, start.y_m) - config.planner.nominal_depth_m;
    start.psi_rad = 0;

    const Plan plan =
        plan_stroke(stroke, start, model_tip, params, surface, config.constraints, pcfg);

    GroundTruth truth =
        make_truth(config, surface, mix_seed(config.seed, static_cast<std::uint64_t>(iter)));
    const ExecutionTrace trace = execute(plan, truth, true_tip, canvas);
    true_tip = trace.final_tip;  // wear persists; the sheet does not

    const std::string tag = "iter" + std::to_string(iter);
    IterationRecord rec;
    rec.iteration = iter;
    rec.arm = arm.name;
    rec.plan_csv = arm_dir / (tag + "_plan.csv");
    rec.canvas_pgm = arm_dir / (tag + "_canvas.pgm");
    rec.trace_csv = arm_dir / (tag + "_trace.csv");
    rec.profile_csv = arm_dir / (tag + "_profile.csv");
    write_plan_csv(plan, rec.plan_csv);
    write_canvas(canvas, rec.canvas_pgm);
    write_trace_csv(trace, rec.trace_csv);

    const Mask mask = threshold(canvas, config.threshold_level);
    const WidthProfile profile =
        width_profile(mask, stroke, canvas.geometry, config.scan_halfwidth_m);
    write_profile_csv(profile, stroke, rec.profile_csv);
    rec.v_m = error_metric(profile, stroke);

    // Refit the force line from the executed force/penetration trace when the
    // plan produced enough depth variation to identify a slope.
    if (config.refit_force) {
      CalibrationSet executed;
      double lo = 0, hi = 0;
      bool first = true;
      for (std::size_t t = 0; t < trace.states.size(); ++t) {
        const auto& s = trace.states[t];
        const double pen = s.z_m - surface.height_clamped(s.x_m, s.y_m);
        if (pen <= 0) {
          executed.rows.push_back({pen, trace.true_forces_n[t]});
          lo = first ? pen : std::min(lo, pen);
          hi = first ? pen : std::max(hi, pen);
          first = false;
        }
      }
      if (executed.count() >= 2 && hi - lo > 1e-6) {
        params = fit_force(executed);
      }
    }
    if (config.refit_kd) {
      std::vector<std::optional<double>> widths(profile.samples.size());
      for (std::size_t t = 0; t < profile.samples.size(); ++t) {
        if (profile.samples[t].valid) {
          widths[t] = profile.samples[t].w_a_m;
        }
      }
      kd_hat = fit_degradation(widths, trace.states, model_tip, params, surface,
                               config.kd_max_per_n, config.planner.width_convention);
    }
    d0_hat = roll_model_offset(std::clamp(d0_hat, 0.0, arm.tip.d_max_m), kd_hat, params, surface,
                               trace.states, arm.tip.d_max_m);

    rec.theta_n_per_m = params.theta_n_per_m;
    rec.theta0_n = params.theta0_n;
    rec.kd_per_n = kd_hat;
    records.push_back(std::move(rec));
  }
  write_iterations_csv(records, arm_dir / "iterations.csv");
  return records;
}

ComparisonSummary run_comparison(const ExperimentConfig& config) {
  if (config.arms.size() != 2) {
    throw ConfigError("compare needs exactly two arms");
  }
  std::filesystem::create_directories(config.output_dir);
  ComparisonSummary summary;
  summary.baseline = run_iterations(config, config.arms[0], config.output_dir / config.arms[0].name);
  summary.tilted = run_iterations(config, config.arms[1], config.output_dir / config.arms[1].name);

  std::vector<IterationRecord> all = summary.baseline;
  all.insert(all.end(), summary.tilted.begin(), summary.tilted.end());
  write_iterations_csv(all, config.output_dir / "iterations.csv");

  summary.improvement_pct.resize(summary.baseline.size());
  nlohmann::json per_arm;
  for (std::size_t i = 0; i < summary.baseline.size(); ++i) {
    const double v0 = summary.baseline[i].v_m;
    const double v1 = summary.tilted[i].v_m;
    summary.improvement_pct[i] = v0 > 0 ? 100.0 * (v0 - v1) / v0 : 0.0;
  }
  per_arm[config.arms[0].name] = json::array();
  per_arm[config.arms[1].name] = json::array();
  for (const auto& r : summary.baseline) {
    per_arm[config.arms[0].name].push_back(r.v_m);
  }
  for (const auto& r : summary.tilted) {
    per_arm[config.arms[1].name].push_back(r.v_m);
  }
  nlohmann::json out = {{"v_m", per_arm},
                        {"improvement_pct", summary.improvement_pct},
                        {"final_improvement_pct", summary.improvement_pct.empty()
                                                      ? 0.0
                                                      : summary.improvement_pct.back()}};
  std::ofstream f(config.output_dir / "summary.json");
  f << out.dump(2) << "\n";
  return summary;
}

std::filesystem::path run_plan(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const ReferenceStroke stroke = make_stroke(config);
  const WorldRect rect = canvas_rect(stroke, config.canvas_margin_m);
  const SurfaceMap surface = make_surface(config, rect);
  const ToolTipState tip = tip_from_config(config.tip, config.model0_kd_per_n);

  EndEffectorState start;
  start.x_m = stroke.samples[0].x_m;
  start.y_m = stroke.samples[0].y_m;
  start.z_m = surface.height_clamped(start.x_m, start.y_m) - config.planner.nominal_depth_m;
  start.psi_rad = 0;

  const Plan plan = plan_stroke(stroke, start, tip, config.model0, surface, config.constraints,
                                config.planner);
  const auto path = config.output_dir / "plan.csv";
  write_plan_csv(plan, path);
  return path;
}

std::filesystem::path run_execute(const ExperimentConfig& config,
                                  const std::filesystem::path& plan_csv) {
  std::filesystem::create_directories(config.output_dir);
  const ReferenceStroke stroke = make_stroke(config);
  const WorldRect rect = canvas_rect(stroke, config.canvas_margin_m);
  const SurfaceMap surface = make_surface(config, rect);

  EndEffectorState initial;
  const std::vector<InputSample> inputs = read_plan_inputs_csv(plan_csv, initial);
  const ToolTipState model_tip = tip_from_config(config.tip, config.model0_kd_per_n);
  const Plan plan = make_plan(inputs, initial, model_tip, config.model0, surface, stroke,
                              config.planner.q_weight, config.planner.width_convention);

  Canvas canvas = make_canvas(rect.x0, rect.y0, rect.x1, rect.y1, config.canvas_scale_m_per_px);
  GroundTruth truth = make_truth(config, surface, mix_seed(config.seed, 1));
  const ToolTipState true_tip = tip_from_config(config.tip, config.truth_kd_per_n);
  const ExecutionTrace trace = execute(plan, truth, true_tip, canvas);

  const auto canvas_path = config.output_dir / "canvas.pgm";
  write_canvas(canvas, canvas_path);
  write_trace_csv(trace, config.output_dir / "trace.csv");
  return canvas_path;
}

double run_measure(const ExperimentConfig& config, const std::filesystem::path& canvas_pgm) {
  std::filesystem::create_directories(config.output_dir);
  const ReferenceStroke stroke = make_stroke(config);
  const WorldRect rect = canvas_rect(stroke, config.canvas_margin_m);
  CanvasGeometry geometry{config.canvas_scale_m_per_px, rect.x0, rect.y0};
  const Canvas canvas = read_canvas(canvas_pgm, geometry);

  const Mask mask = threshold(canvas, config.threshold_level);
  const WidthProfile profile = width_profile(mask, stroke, geometry, config.scan_halfwidth_m);
  write_profile_csv(profile, stroke, config.output_dir / "profile.csv");
  const double v = error_metric(profile, stroke);
  nlohmann::json out = {{"error_metric_v_m", v}};
  std::ofstream f(config.output_dir / "measure.json");
  f << out.dump(2) << "\n";
  return v;
}

}  // namespace graphite
