#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "graphite/errors.hpp"
#include "graphite/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

graphite::ExperimentConfig load(const std::string& config_path, const std::string& out_dir) {
  graphite::ExperimentConfig cfg = graphite::load_config(config_path);
  if (!out_dir.empty()) {
    cfg.output_dir = out_dir;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deposition planning and simulation with a wearing tool tip"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string plan_path;
  std::string canvas_path;
  app.add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  app.add_option("-o,--out", out_dir, "override the configured output directory");

  auto* calibrate = app.add_subcommand("calibrate", "run the offline force sweep and fit");
  auto* plan = app.add_subcommand("plan", "solve the stroke tracking problem");
  auto* execute = app.add_subcommand("execute", "run a stored plan on the simulated canvas");
  execute->add_option("--plan", plan_path, "plan CSV (defaults to <out>/plan.csv)");
  auto* measure = app.add_subcommand("measure", "measure stroke widths from a canvas");
  measure->add_option("--canvas", canvas_path, "canvas PGM (defaults to <out>/canvas.pgm)");
  auto* iterate = app.add_subcommand("iterate", "plan/execute/measure/refit loop for one arm");
  auto* compare = app.add_subcommand("compare", "run both arms and report per-iteration error");

  CLI11_PARSE(app, argc, argv);

  try {
    const graphite::ExperimentConfig cfg = load(config_path, out_dir);
    if (calibrate->parsed()) {
      const auto fit = graphite::run_calibration(cfg);
      std::printf("fitted theta=%.6g N/m theta0=%.6g N\n", fit.theta_n_per_m, fit.theta0_n);
    } else if (plan->parsed()) {
      const auto path = graphite::run_plan(cfg);
      std::printf("plan written to %s\n", path.string().c_str());
    } else if (execute->parsed()) {
      const std::filesystem::path plan_csv =
          plan_path.empty() ? cfg.output_dir / "plan.csv" : std::filesystem::path(plan_path);
      const auto path = graphite::run_execute(cfg, plan_csv);
      std::printf("canvas written to %s\n", path.string().c_str());
    } else if (measure->parsed()) {
      const std::filesystem::path pgm =
          canvas_path.empty() ? cfg.output_dir / "canvas.pgm" : std::filesystem::path(canvas_path);
      const double v = graphite::run_measure(cfg, pgm);
      std::printf("error metric V = %.6g m\n", v);
    } else if (iterate->parsed()) {
      const auto records = graphite::run_iterations(cfg, {"arm", cfg.tip}, cfg.output_dir);
      for (const auto& r : records) {
        std::printf("iteration %d: V = %.6g m (theta=%.5g, theta0=%.4g, kd=%.5g)\n", r.iteration,
                    r.v_m, r.theta_n_per_m, r.theta0_n, r.kd_per_n);
      }
    } else if (compare->parsed()) {
      const auto summary = graphite::run_comparison(cfg);
      for (std::size_t i = 0; i < summary.baseline.size(); ++i) {
        std::printf("iteration %zu: V[%s]=%.6g m V[%s]=%.6g m improvement=%.1f%%\n", i + 1,
                    summary.baseline[i].arm.c_str(), summary.baseline[i].v_m,
                    summary.tilted[i].arm.c_str(), summary.tilted[i].v_m,
                    summary.improvement_pct[i]);
      }
    }
  } catch (const graphite::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const graphite::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
