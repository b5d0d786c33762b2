#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "graphite/errors.hpp"
#include "graphite/force_model.hpp"

using namespace graphite;

namespace {

SurfaceMap flat_surface(double height = 0.0) {
  return SurfaceMap::flat(height, -0.01, -0.01, 0.01, 0.01);
}

CalibrationSet linear_set(double theta, double theta0, const std::vector<double>& pens) {
  CalibrationSet set;
  for (double p : pens) {
    set.rows.push_back({p, theta * p + theta0});
  }
  return set;
}

}  // namespace

TEST_CASE("force map evaluation") {
  const ForceModelParams params{-800.0, 0.3};
  CHECK(force(params, -0.001, 0.0) == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(force(params, 0.0, 0.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(force({-800.0, -0.5}, 0.0, 0.0) == 0.0);        // floored
  CHECK(force({800.0, 0.0}, -0.001, 0.0) == 0.0);       // wrong-sign slope floors too
}

TEST_CASE("deeper penetration never reduces force for a negative slope") {
  const ForceModelParams params{-650.0, 0.2};
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> pen(-3e-3, 0.0);
  for (int i = 0; i < 200; ++i) {
    const double a = pen(rng);
    const double b = pen(rng);
    const double deeper = std::min(a, b);
    const double shallower = std::max(a, b);
    CHECK(force(params, deeper, 0.0) >= force(params, shallower, 0.0));
  }
}

TEST_CASE("sweep generator") {
  const auto surface = flat_surface();
  const auto truth = [](double pen) { return -800.0 * pen + 0.3; };

  SUBCASE("empty depth list") {
    CHECK_THROWS_AS(sweep_calibration(surface, truth, {}, 10, 0.0, 1), EmptyDepths);
  }
  SUBCASE("row count and penetration range") {
    const auto set = sweep_calibration(surface, truth, {0.5e-3, 1.0e-3, 1.5e-3}, 100, 0.0, 1);
    CHECK(set.count() == 300);
    for (const auto& row : set.rows) {
      CHECK(row[0] <= 0.0);
      CHECK(row[0] >= -1.5e-3);
    }
  }
  SUBCASE("noiseless rows lie exactly on the line") {
    const auto set = sweep_calibration(surface, truth, {1e-3}, 50, 0.0, 1);
    for (const auto& row : set.rows) {
      CHECK(row[1] == doctest::Approx(-800.0 * row[0] + 0.3).epsilon(1e-12));
    }
  }
  SUBCASE("same seed reproduces the same set") {
    const auto a = sweep_calibration(surface, truth, {1e-3, 2e-3}, 40, 0.05, 99);
    const auto b = sweep_calibration(surface, truth, {1e-3, 2e-3}, 40, 0.05, 99);
    REQUIRE(a.count() == b.count());
    for (std::size_t i = 0; i < a.count(); ++i) {
      CHECK(a.rows[i][0] == b.rows[i][0]);
      CHECK(a.rows[i][1] == b.rows[i][1]);
    }
  }
}

TEST_CASE("least squares recovers exact linear data") {
  const auto set = linear_set(-800.0, 0.3, {-1e-3, -2e-3, -3e-3});
  const auto fit = fit_force(set);
  CHECK(std::abs(fit.theta_n_per_m - (-800.0)) / 800.0 < 1e-9);
  CHECK(std::abs(fit.theta0_n - 0.3) / 0.3 < 1e-9);
}

TEST_CASE("identical penetrations are rank deficient") {
  CHECK_THROWS_AS(fit_force(linear_set(-800.0, 0.3, {-1e-3, -1e-3, -1e-3})), RankDeficient);
  CHECK_THROWS_AS(fit_force(linear_set(-800.0, 0.3, {-1e-3})), RankDeficient);
}

TEST_CASE("noisy fit lands within three standard errors") {
  const double theta = -900.0, theta0 = 0.4, sd = 0.05;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, sd);
  std::uniform_real_distribution<double> pen(-2e-3, 0.0);
  CalibrationSet set;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double p = pen(rng);
    set.rows.push_back({p, theta * p + theta0 + gauss(rng)});
  }
  const auto fit = fit_force(set);

  // Classic OLS standard errors from the residual variance.
  double sum_p = 0, sum_pp = 0;
  for (const auto& row : set.rows) {
    sum_p += row[0];
    sum_pp += row[0] * row[0];
  }
  const double mean_p = sum_p / n;
  const double sxx = sum_pp - n * mean_p * mean_p;
  double rss = 0;
  for (const auto& row : set.rows) {
    const double r = row[1] - (fit.theta_n_per_m * row[0] + fit.theta0_n);
    rss += r * r;
  }
  const double sigma2 = rss / (n - 2);
  const double se_theta = std::sqrt(sigma2 / sxx);
  const double se_theta0 = std::sqrt(sigma2 * (1.0 / n + mean_p * mean_p / sxx));
  CHECK(std::abs(fit.theta_n_per_m - theta) < 3 * se_theta);
  CHECK(std::abs(fit.theta0_n - theta0) < 3 * se_theta0);
}

TEST_CASE("residuals are orthogonal to the regressors") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 0.1);
  std::uniform_real_distribution<double> pen(-2e-3, 0.0);
  CalibrationSet set;
  for (int i = 0; i < 500; ++i) {
    const double p = pen(rng);
    set.rows.push_back({p, -700.0 * p + 0.25 + gauss(rng)});
  }
  const auto fit = fit_force(set);
  double dot_pen = 0, dot_one = 0, norm_f = 0;
  for (const auto& row : set.rows) {
    const double r = row[1] - (fit.theta_n_per_m * row[0] + fit.theta0_n);
    dot_pen += r * row[0];
    dot_one += r;
    norm_f += row[1] * row[1];
  }
  norm_f = std::sqrt(norm_f);
  CHECK(std::abs(dot_pen) < 1e-8 * norm_f);
  CHECK(std::abs(dot_one) < 1e-8 * norm_f);
}

TEST_CASE("surface heights") {
  SUBCASE("flat surface returns the constant everywhere") {
    const auto surface = flat_surface(2.5e-4);
    CHECK(surface.height_at(0.0, 0.0) == 2.5e-4);
    CHECK(surface.height_at(-0.01, -0.01) == 2.5e-4);
    CHECK(surface.height_at(0.009, 0.004) == 2.5e-4);
  }
  SUBCASE("grid nodes are exact and edges interpolate linearly") {
    // 2x2 cell, heights 0 on the lower edge and 1 mm on the upper edge.
    const SurfaceMap surface(0.0, 0.0, 1e-3, 2, 2, {0.0, 0.0, 1e-3, 1e-3});
    CHECK(surface.height_at(0.0, 0.0) == 0.0);
    CHECK(surface.height_at(1e-3, 1e-3) == 1e-3);
    CHECK(surface.height_at(0.5e-3, 0.5e-3) == doctest::Approx(0.5e-3).epsilon(1e-12));
    CHECK(surface.height_at(0.25e-3, 0.0) == 0.0);
    CHECK(surface.height_at(0.0, 0.25e-3) == doctest::Approx(0.25e-3).epsilon(1e-12));
  }
  SUBCASE("outside the grid") {
    const auto surface = flat_surface();
    CHECK_THROWS_AS(surface.height_at(0.02, 0.0), OutOfBounds);
    CHECK(surface.height_clamped(0.02, 0.0) == 0.0);
  }
}

TEST_CASE("wear gain recovery from forward-model widths") {
  const auto surface = flat_surface();
  const ForceModelParams params{-800.0, 0.3};
  const double dt = 0.008;
  const double speed = 6.25e-3;  // 50 um per step
  const int n = 120;

  // Straight push at constant depth; widths generated by the same chain the
  // fit rolls internally, so the true gain is the unique minimizer.
  const auto make_data = [&](double kd_true, double depth,
                             std::vector<EndEffectorState>& traj,
                             std::vector<std::optional<double>>& widths) {
    auto tip = make_tool_tip(5.45, 0.6, 1e-4, kd_true, 1e-2);
    traj.clear();
    widths.clear();
    for (int t = 0; t <= n; ++t) {
      EndEffectorState s;
      s.x_m = speed * dt * t;
      s.y_m = 0;
      s.z_m = -depth;
      s.psi_rad = 0;
      traj.push_back(s);
    }
    for (int t = 0; t <= n; ++t) {
      widths.push_back(deposition_width(axes(tip), 0.0));
      if (t < n) {
        const double f = force(params, traj[t].z_m, 0.0);
        tip = degrade(tip, f, speed * dt);
      }
    }
  };

  std::vector<EndEffectorState> traj;
  std::vector<std::optional<double>> widths;

  SUBCASE("positive gain") {
    make_data(0.02, 1e-3, traj, widths);
    const auto tip_template = make_tool_tip(5.45, 0.6, 1e-4, 0.0, 1e-2);
    const double kd = fit_degradation(widths, traj, tip_template, params, surface, 0.2);
    CHECK(std::abs(kd - 0.02) / 0.02 < 1e-4);
  }
  SUBCASE("zero gain yields constant widths") {
    make_data(0.0, 1e-3, traj, widths);
    const auto tip_template = make_tool_tip(5.45, 0.6, 1e-4, 0.0, 1e-2);
    const double kd = fit_degradation(widths, traj, tip_template, params, surface, 0.2);
    CHECK(kd <= 1e-8);
  }
  SUBCASE("no contact") {
    make_data(0.02, -1e-3, traj, widths);  // negative depth: above the surface
    const auto tip_template = make_tool_tip(5.45, 0.6, 1e-4, 0.0, 1e-2);
    CHECK_THROWS_AS(fit_degradation(widths, traj, tip_template, params, surface, 0.2),
                    NoContact);
  }
}

TEST_CASE("calibration csv round-trips") {
  const auto set = linear_set(-640.0, 0.31, {-1e-3, -1.5e-3, -2.22e-3});
  const auto path = std::filesystem::temp_directory_path() / "graphite_calib_test.csv";
  write_calibration_csv(set, path);
  const auto back = read_calibration_csv(path);
  REQUIRE(back.count() == set.count());
  for (std::size_t i = 0; i < set.count(); ++i) {
    CHECK(back.rows[i][0] == set.rows[i][0]);
    CHECK(back.rows[i][1] == set.rows[i][1]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("surface csv round-trips") {
  const SurfaceMap surface(-1e-3, -2e-3, 0.5e-3, 3, 4,
                           {0, 1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4, 8e-4, 9e-4, 1e-3, 1.1e-3});
  const auto path = std::filesystem::temp_directory_path() / "graphite_surface_test.csv";
  write_surface_csv(surface, path);
  const auto back = read_surface_csv(path);
  CHECK(back.nx() == surface.nx());
  CHECK(back.ny() == surface.ny());
  CHECK(back.spacing_m() == surface.spacing_m());
  CHECK(back.heights() == surface.heights());
  std::filesystem::remove(path);
}
