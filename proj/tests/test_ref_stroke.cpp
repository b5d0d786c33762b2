#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "graphite/errors.hpp"
#include "graphite/ref_stroke.hpp"

using namespace graphite;

TEST_CASE("polyline stroke is a verbatim pass-through") {
  const auto stroke =
      build_polyline_stroke({{0, 0}, {0.001, 0}}, {1e-3, 1e-3}, 0.008);
  CHECK(stroke.horizon() == 1);
  CHECK(stroke.samples.size() == 2);
  CHECK(stroke.samples[0].w_m == 1e-3);
  CHECK(stroke.samples[1].w_m == 1e-3);
  CHECK(stroke.samples[1].x_m == 0.001);
  CHECK(stroke.dt_s == 0.008);
}

TEST_CASE("l-stroke carries the per-leg widths") {
  const auto stroke = build_l_stroke(6e-3, 5e-3, 1.0e-3, 0.7e-3, 5e-5, 0.008);
  const int n1 = 120;
  CHECK(stroke.horizon() == 120 + 100);
  for (int t = 0; t <= n1; ++t) {
    CHECK(stroke.samples[t].w_m == 1.0e-3);
    CHECK(stroke.samples[t].y_m == 0.0);
  }
  for (int t = n1 + 1; t <= stroke.horizon(); ++t) {
    CHECK(stroke.samples[t].w_m == 0.7e-3);
    CHECK(stroke.samples[t].x_m == 6e-3);
  }
  CHECK(stroke.samples.back().y_m == doctest::Approx(-5e-3));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_polyline_stroke({{0, 0}, {1, 0}}, {1e-3}, 0.008), LengthMismatch);
  CHECK_THROWS_AS(build_polyline_stroke({{0, 0}, {1, 0}}, {1e-3, 0.0}, 0.008),
                  NonPositiveWidth);
  CHECK_THROWS_AS(build_polyline_stroke({{0, 0}, {1, 0}}, {1e-3, -1e-3}, 0.008),
                  NonPositiveWidth);
  CHECK_THROWS_AS(build_polyline_stroke({{0, 0}}, {1e-3}, 0.008), LengthMismatch);
}

TEST_CASE("frames on an axis-aligned stroke") {
  const auto stroke = build_line_stroke(0, 0, 1e-2, 0, 1e-3, 10, 0.008);
  for (int t = 0; t <= stroke.horizon(); ++t) {
    const auto f = frame_at(stroke, t);
    CHECK(f.tx == doctest::Approx(1.0));
    CHECK(f.ty == doctest::Approx(0.0));
    CHECK(f.nx == doctest::Approx(0.0));
    CHECK(f.ny == doctest::Approx(1.0));
  }
}

TEST_CASE("frame on a diagonal stroke") {
  const auto stroke = build_line_stroke(0, 0, 1e-2, 1e-2, 1e-3, 5, 0.008);
  const auto f = frame_at(stroke, 2);
  CHECK(f.tx == doctest::Approx(0.70711).epsilon(1e-4));
  CHECK(f.ty == doctest::Approx(0.70711).epsilon(1e-4));
}

TEST_CASE("coincident samples have no tangent") {
  const auto stroke =
      build_polyline_stroke({{0, 0}, {0, 0}, {1e-3, 0}}, {1e-3, 1e-3, 1e-3}, 0.008);
  CHECK_THROWS_AS(frame_at(stroke, 0), DegenerateTangent);
}

TEST_CASE("tangents are unit length on random polylines") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-5e-3, 5e-3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::array<double, 2>> pts;
    std::vector<double> widths;
    double x = 0, y = 0;
    for (int i = 0; i < 12; ++i) {
      pts.push_back({x, y});
      widths.push_back(1e-3);
      x += coord(rng) + 6e-3;  // strictly advancing, no coincident points
      y += coord(rng);
    }
    const auto stroke = build_polyline_stroke(pts, widths, 0.008);
    for (int t = 0; t <= stroke.horizon(); ++t) {
      const auto f = frame_at(stroke, t);
      CHECK(std::abs(std::hypot(f.tx, f.ty) - 1.0) < 1e-12);
      CHECK(std::abs(f.tx * f.nx + f.ty * f.ny) < 1e-12);
    }
  }
}

TEST_CASE("stroke csv round-trips exactly") {
  const auto stroke = build_l_stroke(2e-3, 1.5e-3, 1.0e-3, 0.7e-3, 1e-4, 0.008);
  const auto path = std::filesystem::temp_directory_path() / "graphite_stroke_test.csv";
  write_stroke_csv(stroke, path);
  const auto back = read_stroke_csv(path, stroke.dt_s);
  REQUIRE(back.samples.size() == stroke.samples.size());
  for (std::size_t i = 0; i < stroke.samples.size(); ++i) {
    CHECK(back.samples[i].x_m == stroke.samples[i].x_m);
    CHECK(back.samples[i].y_m == stroke.samples[i].y_m);
    CHECK(back.samples[i].w_m == stroke.samples[i].w_m);
  }
  std::filesystem::remove(path);
}
