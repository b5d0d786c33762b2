#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "graphite/errors.hpp"
#include "graphite/tool_geometry.hpp"

using namespace graphite;

namespace {
constexpr double kPi = std::numbers::pi;
double deg(double d) { return d * kPi / 180.0; }

// Independent high-precision evaluations of the axis formulas at the tilted
// reference configuration (m = 5.45, gamma = 50 deg, d = 0.1 mm).
constexpr double kMajorRef = 5.995776742236067e-05;
constexpr double kMinorRef = 3.760739240406624e-05;
constexpr double kCircularRef = 3.6697247706422016e-05;  // 2 d / m
}  // namespace

TEST_CASE("perpendicular mounting gives a circular patch, bit-exactly") {
  const auto tip = make_tool_tip(5.45, 0.0, 1e-4, 0.0, 1e-2);
  const auto ax = axes(tip);
  CHECK(ax.major_m == ax.minor_m);
  CHECK(ax.major_m == doctest::Approx(kCircularRef).epsilon(1e-12));
}

TEST_CASE("tilted reference configuration") {
  const auto tip = make_tool_tip(5.45, deg(50), 1e-4, 0.0, 1e-2);
  const auto ax = axes(tip);
  CHECK(std::abs(ax.major_m - kMajorRef) / kMajorRef < 1e-12);
  CHECK(std::abs(ax.minor_m - kMinorRef) / kMinorRef < 1e-12);
}

TEST_CASE("zero offset has no contact patch") {
  const auto tip = make_tool_tip(5.45, deg(50), 0.0, 0.0, 1e-2);
  CHECK_THROWS_AS(axes(tip), DegenerateTip);
}

TEST_CASE("tip parameter validation") {
  CHECK_THROWS_AS(make_tool_tip(1.0, deg(50), 1e-4, 0.0, 1e-2), ConfigError);  // tan(50) > 1
  CHECK_THROWS_AS(make_tool_tip(-1.0, 0.0, 1e-4, 0.0, 1e-2), ConfigError);
  CHECK_THROWS_AS(make_tool_tip(5.45, 0.0, -1e-4, 0.0, 1e-2), ConfigError);
  CHECK_THROWS_AS(make_tool_tip(5.45, 0.0, 2e-2, 0.0, 1e-2), ConfigError);
  CHECK_THROWS_AS(make_tool_tip(5.45, 0.0, 1e-4, -0.1, 1e-2), ConfigError);
}

TEST_CASE("wear step") {
  auto tip = make_tool_tip(5.45, 0.0, 1.0e-4, 0.02, 1e-2);

  SUBCASE("no force or no motion leaves the tip unchanged") {
    CHECK(degrade(tip, 0.0, 1e-3).offset_m == tip.offset_m);
    CHECK(degrade(tip, 2.0, 0.0).offset_m == tip.offset_m);
  }
  SUBCASE("hand-computed increment") {
    const auto worn = degrade(tip, 1.5, 2e-4);
    CHECK(worn.offset_m == doctest::Approx(1.06e-4).epsilon(1e-12));
  }
  SUBCASE("saturates at the offset bound") {
    tip.offset_m = 9.9999e-3;
    const auto worn = degrade(tip, 100.0, 1.0);
    CHECK(worn.offset_m == tip.offset_max_m);
  }
  SUBCASE("monotone and additive under constant force") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> len(0, 5e-4);
    std::uniform_real_distribution<double> force(0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const double f = force(rng);
      const double l1 = len(rng), l2 = len(rng);
      const auto once = degrade(tip, f, l1 + l2);
      const auto twice = degrade(degrade(tip, f, l1), f, l2);
      CHECK(once.offset_m >= tip.offset_m);
      CHECK(twice.offset_m == doctest::Approx(once.offset_m).epsilon(1e-12));
    }
  }
}

TEST_CASE("deposition width projections") {
  const auto tip = make_tool_tip(5.45, deg(50), 1e-4, 0.0, 1e-2);
  const auto ax = axes(tip);
  CHECK(deposition_width(ax, 0.0) == ax.major_m);
  CHECK(deposition_width(ax, kPi / 2) == doctest::Approx(ax.minor_m).epsilon(1e-12));
  CHECK(deposition_width(ax, deg(45)) == doctest::Approx(4.239654392915709e-05).epsilon(1e-12));

  SUBCASE("swapped convention exchanges the projections") {
    CHECK(deposition_width(ax, 0.0, WidthConvention::major_on_sin) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(deposition_width(ax, kPi / 2, WidthConvention::major_on_sin) == ax.major_m);
  }
  SUBCASE("periodic in pi and even") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
    for (int i = 0; i < 200; ++i) {
      const double psi = angle(rng);
      CHECK(deposition_width(ax, psi) ==
            doctest::Approx(deposition_width(ax, psi + kPi)).epsilon(1e-9));
      CHECK(deposition_width(ax, psi) ==
            doctest::Approx(deposition_width(ax, -psi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("smoothed width stays within the log-sum-exp envelope") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> axis(1e-5, 2e-3);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> temp(1e-7, 1e-4);
  const double log2 = std::log(2.0);
  for (int i = 0; i < 300; ++i) {
    const double a1 = axis(rng);
    const double a2 = axis(rng);
    EllipseAxes ax{std::max(a1, a2), std::min(a1, a2)};
    const double psi = angle(rng);
    const double kappa = temp(rng);
    const double exact = deposition_width(ax, psi);
    const double smooth = smooth_deposition_width(ax, psi, kappa);
    CHECK(smooth >= exact);
    CHECK(smooth <= exact + kappa * log2 + 1e-15);
  }

  SUBCASE("equal projections hit the upper bound exactly") {
    const EllipseAxes ax{1e-4, 1e-4};
    const double kappa = 1e-6;
    const double smooth = smooth_deposition_width(ax, kPi / 4, kappa);
    const double exact = deposition_width(ax, kPi / 4);
    CHECK(smooth == doctest::Approx(exact + kappa * log2).epsilon(1e-12));
  }
  SUBCASE("tight at a right-angle heading") {
    const EllipseAxes ax{1e-4, 5e-5};
    const double smooth = smooth_deposition_width(ax, 0.0, 1e-6);
    CHECK(smooth >= 1e-4);
    CHECK(smooth <= 1e-4 + 6.94e-7);
  }
}

TEST_CASE("axes scale linearly with the offset") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> slope(0.5, 8.0);
  std::uniform_real_distribution<double> frac(-0.9, 0.9);
  std::uniform_real_distribution<double> offs(1e-6, 5e-3);
  for (int i = 0; i < 200; ++i) {
    const double m = slope(rng);
    const double gamma = std::atan(frac(rng) * m);
    const double d1 = offs(rng);
    const double d2 = offs(rng);
    auto tip = make_tool_tip(m, gamma, d1, 0.0, 1e-2);
    const auto ax1 = axes(tip);
    tip.offset_m = d2;
    const auto ax2 = axes(tip);
    CHECK(ax1.major_m / ax1.minor_m == doctest::Approx(ax2.major_m / ax2.minor_m).epsilon(1e-12));
    CHECK(ax2.major_m / ax1.major_m == doctest::Approx(d2 / d1).epsilon(1e-12));
    CHECK(ax1.major_m >= ax1.minor_m);
    if (gamma != 0) {
      CHECK(ax1.major_m > ax1.minor_m);
    }
  }
}

TEST_CASE("boundary points reconstructed from the axes satisfy the implicit form") {
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> slope(1.0, 8.0);
  std::uniform_real_distribution<double> frac(-0.85, 0.85);
  std::uniform_real_distribution<double> offs(1e-5, 3e-3);
  std::uniform_real_distribution<double> angle(0, 2 * kPi);
  for (int i = 0; i < 200; ++i) {
    const double m = slope(rng);
    const auto tip = make_tool_tip(m, std::atan(frac(rng) * m), offs(rng), 0.0, 1e-2);
    const auto ax = axes(tip);
    const double off = footprint_center_offset(tip);
    const double theta = angle(rng);
    const double u = off + 0.5 * ax.major_m * std::cos(theta);
    const double w = 0.5 * ax.minor_m * std::sin(theta);
    CHECK(std::abs(footprint_implicit(tip, u, w)) < 1e-9);
    // Strictly interior / exterior points classify correctly.
    CHECK(footprint_implicit(tip, off + 0.49 * ax.major_m * std::cos(theta),
                             0.49 * ax.minor_m * std::sin(theta)) < 0);
    CHECK(footprint_implicit(tip, off + 0.51 * ax.major_m * std::cos(theta),
                             0.51 * ax.minor_m * std::sin(theta)) > 0);
  }
}
