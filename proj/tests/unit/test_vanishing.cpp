#include <gtest/gtest.h>

#include <cmath>

#include "calib/error.hpp"
#include "calib/vanishing.hpp"
#include "oracle.hpp"

namespace {

using calib::ErrorCode;
using calib::ImageLine;
using calib::PixelPoint;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const calib::CalibError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no CalibError thrown";
  return ErrorCode::ValidationFailure;
}

TEST(ImageLine, RejectsCoincidentEndpoints) {
  EXPECT_EQ(code_of([] { ImageLine({1, 1}, {1, 1 + 1e-9}); }), ErrorCode::ValidationFailure);
  EXPECT_EQ(code_of([] { ImageLine({1, 1}, {std::nan(""), 2}); }), ErrorCode::ValidationFailure);
  EXPECT_NO_THROW(ImageLine({1, 1}, {1, 1.001}));
}

TEST(ImageLine, CoefficientsAreNormalized) {
  const ImageLine l({0, 0}, {3, 4});
  const auto c = l.coefficients();
  EXPECT_NEAR(c[0] * c[0] + c[1] * c[1], 1.0, 1e-15);
  EXPECT_NEAR(c[0] * 6 + c[1] * 8 + c[2], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(l.length(), 5.0);
}

TEST(Vanishing, ConcurrentLinesMeetAtTheirCommonPoint) {
  const PixelPoint vp{812.5, -2400.25};
  std::vector<ImageLine> lines;
  for (double u : {100.0, 400.0, 900.0, 1200.0}) {
    lines.emplace_back(PixelPoint{u, 700}, PixelPoint{u + 0.3 * (vp.u - u), 700 + 0.3 * (vp.v - 700)});
  }
  const auto est = calib::estimate_vanishing_point(lines);
  ASSERT_TRUE(est.point.is_finite());
  EXPECT_NEAR(est.point.point().u, vp.u, 1e-6);
  EXPECT_NEAR(est.point.point().v, vp.v, 1e-6);
  EXPECT_LT(est.residual, 1e-9);
  EXPECT_GE(est.point.homogeneous()[2], 0.0);
  EXPECT_NEAR(est.point.homogeneous().cwiseAbs().maxCoeff(), 1.0, 1e-15);
}

TEST(Vanishing, ParallelImageLinesGiveAPointAtInfinity) {
  std::vector<ImageLine> lines{ImageLine({0, 0}, {10, 100}), ImageLine({50, 0}, {60, 100}),
                               ImageLine({300, 20}, {310, 120})};
  const auto est = calib::estimate_vanishing_point(lines);
  EXPECT_FALSE(est.point.is_finite());
  const auto d = est.point.direction();
  EXPECT_NEAR(std::abs(d[0] * 100 - d[1] * 10), 0.0, 1e-9);
  EXPECT_LT(est.residual, 1e-12);
}

TEST(Vanishing, DegenerateInputs) {
  EXPECT_EQ(code_of([] {
              std::vector<ImageLine> one{ImageLine({0, 0}, {1, 1})};
              calib::estimate_vanishing_point(one);
            }),
            ErrorCode::DegenerateLines);
  EXPECT_EQ(code_of([] {
              std::vector<ImageLine> same{ImageLine({0, 0}, {1, 1}), ImageLine({2, 2}, {5, 5})};
              calib::estimate_vanishing_point(same);
            }),
            ErrorCode::DegenerateLines);
}

TEST(Vanishing, RollFromOracleVerticals) {
  oracle::Rng rng(41);
  for (int k = 0; k < 100; ++k) {
    oracle::TrueCamera c = oracle::random_camera(rng, -1.3, -0.1);
    c.roll = rng.uniform(-1.2, 1.2);
    std::vector<ImageLine> lines;
    for (int i = 0; i < 4; ++i) {
      const double x = c.x0 + rng.uniform(-5, 5) + 8 * std::cos(c.yaw);
      const double y = c.y0 + rng.uniform(-5, 5) + 8 * std::sin(c.yaw);
      const auto a = oracle::project(c, {x, y, 0});
      const auto b = oracle::project(c, {x, y, 1});
      if (a && b) lines.emplace_back(*b, *a);
    }
    if (lines.size() < 2) continue;
    const auto est = calib::estimate_vanishing_point(lines);
    EXPECT_NEAR(calib::roll_from_vertical_vp(est.point, {640, 360}), c.roll, 1e-9);
  }
}

TEST(Vanishing, RollFoldsToHalfOpenInterval) {
  const PixelPoint c{640, 360};
  // A VP straight above the centre reads as roll 0, not pi.
  EXPECT_NEAR(calib::roll_from_vertical_vp(calib::VanishingPoint(Eigen::Vector3d(640, -1000, 1)), c), 0.0, 1e-12);
  // Horizontal direction at infinity: pi/2 is kept, -pi/2 folds to pi/2.
  EXPECT_NEAR(calib::roll_from_vertical_vp(calib::VanishingPoint(Eigen::Vector3d(1, 0, 0)), c), calib::kPi / 2, 1e-12);
  EXPECT_NEAR(calib::roll_from_vertical_vp(calib::VanishingPoint(Eigen::Vector3d(-1, 0, 0)), c), calib::kPi / 2, 1e-12);
}

TEST(Vanishing, AmbiguousRollNearCenter) {
  EXPECT_EQ(code_of([] { calib::roll_from_vertical_vp(calib::VanishingPoint(Eigen::Vector3d(640.5, 360, 1)), {640, 360}); }),
            ErrorCode::AmbiguousRoll);
}

TEST(Vanishing, VerticalLineThrough) {
  const calib::VanishingPoint vp(Eigen::Vector3d(1000, 5000, 1));
  const ImageLine l = calib::vertical_line_through({200, 300}, vp);
  const auto c = l.coefficients();
  EXPECT_NEAR(c[0] * 200 + c[1] * 300 + c[2], 0, 1e-9);
  EXPECT_NEAR(c[0] * 1000 + c[1] * 5000 + c[2], 0, 1e-6);
  EXPECT_EQ(code_of([&] { calib::vertical_line_through({1000, 5000}, vp); }), ErrorCode::CoincidentPoint);

  const calib::VanishingPoint inf(Eigen::Vector3d(0, 1, 0));
  const ImageLine li = calib::vertical_line_through({10, 20}, inf);
  EXPECT_NEAR(li.b().u - li.a().u, 0, 1e-12);
}

}  // namespace
