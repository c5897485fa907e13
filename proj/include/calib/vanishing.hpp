#pragma once

#include <Eigen/Core>
#include <span>

#include "calib/types.hpp"

namespace calib {

/// Operator-drawn image line segment. Endpoints must be more than 1e-6 px
/// apart.
class ImageLine {
 public:
  ImageLine(PixelPoint a, PixelPoint b);

  const PixelPoint& a() const { return a_; }
  const PixelPoint& b() const { return b_; }
  double length() const;

  /// Homogeneous coefficients (a, b, c) of a u + b v + c = 0, with
  /// a^2 + b^2 = 1.
  Eigen::Vector3d coefficients() const;

  friend bool operator==(const ImageLine&, const ImageLine&) = default;

 private:
  PixelPoint a_;
  PixelPoint b_;
};

/// Homogeneous image point scaled so its largest component has magnitude 1.
/// Points with |w| < 1e-8 are at infinity.
class VanishingPoint {
 public:
  explicit VanishingPoint(const Eigen::Vector3d& h);

  const Eigen::Vector3d& homogeneous() const { return h_; }
  bool is_finite() const;
  /// Only meaningful for finite points.
  PixelPoint point() const;
  /// Unit image direction (u, v) toward the point; for finite points this
  /// needs an origin, so it is only meaningful at infinity.
  Eigen::Vector2d direction() const;

 private:
  Eigen::Vector3d h_;
};

struct VanishingEstimate {
  VanishingPoint point;
  /// RMS perpendicular distance (px) from a finite point to the lines; for a
  /// point at infinity, RMS sine of the angle between each line and the
  /// common direction.
  double residual;
};

/// Algebraic least squares: the right singular vector of the smallest
/// singular value of the stacked, normalized line coefficients.
/// Throws DegenerateLines for fewer than two lines or when every line is the
/// same line.
VanishingEstimate estimate_vanishing_point(std::span<const ImageLine> lines);

/// Roll angle from the vanishing point of world-vertical lines. Verticals
/// can converge above or below the principal point depending on pitch; the
/// +-pi ambiguity is resolved toward the smaller magnitude, so the result
/// lies in (-pi/2, pi/2]. Throws AmbiguousRoll when a finite point lies
/// within 1 px of the center.
double roll_from_vertical_vp(const VanishingPoint& vp, const PixelPoint& center);

/// Image of the world vertical through p. Throws CoincidentPoint when p is
/// within 1e-6 px of a finite vanishing point.
ImageLine vertical_line_through(const PixelPoint& p, const VanishingPoint& vp);

}  // namespace calib
