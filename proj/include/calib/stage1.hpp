#pragma once

#include <string>
#include <vector>

#include "calib/camera_model.hpp"
#include "calib/distortion.hpp"
#include "calib/vanishing.hpp"

namespace calib {

enum class AnnotationOption { Option1, Option2 };

/// Operator-drawn primitives for one camera image.
///
/// Option 1: vertical lines, lines parallel on the floor and a pair of
/// lines perpendicular on the floor. Option 2: vertical lines and floor
/// segments of equal length. For verticals, parallels and the
/// perpendicular pair only the direction matters; equal segments use their
/// endpoints.
struct AnnotationSet {
  AnnotationOption option = AnnotationOption::Option1;
  std::vector<ImageLine> vertical_lines;
  std::vector<ImageLine> parallel_lines;
  std::vector<ImageLine> perpendicular_pair;
  std::vector<ImageLine> equal_segments;
  std::vector<PixelPoint> efov_polygon;
  std::vector<Polyline> distortion_polylines;

  /// Checks group counts, the coordinate window [-0.5, 1.5] x image size,
  /// minimum equal-segment length and EFOV simplicity. Throws
  /// DegenerateLines for fewer than two verticals, ValidationFailure
  /// otherwise.
  void validate(int width, int height) const;

  /// Same annotation with every point (polylines excluded) mapped through
  /// the undistortion model.
  AnnotationSet undistorted(const DistortionModel& d, const PixelPoint& center) const;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Stage-1 result: roll, pitch and focal with the pose defaulted to
/// (0, 0, 3 m) and yaw 0.
struct PartialCalibration {
  double roll = 0.0;
  double pitch = 0.0;
  double focal = 1.0;
  int width = 1;
  int height = 1;
  double residual = 0.0;
  std::string annotation_digest;

  CameraPose default_pose() const;
  CameraModel model() const;
  void validate() const;

  friend bool operator==(const PartialCalibration&, const PartialCalibration&) = default;
};

/// Polygon on the floor plane; every vertex has z = 0.
using FloorPolygon = std::vector<WorldPoint>;

/// Geometric-consistency criterion. Zero exactly when projected verticals
/// are vertical, parallels parallel and the pair perpendicular (option 1),
/// or when equal segments have equal floor length (option 2).
/// Throws ProjectionFailure when an annotated point has no floor
/// intersection in front of the camera.
double evaluate_criterion(const AnnotationSet& annotation, const CameraModel& params);

struct SolveOptions {
  /// Results whose criterion stays above this are reported as NonConvergence.
  double residual_tolerance = 1e-2;
};

/// Recovers roll from the vertical vanishing point and minimizes the
/// criterion over (pitch, focal) with a multi-start simplex search.
PartialCalibration solve_partial(const AnnotationSet& annotation, int width,
                                 int height, const SolveOptions& options = {});

/// Floor projection of the EFOV polygon under the partial model. Throws
/// HorizonViolation listing the vertices that do not reach the floor.
FloorPolygon project_efov(const AnnotationSet& annotation,
                          const PartialCalibration& partial);

/// Strict simplicity test for a closed polygon (no repeated vertices, no
/// crossing or touching non-adjacent edges).
bool is_simple_polygon(const std::vector<PixelPoint>& polygon);

}  // namespace calib
