#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/camera_model.hpp"
#include "calib/stage1.hpp"

namespace calib {

/// Operator move/scale/rotate of a projected EFOV polygon, in canonical
/// form: scale about the origin, rotate by theta about the origin, then
/// translate by (dx, dy). The origin is the floor point under the
/// stage-1 camera.
struct PlacementTransform {
  double dx = 0.0;
  double dy = 0.0;
  double scale = 1.0;
  double theta = 0.0;

  void validate() const;
  friend bool operator==(const PlacementTransform&, const PlacementTransform&) = default;
};

/// `then` applied after `first`.
PlacementTransform compose(const PlacementTransform& first, const PlacementTransform& then);

/// Canonical form of a scale/rotate gesture about an arbitrary pivot.
PlacementTransform about_pivot(double scale, double theta, double pivot_x, double pivot_y);

/// x0 = dx, y0 = dy, z0 = 3 * scale, yaw = theta; roll and pitch carried over.
CameraPose apply_placement(const PartialCalibration& partial, const PlacementTransform& t);

/// Inverse of apply_placement for a fixed partial calibration.
PlacementTransform placement_from_pose(const PartialCalibration& partial, const CameraPose& pose);

FloorPolygon transform_floor_polygon(const FloorPolygon& poly, const PlacementTransform& t);

/// Throws InconsistentPartial when pose roll/pitch differ from the partial.
CameraModel assemble_full_calibration(const PartialCalibration& partial, const CameraPose& pose);

struct PrismOverlay {
  std::vector<PixelPoint> base;
  std::vector<PixelPoint> top;
  /// visible[i] is false when base[i] or top[i] has no projection; the
  /// corresponding points are NaN.
  std::vector<bool> visible;
};

/// Projects the floor polygon and the same polygon lifted to `height`.
PrismOverlay backproject_prism(const FloorPolygon& efov3d, const CameraModel& model,
                               double height = 2.0);

enum class MarkerShape { Point, Cross, Square, VerticalSegment };

/// Synthetic object placed in world coordinates and drawn into every
/// calibrated camera.
struct VirtualMarker {
  std::string id;
  MarkerShape shape = MarkerShape::Point;
  /// Cross arm span or square side (m).
  double side = 0.0;
  WorldPoint position;
  /// Vertical extent for VerticalSegment markers (m).
  double height = 0.0;

  void validate() const;
  /// World points whose projections draw the marker.
  std::vector<WorldPoint> outline() const;

  friend bool operator==(const VirtualMarker&, const VirtualMarker&) = default;
};

/// Fraction of the image size added on each side when deciding whether a
/// marker is in view.
inline constexpr double kMarkerFrameMargin = 0.1;

/// One entry per model: projected outline, or nullopt when any outline
/// point is behind the camera or no outline point falls inside the frame
/// grown by kMarkerFrameMargin.
std::vector<std::optional<std::vector<PixelPoint>>> project_virtual_marker(
    const VirtualMarker& marker, std::span<const CameraModel> models);

}  // namespace calib
