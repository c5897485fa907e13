#include "calib/stage2.hpp"

#include <cmath>
#include <limits>

#include "calib/error.hpp"
#include "calib/kernels.hpp"

namespace calib {

namespace {
constexpr double kAngleMatchTol = 1e-12;
}

void PlacementTransform::validate() const {
  if (!std::isfinite(dx) || !std::isfinite(dy) || !std::isfinite(scale) || !std::isfinite(theta)) {
    throw CalibError(ErrorCode::ValidationFailure, "placement has non-finite values");
  }
  if (!(scale > 0.0)) {
    throw CalibError(ErrorCode::ValidationFailure, "placement scale must be positive", {}, "scale");
  }
}

PlacementTransform compose(const PlacementTransform& first, const PlacementTransform& then) {
  const double c = std::cos(then.theta), s = std::sin(then.theta);
  PlacementTransform out;
  out.scale = first.scale * then.scale;
  out.theta = normalize_angle(first.theta + then.theta);
  out.dx = then.dx + then.scale * (c * first.dx - s * first.dy);
  out.dy = then.dy + then.scale * (s * first.dx + c * first.dy);
  return out;
}

PlacementTransform about_pivot(double scale, double theta, double pivot_x, double pivot_y) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {pivot_x - scale * (c * pivot_x - s * pivot_y),
          pivot_y - scale * (s * pivot_x + c * pivot_y), scale, theta};
}

CameraPose apply_placement(const PartialCalibration& partial, const PlacementTransform& t) {
  t.validate();
  CameraPose pose;
  pose.x0 = t.dx;
  pose.y0 = t.dy;
  pose.z0 = kDefaultMountHeight * t.scale;
  pose.yaw = normalize_angle(t.theta);
  pose.pitch = partial.pitch;
  pose.roll = partial.roll;
  return pose;
}

PlacementTransform placement_from_pose(const PartialCalibration& partial, const CameraPose& pose) {
  (void)partial;
  return {pose.x0, pose.y0, pose.z0 / kDefaultMountHeight, pose.yaw};
}

FloorPolygon transform_floor_polygon(const FloorPolygon& poly, const PlacementTransform& t) {
  const double c = std::cos(t.theta), s = std::sin(t.theta);
  FloorPolygon out;
  out.reserve(poly.size());
  for (const WorldPoint& p : poly) {
    const double x = t.scale * p.x, y = t.scale * p.y;
    out.push_back({c * x - s * y + t.dx, s * x + c * y + t.dy, p.z});
  }
  return out;
}

CameraModel assemble_full_calibration(const PartialCalibration& partial, const CameraPose& pose) {
  if (std::abs(pose.roll - partial.roll) > kAngleMatchTol ||
      std::abs(pose.pitch - partial.pitch) > kAngleMatchTol) {
    throw CalibError(ErrorCode::InconsistentPartial,
                     "pose roll/pitch disagree with the stage-1 calibration");
  }
  CameraModel m;
  m.pose = pose;
  m.pose.roll = partial.roll;
  m.pose.pitch = partial.pitch;
  m.intrinsics = CameraIntrinsics{partial.focal, partial.width, partial.height};
  m.validate();
  return m;
}

PrismOverlay backproject_prism(const FloorPolygon& efov3d, const CameraModel& model, double height) {
  const std::size_t n = efov3d.size();
  std::vector<double> x(2 * n), y(2 * n), z(2 * n), u(2 * n), v(2 * n);
  std::vector<std::uint8_t> ok(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = x[n + i] = efov3d[i].x;
    y[i] = y[n + i] = efov3d[i].y;
    z[i] = efov3d[i].z;
    z[n + i] = efov3d[i].z + height;
  }
  kernels::project(projection_params(model), x, y, z, u, v, ok);
  PrismOverlay out;
  out.base.resize(n);
  out.top.resize(n);
  out.visible.resize(n);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    const bool vis = ok[i] && ok[n + i];
    out.visible[i] = vis;
    out.base[i] = vis ? PixelPoint{u[i], v[i]} : PixelPoint{nan, nan};
    out.top[i] = vis ? PixelPoint{u[n + i], v[n + i]} : PixelPoint{nan, nan};
  }
  return out;
}

void VirtualMarker::validate() const {
  if (!std::isfinite(side) || side < 0.0 || !std::isfinite(height) || height < 0.0) {
    throw CalibError(ErrorCode::ValidationFailure,
                     "marker " + id + ": side and height must be non-negative");
  }
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(position.z)) {
    throw CalibError(ErrorCode::ValidationFailure, "marker " + id + ": position must be finite");
  }
}

std::vector<WorldPoint> VirtualMarker::outline() const {
  const WorldPoint& p = position;
  const double h = 0.5 * side;
  switch (shape) {
    case MarkerShape::Point:
      return {p};
    case MarkerShape::Cross:
      return {{p.x - h, p.y, p.z}, {p.x + h, p.y, p.z}, {p.x, p.y - h, p.z}, {p.x, p.y + h, p.z}};
    case MarkerShape::Square:
      return {{p.x - h, p.y - h, p.z}, {p.x + h, p.y - h, p.z},
              {p.x + h, p.y + h, p.z}, {p.x - h, p.y + h, p.z}};
    case MarkerShape::VerticalSegment:
      return {p, {p.x, p.y, p.z + height}};
  }
  return {p};
}

std::vector<std::optional<std::vector<PixelPoint>>> project_virtual_marker(
    const VirtualMarker& marker, std::span<const CameraModel> models) {
  const std::vector<WorldPoint> pts = marker.outline();
  const std::size_t n = pts.size();
  std::vector<double> x(n), y(n), z(n), u(n), v(n);
  std::vector<std::uint8_t> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pts[i].x;
    y[i] = pts[i].y;
    z[i] = pts[i].z;
  }

  std::vector<std::optional<std::vector<PixelPoint>>> out;
  out.reserve(models.size());
  for (const CameraModel& m : models) {
    kernels::project(projection_params(m), x, y, z, u, v, ok);
    const double mu = kMarkerFrameMargin * m.intrinsics.width;
    const double mv = kMarkerFrameMargin * m.intrinsics.height;
    bool all_front = true, any_inside = false;
    std::vector<PixelPoint> proj(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!ok[i]) {
        all_front = false;
        break;
      }
      proj[i] = {u[i], v[i]};
      if (u[i] >= -mu && u[i] <= m.intrinsics.width + mu && v[i] >= -mv &&
          v[i] <= m.intrinsics.height + mv) {
        any_inside = true;
      }
    }
    if (all_front && any_inside) out.emplace_back(std::move(proj));
    else out.emplace_back(std::nullopt);
  }
  return out;
}

}  // namespace calib
