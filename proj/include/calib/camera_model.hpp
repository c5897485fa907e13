#pragma once

#include <Eigen/Core>
#include <optional>

#include "calib/kernels.hpp"
#include "calib/types.hpp"

// Pinhole camera model with seven parameters: position (x0, y0, z0), the
// rotation sequence yaw -> pitch -> roll, and focal length.
//
// Conventions:
//   * World frame is right-handed with z up and the floor at z = 0.
//   * Camera frame has x right, y down, z forward along the optical axis.
//   * At yaw = pitch = roll = 0 the camera looks along world +x with image
//     down pointing to world -z.
//   * Positive yaw turns the gaze counter-clockwise seen from above
//     (yaw = pi/2 looks along +y). Negative pitch looks down. Positive roll
//     turns the image of world-down from the v axis toward the u axis.
//   * Principal point at the image center, square pixels, no skew.

namespace calib {

/// Mount height used by stage 1 before the true height is known (m).
inline constexpr double kDefaultMountHeight = 3.0;

struct CameraPose {
  double x0 = 0.0;
  double y0 = 0.0;
  double z0 = kDefaultMountHeight;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  void validate() const;
  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

struct CameraIntrinsics {
  double focal = 1.0;
  int width = 1;
  int height = 1;

  PixelPoint principal_point() const { return {0.5 * width, 0.5 * height}; }
  void validate() const;
  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct CameraModel {
  CameraPose pose;
  CameraIntrinsics intrinsics;

  void validate() const;
  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

using RotationMatrix = Eigen::Matrix3d;

/// Rotation taking world coordinates to the camera body frame (x forward,
/// y left, z up): R_roll * R_pitch * R_yaw, yaw applied first about world z,
/// then pitch about the body lateral axis, then roll about the optical axis.
RotationMatrix compose_rotation(double yaw, double pitch, double roll);

/// World-to-camera rotation, i.e. compose_rotation followed by the fixed
/// body-to-camera axis permutation.
RotationMatrix world_to_camera(const CameraPose& pose);

/// Projection center in world coordinates.
Eigen::Vector3d camera_center(const CameraPose& pose);

kernels::ProjectionParams projection_params(const CameraModel& model);

/// 3x4 homogeneous world-to-image matrix K [R | -R c].
Eigen::Matrix<double, 3, 4> projection_matrix(const CameraModel& model);

/// nullopt when the point sits at or behind the projection center
/// (camera depth <= kernels::kMinDepth).
std::optional<PixelPoint> project_world_to_pixel(const WorldPoint& p,
                                                 const CameraModel& model);

/// Intersection of the forward ray through q with the plane z = height.
/// nullopt when the ray is parallel to the plane or meets it behind the
/// camera.
std::optional<WorldPoint> project_pixel_to_world(const PixelPoint& q,
                                                 double height,
                                                 const CameraModel& model);

}  // namespace calib
