#include "calib/camera_model.hpp"

#include <cmath>
#include <string>

#include "calib/error.hpp"

namespace calib {

namespace {

RotationMatrix rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotationMatrix r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

RotationMatrix rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotationMatrix r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

RotationMatrix rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotationMatrix r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

// body (forward, left, up) -> camera (right, down, forward)
RotationMatrix body_to_camera() {
  RotationMatrix r;
  r << 0, -1, 0,
       0, 0, -1,
       1, 0, 0;
  return r;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void CameraPose::validate() const {
  if (!finite(x0) || !finite(y0) || !finite(z0) || !finite(yaw) ||
      !finite(pitch) || !finite(roll)) {
    throw CalibError(ErrorCode::ValidationFailure, "camera pose has non-finite values");
  }
  if (!(z0 > 0.0)) {
    throw CalibError(ErrorCode::ValidationFailure,
                     "camera mount height must be positive, got " + std::to_string(z0));
  }
}

void CameraIntrinsics::validate() const {
  if (!finite(focal) || !(focal > 0.0)) {
    throw CalibError(ErrorCode::ValidationFailure, "focal length must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw CalibError(ErrorCode::ValidationFailure, "image dimensions must be positive");
  }
}

void CameraModel::validate() const {
  pose.validate();
  intrinsics.validate();
}

RotationMatrix compose_rotation(double yaw, double pitch, double roll) {
  // Passive rotations: each factor re-expresses coordinates in the frame
  // obtained after the corresponding active turn of the camera body.
  const RotationMatrix r_yaw = rot_z(yaw).transpose();
  const RotationMatrix r_pitch = rot_y(-pitch).transpose();
  const RotationMatrix r_roll = rot_x(roll).transpose();
  return r_roll * r_pitch * r_yaw;
}

RotationMatrix world_to_camera(const CameraPose& pose) {
  return body_to_camera() * compose_rotation(pose.yaw, pose.pitch, pose.roll);
}

Eigen::Vector3d camera_center(const CameraPose& pose) {
  return {pose.x0, pose.y0, pose.z0};
}

kernels::ProjectionParams projection_params(const CameraModel& model) {
  const RotationMatrix r = world_to_camera(model.pose);
  kernels::ProjectionParams p{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p.rot[3 * i + j] = r(i, j);
  p.center[0] = model.pose.x0;
  p.center[1] = model.pose.y0;
  p.center[2] = model.pose.z0;
  p.focal = model.intrinsics.focal;
  const PixelPoint pp = model.intrinsics.principal_point();
  p.pu = pp.u;
  p.pv = pp.v;
  return p;
}

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraModel& model) {
  const RotationMatrix r = world_to_camera(model.pose);
  const PixelPoint pp = model.intrinsics.principal_point();
  Eigen::Matrix3d k;
  k << model.intrinsics.focal, 0, pp.u,
       0, model.intrinsics.focal, pp.v,
       0, 0, 1;
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = r;
  rt.col(3) = -r * camera_center(model.pose);
  return k * rt;
}

std::optional<PixelPoint> project_world_to_pixel(const WorldPoint& p,
                                                 const CameraModel& model) {
  const kernels::ProjectionParams params = projection_params(model);
  PixelPoint q;
  if (!kernels::project_one(params, p.x, p.y, p.z, q.u, q.v)) return std::nullopt;
  return q;
}

std::optional<WorldPoint> project_pixel_to_world(const PixelPoint& q,
                                                 double height,
                                                 const CameraModel& model) {
  const kernels::ProjectionParams params = projection_params(model);
  WorldPoint w{0.0, 0.0, height};
  if (!kernels::backproject_one(params, height, q.u, q.v, w.x, w.y)) return std::nullopt;
  return w;
}

}  // namespace calib
