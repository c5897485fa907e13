#pragma once

#include <span>
#include <vector>

#include "calib/types.hpp"

namespace calib {

/// Two-term radial model. Undistortion maps an observed point q to
///   c + (q - c) * (1 + k1 r^2 + k2 r^4),  r = |q - c| / normalization_radius
/// with c the image center and the radius equal to half the image diagonal.
struct DistortionModel {
  double k1 = 0.0;
  double k2 = 0.0;
  double normalization_radius = 1.0;

  static DistortionModel identity(int width, int height);

  /// True when the undistorted radius grows strictly with the observed
  /// radius along the whole half diagonal (r in [0, 1]).
  bool monotone_on_diagonal() const;

  friend bool operator==(const DistortionModel&, const DistortionModel&) = default;
};

double half_diagonal(int width, int height);

/// Ordered points traced along an image curve that is straight in reality.
using Polyline = std::vector<PixelPoint>;

PixelPoint undistort_point(const PixelPoint& q, const DistortionModel& d,
                           const PixelPoint& center);

/// Batch form over the active kernel table.
std::vector<PixelPoint> undistort_points(std::span<const PixelPoint> pts,
                                         const DistortionModel& d,
                                         const PixelPoint& center);

/// Root mean square (over polylines) of each polyline's RMS perpendicular
/// distance to its total-least-squares line, after undistortion (pixels).
/// Polylines with fewer than three points do not contribute.
double straightness_residual(std::span<const Polyline> polylines,
                             const DistortionModel& d, const PixelPoint& center);

struct DistortionFit {
  DistortionModel model;
  double rms_residual_px = 0.0;
  int evaluations = 0;
};

/// Chooses (k1, k2) that straighten the polylines. Throws InsufficientData
/// when no polyline has three or more points and NonConvergence when the
/// simplex search exhausts its budget.
DistortionFit fit_distortion(std::span<const Polyline> polylines, int width,
                             int height);

}  // namespace calib
