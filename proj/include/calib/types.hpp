#pragma once

#include <cmath>
#include <numbers>

namespace calib {

inline constexpr double kPi = std::numbers::pi;

/// Image coordinates in pixels: u grows rightward, v grows downward.
/// Points may lie outside the frame.
struct PixelPoint {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// World (base) coordinates in meters. Right-handed, z up, floor at z = 0.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace calib
