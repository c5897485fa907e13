#include "calib/vanishing.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "calib/error.hpp"

namespace calib {

namespace {
constexpr double kMinEndpointSeparation = 1e-6;
constexpr double kInfiniteW = 1e-8;
constexpr double kAmbiguousRollRadius = 1.0;
constexpr double kRankTol = 1e-10;
}  // namespace

ImageLine::ImageLine(PixelPoint a, PixelPoint b) : a_(a), b_(b) {
  if (!std::isfinite(a.u) || !std::isfinite(a.v) || !std::isfinite(b.u) ||
      !std::isfinite(b.v)) {
    throw CalibError(ErrorCode::ValidationFailure, "line endpoints must be finite");
  }
  if (length() <= kMinEndpointSeparation) {
    throw CalibError(ErrorCode::ValidationFailure, "line endpoints coincide");
  }
}

double ImageLine::length() const { return std::hypot(b_.u - a_.u, b_.v - a_.v); }

Eigen::Vector3d ImageLine::coefficients() const {
  const Eigen::Vector3d l =
      Eigen::Vector3d(a_.u, a_.v, 1.0).cross(Eigen::Vector3d(b_.u, b_.v, 1.0));
  return l / std::hypot(l.x(), l.y());
}

VanishingPoint::VanishingPoint(const Eigen::Vector3d& h) {
  const double m = h.cwiseAbs().maxCoeff();
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw CalibError(ErrorCode::DegenerateLines, "vanishing point is the zero triple");
  }
  h_ = h / m;
  // Sign convention: w >= 0 so the triple is unique up to the sign of zero.
  if (h_.z() < 0.0) h_ = -h_;
}

bool VanishingPoint::is_finite() const { return std::abs(h_.z()) >= kInfiniteW; }

PixelPoint VanishingPoint::point() const { return {h_.x() / h_.z(), h_.y() / h_.z()}; }

Eigen::Vector2d VanishingPoint::direction() const { return h_.head<2>().normalized(); }

VanishingEstimate estimate_vanishing_point(std::span<const ImageLine> lines) {
  if (lines.size() < 2) {
    throw CalibError(ErrorCode::DegenerateLines,
                     "at least two vertical lines are needed to find a vanishing point");
  }

  // Condition the system: shift endpoints to their centroid and scale the
  // mean distance to sqrt(2).
  double cu = 0.0, cv = 0.0;
  for (const ImageLine& l : lines) cu += l.a().u + l.b().u, cv += l.a().v + l.b().v;
  const double n_pts = 2.0 * static_cast<double>(lines.size());
  cu /= n_pts;
  cv /= n_pts;
  double mean_dist = 0.0;
  for (const ImageLine& l : lines) {
    mean_dist += std::hypot(l.a().u - cu, l.a().v - cv) + std::hypot(l.b().u - cu, l.b().v - cv);
  }
  mean_dist /= n_pts;
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;

  Eigen::MatrixXd a(lines.size(), 3);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const ImageLine normalized({(lines[i].a().u - cu) * s, (lines[i].a().v - cv) * s},
                               {(lines[i].b().u - cu) * s, (lines[i].b().v - cv) * s});
    a.row(static_cast<Eigen::Index>(i)) = normalized.coefficients().transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(1) <= kRankTol * sv(0)) {
    throw CalibError(ErrorCode::DegenerateLines, "all annotated lines coincide");
  }
  const Eigen::Vector3d xn = svd.matrixV().col(2);
  // Undo the conditioning: x = T^-1 xn.
  const Eigen::Vector3d x(xn.x() / s + cu * xn.z(), xn.y() / s + cv * xn.z(), xn.z());
  const VanishingPoint vp(x);

  double sum_sq = 0.0;
  for (const ImageLine& l : lines) {
    const Eigen::Vector3d c = l.coefficients();
    double d;
    if (vp.is_finite()) {
      const PixelPoint p = vp.point();
      d = c.x() * p.u + c.y() * p.v + c.z();
    } else {
      const Eigen::Vector2d dir = vp.direction();
      d = c.x() * dir.x() + c.y() * dir.y();
    }
    sum_sq += d * d;
  }
  return {vp, std::sqrt(sum_sq / static_cast<double>(lines.size()))};
}

double roll_from_vertical_vp(const VanishingPoint& vp, const PixelPoint& center) {
  double du, dv;
  if (vp.is_finite()) {
    const PixelPoint p = vp.point();
    du = p.u - center.u;
    dv = p.v - center.v;
    if (std::hypot(du, dv) < kAmbiguousRollRadius) {
      throw CalibError(ErrorCode::AmbiguousRoll,
                       "vertical vanishing point coincides with the principal point");
    }
  } else {
    const Eigen::Vector2d d = vp.direction();
    du = d.x();
    dv = d.y();
  }
  double roll = std::atan2(du, dv);
  if (roll > 0.5 * kPi) roll -= kPi;
  else if (roll <= -0.5 * kPi) roll += kPi;
  return roll;
}

ImageLine vertical_line_through(const PixelPoint& p, const VanishingPoint& vp) {
  if (vp.is_finite()) {
    const PixelPoint q = vp.point();
    if (std::hypot(q.u - p.u, q.v - p.v) <= kMinEndpointSeparation) {
      throw CalibError(ErrorCode::CoincidentPoint, "point coincides with the vanishing point");
    }
    return ImageLine(p, q);
  }
  const Eigen::Vector2d d = vp.direction();
  return ImageLine(p, {p.u + d.x(), p.v + d.y()});
}

}  // namespace calib
