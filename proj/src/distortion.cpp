#include "calib/distortion.hpp"

#include <array>
#include <cmath>

#include "calib/error.hpp"
#include "calib/kernels.hpp"
#include "calib/optimize.hpp"

namespace calib {

namespace {

kernels::UndistortParams kernel_params(const DistortionModel& d, const PixelPoint& c) {
  return {d.k1, d.k2, c.u, c.v, 1.0 / (d.normalization_radius * d.normalization_radius)};
}

// Mean squared perpendicular distance of points to their best-fit line:
// the smaller eigenvalue of the 2x2 scatter matrix divided by count.
double mean_sq_line_distance(std::span<const double> u, std::span<const double> v) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, svv = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu, dv = v[i] - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  const double half_tr = 0.5 * (suu + svv);
  const double disc = std::sqrt(0.25 * (suu - svv) * (suu - svv) + suv * suv);
  const double lmax = half_tr + disc;
  if (lmax <= 0.0) return 0.0;
  // det / lmax avoids cancellation in half_tr - disc.
  const double lmin = std::max(0.0, (suu * svv - suv * suv) / lmax);
  return lmin / n;
}

// Flattened polylines so one kernel call undistorts everything.
struct PolylineBatch {
  std::vector<double> u, v;
  std::vector<std::size_t> offsets{0};
  std::vector<double> uo, vo;

  explicit PolylineBatch(std::span<const Polyline> polylines) {
    for (const Polyline& pl : polylines) {
      if (pl.size() < 3) continue;
      for (const PixelPoint& p : pl) {
        u.push_back(p.u);
        v.push_back(p.v);
      }
      offsets.push_back(u.size());
    }
    uo.resize(u.size());
    vo.resize(v.size());
  }

  std::size_t count() const { return offsets.size() - 1; }

  // Mean over polylines of the mean squared perpendicular distance (px^2).
  double objective(const DistortionModel& d, const PixelPoint& c) {
    kernels::undistort(kernel_params(d, c), u, v, uo, vo);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
      const std::size_t a = offsets[k], len = offsets[k + 1] - offsets[k];
      total += mean_sq_line_distance(std::span(uo).subspan(a, len),
                                     std::span(vo).subspan(a, len));
    }
    return total / static_cast<double>(count());
  }
};

}  // namespace

double half_diagonal(int width, int height) {
  return 0.5 * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

DistortionModel DistortionModel::identity(int width, int height) {
  return {0.0, 0.0, half_diagonal(width, height)};
}

bool DistortionModel::monotone_on_diagonal() const {
  // d/dr [r (1 + k1 r^2 + k2 r^4)] = 1 + 3 k1 r^2 + 5 k2 r^4
  constexpr int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double r2 = std::pow(static_cast<double>(i) / kSamples, 2);
    if (1.0 + 3.0 * k1 * r2 + 5.0 * k2 * r2 * r2 <= 0.0) return false;
  }
  return true;
}

PixelPoint undistort_point(const PixelPoint& q, const DistortionModel& d,
                           const PixelPoint& center) {
  PixelPoint out;
  kernels::undistort_one(kernel_params(d, center), q.u, q.v, out.u, out.v);
  return out;
}

std::vector<PixelPoint> undistort_points(std::span<const PixelPoint> pts,
                                         const DistortionModel& d,
                                         const PixelPoint& center) {
  std::vector<double> u(pts.size()), v(pts.size()), uo(pts.size()), vo(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    u[i] = pts[i].u;
    v[i] = pts[i].v;
  }
  kernels::undistort(kernel_params(d, center), u, v, uo, vo);
  std::vector<PixelPoint> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = {uo[i], vo[i]};
  return out;
}

double straightness_residual(std::span<const Polyline> polylines,
                             const DistortionModel& d, const PixelPoint& center) {
  PolylineBatch batch(polylines);
  if (batch.count() == 0) return 0.0;
  return std::sqrt(batch.objective(d, center));
}

DistortionFit fit_distortion(std::span<const Polyline> polylines, int width,
                             int height) {
  if (width <= 0 || height <= 0) {
    throw CalibError(ErrorCode::ValidationFailure, "image dimensions must be positive");
  }
  PolylineBatch batch(polylines);
  if (batch.count() == 0) {
    throw CalibError(ErrorCode::InsufficientData,
                     "distortion fit needs at least one polyline with three or more points");
  }
  const PixelPoint center{0.5 * width, 0.5 * height};
  const double radius = half_diagonal(width, height);
  const double scale = 1.0 / (radius * radius);

  DistortionFit fit;
  auto objective = [&](std::span<const double> k) {
    ++fit.evaluations;
    // Normalized units keep the tolerances image-size independent.
    return batch.objective({k[0], k[1], radius}, center) * scale;
  };

  SimplexOptions opts;
  opts.max_iterations = 4000;
  opts.xtol = 1e-11;
  opts.ftol_abs = 1e-26;
  opts.ftol_rel = 1e-10;

  const std::array<double, 2> zero{0.0, 0.0};
  const std::array<double, 2> steps{0.05, 0.02};
  SimplexResult best = nelder_mead(objective, zero, steps, opts);

  constexpr double kRestartResidualPx = 2.0;
  if (std::sqrt(best.value) * radius > kRestartResidualPx || !best.converged) {
    const std::array<double, 2> perturbed{best.x[0] + 0.1, best.x[1] - 0.05};
    const std::array<double, 2> wide{-0.2, 0.1};
    SimplexResult again = nelder_mead(objective, perturbed, wide, opts);
    if (again.value <= best.value) best = again;
  }
  if (!best.converged) {
    throw CalibError(ErrorCode::NonConvergence,
                     "distortion fit did not converge within its iteration budget");
  }

  fit.model = {best.x[0], best.x[1], radius};
  fit.rms_residual_px = std::sqrt(best.value) * radius;
  return fit;
}

}  // namespace calib
