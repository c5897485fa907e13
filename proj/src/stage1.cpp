#include "calib/stage1.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "calib/error.hpp"
#include "calib/kernels.hpp"
#include "calib/optimize.hpp"

namespace calib {

namespace {

constexpr double kMinEqualSegmentPx = 20.0;
constexpr double kCriterionPrecision = 1e-14;
constexpr double kPitchLimit = 1.45;
constexpr double kMinFocalRatio = 0.2;
constexpr double kMaxFocalRatio = 10.0;
constexpr std::array<double, 5> kPitchStarts{-1.2, -0.9, -0.6, -0.3, -0.05};
constexpr std::array<double, 4> kFocalStarts{0.5, 1.0, 2.0, 4.0};

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw CalibError(ErrorCode::ValidationFailure, field + ": " + msg, {}, field);
}

double orient(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) {
  return (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
}

bool on_segment(const PixelPoint& a, const PixelPoint& b, const PixelPoint& p) {
  return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) &&
         std::min(a.v, b.v) <= p.v && p.v <= std::max(a.v, b.v);
}

bool segments_touch(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                    const PixelPoint& d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) &&
      ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return true;
  }
  return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
         (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

// Flattened annotation points plus the criterion terms built on their floor
// projections. Floor points are laid out as: vertical endpoints, then
// parallel endpoints and the perpendicular pair (option 1) or the equal
// segment endpoints (option 2). Vertical first endpoints are also projected
// onto the plane z = 1.
class CriterionEvaluator {
 public:
  explicit CriterionEvaluator(const AnnotationSet& a) : option_(a.option) {
    auto add = [this](const std::vector<ImageLine>& lines) {
      for (const ImageLine& l : lines) {
        u_.push_back(l.a().u);
        v_.push_back(l.a().v);
        u_.push_back(l.b().u);
        v_.push_back(l.b().v);
      }
      return lines.size();
    };
    n_vertical_ = add(a.vertical_lines);
    for (const ImageLine& l : a.vertical_lines) {
      top_u_.push_back(l.a().u);
      top_v_.push_back(l.a().v);
    }
    if (option_ == AnnotationOption::Option1) {
      n_parallel_ = add(a.parallel_lines);
      n_perpendicular_ = add(a.perpendicular_pair);
    } else {
      n_equal_ = add(a.equal_segments);
    }
    x_.resize(u_.size());
    y_.resize(u_.size());
    ok_.resize(u_.size());
    top_x_.resize(top_u_.size());
    top_y_.resize(top_u_.size());
    top_ok_.resize(top_u_.size());
  }

  std::optional<double> operator()(const CameraModel& model) {
    const kernels::ProjectionParams p = projection_params(model);
    kernels::backproject(p, 0.0, u_, v_, x_, y_, ok_);
    kernels::backproject(p, 1.0, top_u_, top_v_, top_x_, top_y_, top_ok_);
    if (std::find(ok_.begin(), ok_.end(), 0) != ok_.end() ||
        std::find(top_ok_.begin(), top_ok_.end(), 0) != top_ok_.end()) {
      return std::nullopt;
    }

    double value = verticality();
    std::size_t line = n_vertical_;
    if (option_ == AnnotationOption::Option1) {
      value += parallelism(line, n_parallel_);
      line += n_parallel_;
      value += perpendicularity(line);
    } else {
      value += length_spread(line, n_equal_);
    }
    return value;
  }

  // Signed per-primitive residuals that all vanish where the criterion
  // does: tilt sines of the verticals, cross products of parallel pairs,
  // the perpendicular pair's dot product, or relative length deviations of
  // the equal segments.
  std::optional<std::vector<double>> residuals(const CameraModel& model) {
    if (!(*this)(model)) return std::nullopt;
    std::vector<double> r;
    for (std::size_t k = 0; k < n_vertical_; ++k) {
      const auto dir = direction(k);
      const double wx = top_x_[k] - x_[2 * k];
      const double wy = top_y_[k] - y_[2 * k];
      const double h = dir[0] * wy - dir[1] * wx;
      r.push_back(h / std::sqrt(h * h + 1.0));
    }
    std::size_t line = n_vertical_;
    if (option_ == AnnotationOption::Option1) {
      for (std::size_t i = 0; i < n_parallel_; ++i) {
        const auto a = direction(line + i);
        for (std::size_t j = i + 1; j < n_parallel_; ++j) {
          const auto b = direction(line + j);
          r.push_back(a[0] * b[1] - a[1] * b[0]);
        }
      }
      line += n_parallel_;
      const auto a = direction(line);
      const auto b = direction(line + 1);
      r.push_back(a[0] * b[0] + a[1] * b[1]);
    } else {
      std::vector<double> len(n_equal_);
      double mean = 0.0;
      for (std::size_t i = 0; i < n_equal_; ++i) {
        const std::size_t k = line + i;
        len[i] = std::hypot(x_[2 * k + 1] - x_[2 * k], y_[2 * k + 1] - y_[2 * k]);
        mean += len[i] / static_cast<double>(n_equal_);
      }
      for (double l : len) r.push_back((l - mean) / mean);
    }
    return r;
  }

 private:
  // Unit floor direction of line k (z = 0 projections of both endpoints).
  std::array<double, 2> direction(std::size_t k) const {
    const double dx = x_[2 * k + 1] - x_[2 * k];
    const double dy = y_[2 * k + 1] - y_[2 * k];
    const double n = std::hypot(dx, dy);
    return {dx / n, dy / n};
  }

  // Each image line and the projection center span a plane. The steepest
  // direction inside that plane runs from the z = 0 trace to the z = 1
  // trace; the line can be the image of a world vertical only if that
  // direction is vertical. Term: 1 - |cos(angle to up)|, evaluated as
  // h^2 / (|d| (|d| + 1)) with d = (h, 1) to avoid cancellation.
  double verticality() const {
    double sum = 0.0;
    for (std::size_t k = 0; k < n_vertical_; ++k) {
      const auto dir = direction(k);
      const double wx = top_x_[k] - x_[2 * k];
      const double wy = top_y_[k] - y_[2 * k];
      const double along = wx * dir[0] + wy * dir[1];
      const double hx = wx - along * dir[0];
      const double hy = wy - along * dir[1];
      const double h2 = hx * hx + hy * hy;
      const double len = std::sqrt(h2 + 1.0);
      sum += h2 / (len * (len + 1.0));
    }
    return sum / static_cast<double>(n_vertical_);
  }

  // Mean over pairs of |1 - |dot||, evaluated as cross^2 / (1 + |dot|).
  double parallelism(std::size_t first, std::size_t count) const {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto a = direction(first + i);
      for (std::size_t j = i + 1; j < count; ++j) {
        const auto b = direction(first + j);
        const double dot = a[0] * b[0] + a[1] * b[1];
        const double cross = a[0] * b[1] - a[1] * b[0];
        sum += cross * cross / (1.0 + std::abs(dot));
        ++pairs;
      }
    }
    return sum / static_cast<double>(pairs);
  }

  double perpendicularity(std::size_t first) const {
    const auto a = direction(first);
    const auto b = direction(first + 1);
    return std::abs(a[0] * b[0] + a[1] * b[1]);
  }

  double length_spread(std::size_t first, std::size_t count) const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t k = first + i;
      const double len = std::hypot(x_[2 * k + 1] - x_[2 * k], y_[2 * k + 1] - y_[2 * k]);
      lo = std::min(lo, len);
      hi = std::max(hi, len);
      sum += len;
    }
    return (hi - lo) / (sum / static_cast<double>(count));
  }

  AnnotationOption option_;
  std::size_t n_vertical_ = 0, n_parallel_ = 0, n_perpendicular_ = 0, n_equal_ = 0;
  std::vector<double> u_, v_, x_, y_;
  std::vector<std::uint8_t> ok_;
  std::vector<double> top_u_, top_v_, top_x_, top_y_;
  std::vector<std::uint8_t> top_ok_;
};

CameraModel partial_model(double roll, double pitch, double focal, int width, int height) {
  CameraModel m;
  m.pose = CameraPose{0.0, 0.0, kDefaultMountHeight, 0.0, pitch, roll};
  m.intrinsics = CameraIntrinsics{focal, width, height};
  return m;
}

}  // namespace

bool is_simple_polygon(const std::vector<PixelPoint>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (poly[i] == poly[j]) return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const PixelPoint& a = poly[i];
    const PixelPoint& b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const PixelPoint& c = poly[j];
      const PixelPoint& d = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they only overlap when folded back
        // onto each other.
        const PixelPoint& shared = (j == i + 1) ? b : a;
        const PixelPoint& p = (j == i + 1) ? a : b;
        const PixelPoint& q = (j == i + 1) ? d : c;
        if (orient(shared, p, q) == 0.0) {
          const double dot = (p.u - shared.u) * (q.u - shared.u) + (p.v - shared.v) * (q.v - shared.v);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

void AnnotationSet::validate(int width, int height) const {
  if (vertical_lines.size() < 2) {
    throw CalibError(ErrorCode::DegenerateLines,
                     "vertical_lines: at least two vertical lines are required", {},
                     "vertical_lines");
  }
  if (option == AnnotationOption::Option1) {
    if (parallel_lines.size() < 2) invalid("parallel_lines", "at least two lines are required");
    if (perpendicular_pair.size() != 2) invalid("perpendicular_pair", "exactly two lines are required");
  } else {
    if (equal_segments.size() < 2) invalid("equal_segments", "at least two segments are required");
    for (std::size_t i = 0; i < equal_segments.size(); ++i) {
      if (equal_segments[i].length() < kMinEqualSegmentPx) {
        invalid("equal_segments[" + std::to_string(i) + "]", "segment shorter than 20 px");
      }
    }
  }
  if (efov_polygon.size() < 3) invalid("efov_polygon", "at least three vertices are required");
  if (!is_simple_polygon(efov_polygon)) invalid("efov_polygon", "polygon is not simple");

  const double lo_u = -0.5 * width, hi_u = 1.5 * width;
  const double lo_v = -0.5 * height, hi_v = 1.5 * height;
  auto check = [&](const PixelPoint& p, const std::string& field) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v) || p.u < lo_u || p.u > hi_u ||
        p.v < lo_v || p.v > hi_v) {
      invalid(field, "point outside the allowed image window");
    }
  };
  auto check_lines = [&](const std::vector<ImageLine>& lines, const std::string& name) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string f = name + "[" + std::to_string(i) + "]";
      check(lines[i].a(), f);
      check(lines[i].b(), f);
    }
  };
  check_lines(vertical_lines, "vertical_lines");
  check_lines(parallel_lines, "parallel_lines");
  check_lines(perpendicular_pair, "perpendicular_pair");
  check_lines(equal_segments, "equal_segments");
  for (std::size_t i = 0; i < efov_polygon.size(); ++i) {
    check(efov_polygon[i], "efov_polygon[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < distortion_polylines.size(); ++i) {
    const std::string f = "distortion_polylines[" + std::to_string(i) + "]";
    const Polyline& pl = distortion_polylines[i];
    for (std::size_t j = 0; j < pl.size(); ++j) {
      check(pl[j], f);
      if (j > 0 && pl[j] == pl[j - 1]) invalid(f, "consecutive points coincide");
    }
  }
}

AnnotationSet AnnotationSet::undistorted(const DistortionModel& d, const PixelPoint& center) const {
  AnnotationSet out = *this;
  auto map_lines = [&](std::vector<ImageLine>& lines) {
    for (ImageLine& l : lines) {
      l = ImageLine(undistort_point(l.a(), d, center), undistort_point(l.b(), d, center));
    }
  };
  map_lines(out.vertical_lines);
  map_lines(out.parallel_lines);
  map_lines(out.perpendicular_pair);
  map_lines(out.equal_segments);
  out.efov_polygon = undistort_points(efov_polygon, d, center);
  return out;
}

CameraPose PartialCalibration::default_pose() const {
  return CameraPose{0.0, 0.0, kDefaultMountHeight, 0.0, pitch, roll};
}

CameraModel PartialCalibration::model() const {
  return partial_model(roll, pitch, focal, width, height);
}

void PartialCalibration::validate() const {
  if (!std::isfinite(focal) || !(focal > 0.0)) {
    throw CalibError(ErrorCode::ValidationFailure, "partial: focal must be positive", {}, "focal");
  }
  // Closed interval; the slack admits +-pi/2 after nine-digit storage.
  if (!std::isfinite(pitch) || !(std::abs(pitch) <= 0.5 * kPi + 1e-8)) {
    throw CalibError(ErrorCode::ValidationFailure, "partial: pitch outside [-pi/2, pi/2]", {}, "pitch");
  }
  if (!std::isfinite(roll) || roll <= -kPi || roll > kPi) {
    throw CalibError(ErrorCode::ValidationFailure, "partial: roll outside (-pi, pi]", {}, "roll");
  }
  if (!std::isfinite(residual) || residual < 0.0) {
    throw CalibError(ErrorCode::ValidationFailure, "partial: residual must be non-negative", {}, "residual");
  }
  if (width <= 0 || height <= 0) {
    throw CalibError(ErrorCode::ValidationFailure, "partial: image dimensions must be positive");
  }
}

double evaluate_criterion(const AnnotationSet& annotation, const CameraModel& params) {
  CriterionEvaluator eval(annotation);
  const std::optional<double> v = eval(params);
  if (!v) {
    throw CalibError(ErrorCode::ProjectionFailure,
                     "an annotated point does not reach its projection plane under these parameters");
  }
  return *v;
}

PartialCalibration solve_partial(const AnnotationSet& annotation, int width, int height,
                                 const SolveOptions& options) {
  annotation.validate(width, height);
  const PixelPoint center{0.5 * width, 0.5 * height};
  const VanishingEstimate vp = estimate_vanishing_point(annotation.vertical_lines);
  const double roll = roll_from_vertical_vp(vp.point, center);

  CriterionEvaluator eval(annotation);
  const double w = static_cast<double>(width);
  // Search coordinates: (pitch, ln(focal / width)).
  auto objective = [&](std::span<const double> x) {
    const double pitch = x[0];
    const double focal = w * std::exp(x[1]);
    if (!(std::abs(pitch) < kPitchLimit) || !(focal >= kMinFocalRatio * w) ||
        !(focal <= kMaxFocalRatio * w)) {
      return std::numeric_limits<double>::infinity();
    }
    return eval(partial_model(roll, pitch, focal, width, height))
        .value_or(std::numeric_limits<double>::infinity());
  };

  SimplexOptions coarse;
  coarse.max_iterations = 600;
  coarse.xtol = 1e-7;
  coarse.ftol_abs = 1e-20;
  coarse.ftol_rel = 1e-8;

  std::optional<SimplexResult> best;
  const std::array<double, 2> steps{0.1, 0.25};
  for (double p0 : kPitchStarts) {
    for (double f0 : kFocalStarts) {
      const std::array<double, 2> start{p0, std::log(f0)};
      if (!std::isfinite(objective(start))) continue;
      SimplexResult r = nelder_mead(objective, start, steps, coarse);
      if (!best || r.value < best->value) best = std::move(r);
    }
  }
  if (!best) {
    throw CalibError(ErrorCode::InfeasibleGeometry,
                     "no start point projects every annotated line onto the floor");
  }

  SimplexOptions fine;
  fine.max_iterations = 3000;
  fine.xtol = 1e-13;
  fine.ftol_abs = 1e-30;
  fine.ftol_rel = 1e-13;
  // Two restarts from the incumbent with shrinking simplices.
  for (double step : {1e-3, 1e-6}) {
    const std::array<double, 2> fine_steps{step, step};
    SimplexResult r = nelder_mead(objective, best->x, fine_steps, fine);
    if (r.value <= best->value) best = std::move(r);
  }

  // Least-squares polish on the signed residuals. The criterion decides
  // whether the polished point replaces the simplex result; values within
  // its evaluation precision count as ties.
  auto residual_fn = [&](std::span<const double> x) -> std::optional<std::vector<double>> {
    if (!std::isfinite(objective(x))) return std::nullopt;
    return eval.residuals(partial_model(roll, x[0], w * std::exp(x[1]), width, height));
  };
  if (const auto lm = levenberg_marquardt(residual_fn, best->x)) {
    const double value = objective(lm->x);
    if (value <= best->value + kCriterionPrecision) {
      best->x = lm->x;
      best->value = value;
    }
  }

  if (!std::isfinite(best->value) || best->value > options.residual_tolerance) {
    throw CalibError(ErrorCode::NonConvergence,
                     "criterion stayed above tolerance: " + std::to_string(best->value));
  }

  PartialCalibration out;
  out.roll = roll;
  out.pitch = best->x[0];
  out.focal = w * std::exp(best->x[1]);
  out.width = width;
  out.height = height;
  out.residual = best->value;
  return out;
}

FloorPolygon project_efov(const AnnotationSet& annotation, const PartialCalibration& partial) {
  const std::size_t n = annotation.efov_polygon.size();
  std::vector<double> u(n), v(n), x(n), y(n);
  std::vector<std::uint8_t> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = annotation.efov_polygon[i].u;
    v[i] = annotation.efov_polygon[i].v;
  }
  kernels::backproject(projection_params(partial.model()), 0.0, u, v, x, y, ok);
  std::vector<int> bad;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) bad.push_back(static_cast<int>(i));
  }
  if (!bad.empty()) {
    throw CalibError(ErrorCode::HorizonViolation,
                     "EFOV vertices do not reach the floor (drawn past the horizon)", bad);
  }
  FloorPolygon out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {x[i], y[i], 0.0};
  return out;
}

}  // namespace calib
