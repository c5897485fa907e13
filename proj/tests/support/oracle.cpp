#include "oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

std::array<Vec3, 3> camera_axes(const TrueCamera& c) {
  const double cp = std::cos(c.pitch), sp = std::sin(c.pitch);
  const double cy = std::cos(c.yaw), sy = std::sin(c.yaw);
  const Vec3 forward{cp * cy, cp * sy, sp};
  const Vec3 right0{sy, -cy, 0.0};
  const Vec3 down0 = cross(forward, right0);
  const double cr = std::cos(c.roll), sr = std::sin(c.roll);
  Vec3 right, down;
  for (int i = 0; i < 3; ++i) {
    right[i] = cr * right0[i] + sr * down0[i];
    down[i] = -sr * right0[i] + cr * down0[i];
  }
  return {right, down, forward};
}

std::array<double, 12> projection_matrix(const TrueCamera& c) {
  const auto R = camera_axes(c);
  const Vec3 centre{c.x0, c.y0, c.z0};
  const double cu = 0.5 * c.width, cv = 0.5 * c.height;
  std::array<double, 12> P{};
  // K rows: (f, 0, cu), (0, f, cv), (0, 0, 1).
  for (int col = 0; col < 3; ++col) {
    P[0 * 4 + col] = c.focal * R[0][col] + cu * R[2][col];
    P[1 * 4 + col] = c.focal * R[1][col] + cv * R[2][col];
    P[2 * 4 + col] = R[2][col];
  }
  const double t0 = -dot(R[0], centre), t1 = -dot(R[1], centre), t2 = -dot(R[2], centre);
  P[3] = c.focal * t0 + cu * t2;
  P[7] = c.focal * t1 + cv * t2;
  P[11] = t2;
  return P;
}

std::optional<calib::PixelPoint> project(const TrueCamera& c, const calib::WorldPoint& p) {
  const auto R = camera_axes(c);
  const Vec3 d{p.x - c.x0, p.y - c.y0, p.z - c.z0};
  const double zc = dot(R[2], d);
  if (!(zc > 1e-9)) return std::nullopt;
  return calib::PixelPoint{0.5 * c.width + c.focal * dot(R[0], d) / zc,
                           0.5 * c.height + c.focal * dot(R[1], d) / zc};
}

std::optional<calib::WorldPoint> backproject(const TrueCamera& c, const calib::PixelPoint& q,
                                             double h) {
  const auto R = camera_axes(c);
  const double a = (q.u - 0.5 * c.width) / c.focal;
  const double b = (q.v - 0.5 * c.height) / c.focal;
  Vec3 ray;
  for (int i = 0; i < 3; ++i) ray[i] = a * R[0][i] + b * R[1][i] + R[2][i];
  if (std::abs(ray[2]) < 1e-12) return std::nullopt;
  const double t = (h - c.z0) / ray[2];
  if (!(t > 1e-9)) return std::nullopt;
  return calib::WorldPoint{c.x0 + t * ray[0], c.y0 + t * ray[1], h};
}

calib::CameraModel to_model(const TrueCamera& c) {
  calib::CameraModel m;
  m.pose = {c.x0, c.y0, c.z0, c.yaw, c.pitch, c.roll};
  m.intrinsics = {c.focal, c.width, c.height};
  return m;
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() {
  if (spare_) {
    const double s = *spare_;
    spare_.reset();
    return s;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform(0.0, 1.0);
  const double u2 = uniform(0.0, 1.0);
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * calib::kPi * u2);
  return r * std::cos(2.0 * calib::kPi * u2);
}

TrueCamera random_camera(Rng& rng, double pitch_lo, double pitch_hi, double focal_lo,
                         double focal_hi) {
  TrueCamera c;
  c.width = 1280;
  c.height = 720;
  c.x0 = rng.uniform(-20, 20);
  c.y0 = rng.uniform(-20, 20);
  c.z0 = rng.uniform(2.5, 8.0);
  c.yaw = rng.uniform(-calib::kPi, calib::kPi);
  c.pitch = rng.uniform(pitch_lo, pitch_hi);
  c.roll = rng.uniform(-0.15, 0.15);
  c.focal = rng.uniform(focal_lo, focal_hi) * c.width;
  return c;
}

namespace {

bool in_frame(const TrueCamera& c, const calib::PixelPoint& p, double margin = 0.0) {
  return p.u >= -margin && p.u <= c.width + margin && p.v >= -margin && p.v <= c.height + margin;
}

// Topmost pixel row used for floor primitives: 8% of the image height below
// the horizon where it crosses the centre column. nullopt when less than a
// fifth of the frame lies below that row.
std::optional<double> floor_row(const TrueCamera& c) {
  const auto R = camera_axes(c);
  // A ray (0, b, 1) in camera coordinates is horizontal when b R1z + R2z = 0.
  if (std::abs(R[1][2]) < 1e-12) return std::nullopt;
  const double v_h = 0.5 * c.height - c.focal * R[2][2] / R[1][2];
  const double top = std::max(v_h + 0.08 * c.height, 0.05 * c.height);
  if (top > 0.8 * c.height) return std::nullopt;
  return top;
}

calib::PixelPoint random_pixel(const TrueCamera& c, double top, Rng& rng) {
  return {rng.uniform(0.1 * c.width, 0.9 * c.width), rng.uniform(top, 0.95 * c.height)};
}

std::optional<calib::ImageLine> floor_segment(const TrueCamera& c, const calib::WorldPoint& p,
                                              double dx, double dy) {
  const auto a = project(c, p);
  const auto b = project(c, {p.x + dx, p.y + dy, 0.0});
  if (!a || !b || !in_frame(c, *a) || !in_frame(c, *b)) return std::nullopt;
  if (std::hypot(a->u - b->u, a->v - b->v) < 25.0) return std::nullopt;
  return calib::ImageLine(*a, *b);
}

}  // namespace

std::optional<Scene> render_scene(const TrueCamera& c, calib::AnnotationOption option, Rng& rng) {
  const auto top = floor_row(c);
  if (!top) return std::nullopt;
  Scene s;
  s.camera = c;
  s.annotation.option = option;
  constexpr int kAttempts = 400;

  auto floor_point = [&]() -> std::optional<calib::WorldPoint> {
    return backproject(c, random_pixel(c, *top, rng), 0.0);
  };

  // Verticals: posts standing on the floor, shorter than the mount height,
  // first endpoint at the top.
  for (int k = 0; k < kAttempts && s.annotation.vertical_lines.size() < 4; ++k) {
    const auto base = floor_point();
    if (!base) continue;
    const double h = rng.uniform(0.3, 0.8) * c.z0;
    const auto pb = project(c, *base);
    const auto pt = project(c, {base->x, base->y, h});
    if (!pb || !pt || !in_frame(c, *pt) || std::hypot(pb->u - pt->u, pb->v - pt->v) < 30.0) continue;
    s.annotation.vertical_lines.emplace_back(*pt, *pb);
  }
  if (s.annotation.vertical_lines.size() < 4) return std::nullopt;

  if (option == calib::AnnotationOption::Option1) {
    const double alpha = rng.uniform(-calib::kPi, calib::kPi);
    for (int k = 0; k < kAttempts && s.annotation.parallel_lines.size() < 3; ++k) {
      const auto p = floor_point();
      if (!p) continue;
      const double len = rng.uniform(0.5, 1.5) * c.z0;
      if (auto l = floor_segment(c, *p, len * std::cos(alpha), len * std::sin(alpha))) {
        s.annotation.parallel_lines.push_back(*l);
      }
    }
    if (s.annotation.parallel_lines.size() < 3) return std::nullopt;
    for (int k = 0; k < kAttempts && s.annotation.perpendicular_pair.size() < 2; ++k) {
      s.annotation.perpendicular_pair.clear();
      const auto p = floor_point();
      if (!p) continue;
      const double beta = rng.uniform(-calib::kPi, calib::kPi);
      const double len = rng.uniform(0.5, 1.2) * c.z0;
      const auto l1 = floor_segment(c, *p, len * std::cos(beta), len * std::sin(beta));
      const auto l2 = floor_segment(c, *p, -len * std::sin(beta), len * std::cos(beta));
      if (l1 && l2) {
        s.annotation.perpendicular_pair.push_back(*l1);
        s.annotation.perpendicular_pair.push_back(*l2);
      }
    }
    if (s.annotation.perpendicular_pair.size() < 2) return std::nullopt;
  } else {
    const double len = rng.uniform(0.4, 1.0) * c.z0;
    for (int k = 0; k < kAttempts && s.annotation.equal_segments.size() < 3; ++k) {
      const auto p = floor_point();
      if (!p) continue;
      const double beta = rng.uniform(-calib::kPi, calib::kPi);
      if (auto l = floor_segment(c, *p, len * std::cos(beta), len * std::sin(beta))) {
        s.annotation.equal_segments.push_back(*l);
      }
    }
    if (s.annotation.equal_segments.size() < 3) return std::nullopt;
  }

  // EFOV: a trapezoid spanning the floor part of the frame.
  const double t = *top + 0.02 * c.height;
  s.annotation.efov_polygon = {{0.15 * c.width, t},
                               {0.85 * c.width, t},
                               {0.95 * c.width, 0.95 * c.height},
                               {0.05 * c.width, 0.95 * c.height}};
  for (const auto& q : s.annotation.efov_polygon) {
    const auto w = backproject(c, q, 0.0);
    if (!w) return std::nullopt;
    s.footprint.push_back(*w);
  }
  return s;
}

calib::AnnotationSet perturb(const calib::AnnotationSet& a, double sigma, Rng& rng) {
  calib::AnnotationSet out = a;
  auto jitter = [&](std::vector<calib::ImageLine>& lines) {
    for (calib::ImageLine& l : lines) {
      const calib::PixelPoint p{l.a().u + sigma * rng.normal(), l.a().v + sigma * rng.normal()};
      const calib::PixelPoint q{l.b().u + sigma * rng.normal(), l.b().v + sigma * rng.normal()};
      l = calib::ImageLine(p, q);
    }
  };
  jitter(out.vertical_lines);
  jitter(out.parallel_lines);
  jitter(out.perpendicular_pair);
  jitter(out.equal_segments);
  return out;
}

Similarity fit_similarity(const std::vector<calib::WorldPoint>& from,
                          const std::vector<calib::WorldPoint>& to) {
  using C = std::complex<double>;
  const std::size_t n = from.size();
  C mp{}, mq{};
  for (std::size_t i = 0; i < n; ++i) {
    mp += C(from[i].x, from[i].y);
    mq += C(to[i].x, to[i].y);
  }
  mp /= static_cast<double>(n);
  mq /= static_cast<double>(n);
  C num{};
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const C p = C(from[i].x, from[i].y) - mp;
    const C q = C(to[i].x, to[i].y) - mq;
    num += std::conj(p) * q;
    den += std::norm(p);
  }
  Similarity s;
  s.a = num / den;
  s.b = mq - s.a * mp;
  for (std::size_t i = 0; i < n; ++i) {
    const C r = s.a * C(from[i].x, from[i].y) + s.b - C(to[i].x, to[i].y);
    s.max_residual = std::max(s.max_residual, std::abs(r));
  }
  return s;
}

calib::PixelPoint distort(const calib::PixelPoint& p, double k1, double k2, double radius,
                          const calib::PixelPoint& center, double r_max) {
  const double du = p.u - center.u, dv = p.v - center.v;
  const double ru = std::hypot(du, dv) / radius;
  if (ru == 0.0) return p;
  auto f = [&](double r) { return r * (1.0 + k1 * r * r + k2 * r * r * r * r); };
  double lo = 0.0, hi = r_max;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < ru) lo = mid;
    else hi = mid;
  }
  const double rd = 0.5 * (lo + hi);
  const double s = rd / ru;
  return {center.u + du * s, center.v + dv * s};
}

}  // namespace oracle
