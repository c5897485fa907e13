#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Batch projection and undistortion kernels over structure-of-arrays input.
//
// Every kernel exists as a portable scalar reference and, on x86-64, as an
// AVX2 variant. Both perform the same IEEE operations in the same order (no
// FMA contraction), so their outputs are bit-identical; the AVX2 variant only
// changes throughput. The active table is picked once at first use from the
// CPU feature flags and can be pinned to the scalar path by setting
// CALIB_SIMD=scalar in the environment.

namespace calib::kernels {

/// Camera depth at or below which a point counts as behind the camera (m).
inline constexpr double kMinDepth = 1e-9;
/// |ray_z| <= kParallelTol * |ray| is treated as parallel to a horizontal plane.
inline constexpr double kParallelTol = 1e-12;

/// Flattened pinhole parameters.
/// rot is the row-major world-to-camera rotation (camera axes: x right,
/// y down, z forward), center the projection center in world coordinates.
struct ProjectionParams {
  double rot[9];
  double center[3];
  double focal;
  double pu;
  double pv;
};

struct UndistortParams {
  double k1;
  double k2;
  double cu;
  double cv;
  double inv_radius_sq;  // 1 / normalization_radius^2
};

using ProjectFn = void (*)(const ProjectionParams& p, const double* x,
                           const double* y, const double* z, std::size_t n,
                           double* u, double* v, std::uint8_t* ok);
using BackprojectFn = void (*)(const ProjectionParams& p, double height,
                               const double* u, const double* v, std::size_t n,
                               double* x, double* y, std::uint8_t* ok);
using UndistortFn = void (*)(const UndistortParams& p, const double* u,
                             const double* v, std::size_t n, double* uo,
                             double* vo);

struct KernelTable {
  std::string_view name;
  ProjectFn project;
  BackprojectFn backproject;
  UndistortFn undistort;
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();
const KernelTable& active_table();

// Per-point reference math shared by the scalar kernels and the single-point
// camera functions.

inline bool project_one(const ProjectionParams& p, double x, double y,
                        double z, double& u, double& v) {
  const double dx = x - p.center[0];
  const double dy = y - p.center[1];
  const double dz = z - p.center[2];
  const double xc = p.rot[0] * dx + p.rot[1] * dy + p.rot[2] * dz;
  const double yc = p.rot[3] * dx + p.rot[4] * dy + p.rot[5] * dz;
  const double zc = p.rot[6] * dx + p.rot[7] * dy + p.rot[8] * dz;
  if (!(zc > kMinDepth)) return false;
  u = p.pu + p.focal * xc / zc;
  v = p.pv + p.focal * yc / zc;
  return true;
}

inline bool backproject_one(const ProjectionParams& p, double height,
                            double u, double v, double& x, double& y) {
  const double a = (u - p.pu) / p.focal;
  const double b = (v - p.pv) / p.focal;
  // Ray direction in world coordinates: rot^T * (a, b, 1).
  const double rx = p.rot[0] * a + p.rot[3] * b + p.rot[6];
  const double ry = p.rot[1] * a + p.rot[4] * b + p.rot[7];
  const double rz = p.rot[2] * a + p.rot[5] * b + p.rot[8];
  const double norm_sq = rx * rx + ry * ry + rz * rz;
  if (!(rz * rz > kParallelTol * kParallelTol * norm_sq)) return false;
  // The camera-frame depth along this ray equals t.
  const double t = (height - p.center[2]) / rz;
  if (!(t > kMinDepth)) return false;
  x = p.center[0] + t * rx;
  y = p.center[1] + t * ry;
  return true;
}

inline void undistort_one(const UndistortParams& p, double u, double v,
                          double& uo, double& vo) {
  const double du = u - p.cu;
  const double dv = v - p.cv;
  const double r2 = (du * du + dv * dv) * p.inv_radius_sq;
  const double s = 1.0 + r2 * (p.k1 + r2 * p.k2);
  uo = p.cu + du * s;
  vo = p.cv + dv * s;
}

// Span front-ends over the active table. Invalid outputs are NaN with ok = 0.

void project(const ProjectionParams& p, std::span<const double> x,
             std::span<const double> y, std::span<const double> z,
             std::span<double> u, std::span<double> v,
             std::span<std::uint8_t> ok);

void backproject(const ProjectionParams& p, double height,
                 std::span<const double> u, std::span<const double> v,
                 std::span<double> x, std::span<double> y,
                 std::span<std::uint8_t> ok);

void undistort(const UndistortParams& p, std::span<const double> u,
               std::span<const double> v, std::span<double> uo,
               std::span<double> vo);

}  // namespace calib::kernels
