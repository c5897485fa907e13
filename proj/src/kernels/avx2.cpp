// Built with -mavx2 and without FMA so each lane repeats the scalar
// reference operation sequence exactly.
#include "calib/kernels.hpp"

#include <immintrin.h>

#include <cstring>

namespace calib::kernels {
namespace {

inline void store_mask(__m256d mask, std::uint8_t* ok) {
  const int bits = _mm256_movemask_pd(mask);
  for (int j = 0; j < 4; ++j) ok[j] = static_cast<std::uint8_t>((bits >> j) & 1);
}

void project_avx2(const ProjectionParams& p, const double* x, const double* y,
                  const double* z, std::size_t n, double* u, double* v,
                  std::uint8_t* ok) {
  const __m256d r0 = _mm256_set1_pd(p.rot[0]), r1 = _mm256_set1_pd(p.rot[1]),
                r2 = _mm256_set1_pd(p.rot[2]), r3 = _mm256_set1_pd(p.rot[3]),
                r4 = _mm256_set1_pd(p.rot[4]), r5 = _mm256_set1_pd(p.rot[5]),
                r6 = _mm256_set1_pd(p.rot[6]), r7 = _mm256_set1_pd(p.rot[7]),
                r8 = _mm256_set1_pd(p.rot[8]);
  const __m256d cx = _mm256_set1_pd(p.center[0]);
  const __m256d cy = _mm256_set1_pd(p.center[1]);
  const __m256d cz = _mm256_set1_pd(p.center[2]);
  const __m256d f = _mm256_set1_pd(p.focal);
  const __m256d pu = _mm256_set1_pd(p.pu);
  const __m256d pv = _mm256_set1_pd(p.pv);
  const __m256d min_depth = _mm256_set1_pd(kMinDepth);
  const __m256d nan = _mm256_set1_pd(__builtin_nan(""));

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), cx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), cy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(z + i), cz);
    const __m256d xc = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r0, dx), _mm256_mul_pd(r1, dy)),
        _mm256_mul_pd(r2, dz));
    const __m256d yc = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r3, dx), _mm256_mul_pd(r4, dy)),
        _mm256_mul_pd(r5, dz));
    const __m256d zc = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r6, dx), _mm256_mul_pd(r7, dy)),
        _mm256_mul_pd(r8, dz));
    const __m256d valid = _mm256_cmp_pd(zc, min_depth, _CMP_GT_OQ);
    const __m256d uu =
        _mm256_add_pd(pu, _mm256_div_pd(_mm256_mul_pd(f, xc), zc));
    const __m256d vv =
        _mm256_add_pd(pv, _mm256_div_pd(_mm256_mul_pd(f, yc), zc));
    _mm256_storeu_pd(u + i, _mm256_blendv_pd(nan, uu, valid));
    _mm256_storeu_pd(v + i, _mm256_blendv_pd(nan, vv, valid));
    store_mask(valid, ok + i);
  }
  if (i < n) scalar_table().project(p, x + i, y + i, z + i, n - i, u + i, v + i, ok + i);
}

void backproject_avx2(const ProjectionParams& p, double height,
                      const double* u, const double* v, std::size_t n,
                      double* x, double* y, std::uint8_t* ok) {
  const __m256d r0 = _mm256_set1_pd(p.rot[0]), r1 = _mm256_set1_pd(p.rot[1]),
                r2 = _mm256_set1_pd(p.rot[2]), r3 = _mm256_set1_pd(p.rot[3]),
                r4 = _mm256_set1_pd(p.rot[4]), r5 = _mm256_set1_pd(p.rot[5]),
                r6 = _mm256_set1_pd(p.rot[6]), r7 = _mm256_set1_pd(p.rot[7]),
                r8 = _mm256_set1_pd(p.rot[8]);
  const __m256d cx = _mm256_set1_pd(p.center[0]);
  const __m256d cy = _mm256_set1_pd(p.center[1]);
  const __m256d dh = _mm256_set1_pd(height - p.center[2]);
  const __m256d f = _mm256_set1_pd(p.focal);
  const __m256d pu = _mm256_set1_pd(p.pu);
  const __m256d pv = _mm256_set1_pd(p.pv);
  const __m256d par_tol = _mm256_set1_pd(kParallelTol * kParallelTol);
  const __m256d min_depth = _mm256_set1_pd(kMinDepth);
  const __m256d nan = _mm256_set1_pd(__builtin_nan(""));

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(u + i), pu), f);
    const __m256d b = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), pv), f);
    const __m256d rx = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r0, a), _mm256_mul_pd(r3, b)), r6);
    const __m256d ry = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r1, a), _mm256_mul_pd(r4, b)), r7);
    const __m256d rz = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(r2, a), _mm256_mul_pd(r5, b)), r8);
    const __m256d norm_sq = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry)),
        _mm256_mul_pd(rz, rz));
    const __m256d not_parallel = _mm256_cmp_pd(
        _mm256_mul_pd(rz, rz), _mm256_mul_pd(par_tol, norm_sq), _CMP_GT_OQ);
    const __m256d t = _mm256_div_pd(dh, rz);
    const __m256d in_front = _mm256_cmp_pd(t, min_depth, _CMP_GT_OQ);
    const __m256d valid = _mm256_and_pd(not_parallel, in_front);
    const __m256d wx = _mm256_add_pd(cx, _mm256_mul_pd(t, rx));
    const __m256d wy = _mm256_add_pd(cy, _mm256_mul_pd(t, ry));
    _mm256_storeu_pd(x + i, _mm256_blendv_pd(nan, wx, valid));
    _mm256_storeu_pd(y + i, _mm256_blendv_pd(nan, wy, valid));
    store_mask(valid, ok + i);
  }
  if (i < n) scalar_table().backproject(p, height, u + i, v + i, n - i, x + i, y + i, ok + i);
}

void undistort_avx2(const UndistortParams& p, const double* u, const double* v,
                    std::size_t n, double* uo, double* vo) {
  const __m256d cu = _mm256_set1_pd(p.cu);
  const __m256d cv = _mm256_set1_pd(p.cv);
  const __m256d inv = _mm256_set1_pd(p.inv_radius_sq);
  const __m256d k1 = _mm256_set1_pd(p.k1);
  const __m256d k2 = _mm256_set1_pd(p.k2);
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d du = _mm256_sub_pd(_mm256_loadu_pd(u + i), cu);
    const __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(v + i), cv);
    const __m256d r2 = _mm256_mul_pd(
        _mm256_add_pd(_mm256_mul_pd(du, du), _mm256_mul_pd(dv, dv)), inv);
    const __m256d s = _mm256_add_pd(
        one, _mm256_mul_pd(r2, _mm256_add_pd(k1, _mm256_mul_pd(r2, k2))));
    _mm256_storeu_pd(uo + i, _mm256_add_pd(cu, _mm256_mul_pd(du, s)));
    _mm256_storeu_pd(vo + i, _mm256_add_pd(cv, _mm256_mul_pd(dv, s)));
  }
  if (i < n) scalar_table().undistort(p, u + i, v + i, n - i, uo + i, vo + i);
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{"avx2", project_avx2, backproject_avx2,
                                 undistort_avx2};
  return table;
}

}  // namespace calib::kernels
