#include <cassert>
#include <cstdlib>
#include <string_view>

#include "calib/kernels.hpp"

namespace calib::kernels {

#if defined(CALIB_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(CALIB_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_table() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* env = std::getenv("CALIB_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return table;
}

void project(const ProjectionParams& p, std::span<const double> x,
             std::span<const double> y, std::span<const double> z,
             std::span<double> u, std::span<double> v,
             std::span<std::uint8_t> ok) {
  const std::size_t n = x.size();
  assert(y.size() == n && z.size() == n && u.size() >= n && v.size() >= n &&
         ok.size() >= n);
  active_table().project(p, x.data(), y.data(), z.data(), n, u.data(),
                         v.data(), ok.data());
}

void backproject(const ProjectionParams& p, double height,
                 std::span<const double> u, std::span<const double> v,
                 std::span<double> x, std::span<double> y,
                 std::span<std::uint8_t> ok) {
  const std::size_t n = u.size();
  assert(v.size() == n && x.size() >= n && y.size() >= n && ok.size() >= n);
  active_table().backproject(p, height, u.data(), v.data(), n, x.data(),
                             y.data(), ok.data());
}

void undistort(const UndistortParams& p, std::span<const double> u,
               std::span<const double> v, std::span<double> uo,
               std::span<double> vo) {
  const std::size_t n = u.size();
  assert(v.size() == n && uo.size() >= n && vo.size() >= n);
  active_table().undistort(p, u.data(), v.data(), n, uo.data(), vo.data());
}

}  // namespace calib::kernels
