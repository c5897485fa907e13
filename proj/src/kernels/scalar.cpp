#include "calib/kernels.hpp"

#include <limits>

namespace calib::kernels {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void project_scalar(const ProjectionParams& p, const double* x,
                    const double* y, const double* z, std::size_t n,
                    double* u, double* v, std::uint8_t* ok) {
  for (std::size_t i = 0; i < n; ++i) {
    double pu, pv;
    if (project_one(p, x[i], y[i], z[i], pu, pv)) {
      u[i] = pu;
      v[i] = pv;
      ok[i] = 1;
    } else {
      u[i] = kNaN;
      v[i] = kNaN;
      ok[i] = 0;
    }
  }
}

void backproject_scalar(const ProjectionParams& p, double height,
                        const double* u, const double* v, std::size_t n,
                        double* x, double* y, std::uint8_t* ok) {
  for (std::size_t i = 0; i < n; ++i) {
    double wx, wy;
    if (backproject_one(p, height, u[i], v[i], wx, wy)) {
      x[i] = wx;
      y[i] = wy;
      ok[i] = 1;
    } else {
      x[i] = kNaN;
      y[i] = kNaN;
      ok[i] = 0;
    }
  }
}

void undistort_scalar(const UndistortParams& p, const double* u,
                      const double* v, std::size_t n, double* uo, double* vo) {
  for (std::size_t i = 0; i < n; ++i) undistort_one(p, u[i], v[i], uo[i], vo[i]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", project_scalar, backproject_scalar,
                                 undistort_scalar};
  return table;
}

}  // namespace calib::kernels
