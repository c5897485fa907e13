#include "calib/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace calib {

SimplexResult nelder_mead(const Objective& f, std::span<const double> start,
                          std::span<const double> steps,
                          const SimplexOptions& options) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];

  SimplexResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  auto converged = [&] {
    double xs = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) xs = std::max(xs, std::abs(pts[i][j] - pts[0][j]));
    if (xs > options.xtol) return false;
    if (!std::isfinite(vals[n])) return false;
    const double fs = vals[n] - vals[0];
    return fs <= options.ftol_abs + options.ftol_rel * std::abs(vals[0]);
  };

  auto point_along = [&](double t, std::vector<double>& out) {
    // centroid + t * (centroid - worst)
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - pts[n][j]);
  };

  sort_simplex();
  while (result.iterations < options.max_iterations) {
    if (converged()) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
    for (double& c : centroid) c /= static_cast<double>(n);

    point_along(kReflect, trial);
    const double fr = eval(trial);
    if (fr < vals[0]) {
      point_along(kReflect * kExpand, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[n] = trial2;
        vals[n] = fe;
      } else {
        pts[n] = trial;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = trial;
      vals[n] = fr;
    } else {
      bool shrink = false;
      if (fr < vals[n]) {
        point_along(kReflect * kContract, trial2);
        const double fc = eval(trial2);
        if (fc <= fr) {
          pts[n] = trial2;
          vals[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        point_along(-kContract, trial2);
        const double fc = eval(trial2);
        if (fc < vals[n]) {
          pts[n] = trial2;
          vals[n] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            pts[i][j] = pts[0][j] + kShrink * (pts[i][j] - pts[0][j]);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
  }
  if (!result.converged && converged()) result.converged = true;

  result.x = pts[0];
  result.value = vals[0];
  return result;
}

namespace {

double squared_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

}  // namespace

std::optional<LeastSquaresResult> levenberg_marquardt(const ResidualFn& r,
                                                      std::span<const double> start,
                                                      int max_iterations) {
  const std::size_t n = start.size();
  std::vector<double> x(start.begin(), start.end());
  std::optional<std::vector<double>> res = r(x);
  if (!res) return std::nullopt;
  double cost = squared_norm(*res);
  double lambda = 1e-3;
  LeastSquaresResult out;

  for (int it = 0; it < max_iterations && cost > 0.0; ++it) {
    out.iterations = it + 1;
    const std::size_t m = res->size();
    Eigen::MatrixXd J(m, n);
    bool jacobian_ok = true;
    for (std::size_t j = 0; j < n && jacobian_ok; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      std::vector<double> xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto rp = r(xp);
      const auto rm = r(xm);
      if (!rp || !rm) {
        jacobian_ok = false;
        break;
      }
      for (std::size_t i = 0; i < m; ++i) J(i, j) = ((*rp)[i] - (*rm)[i]) / (2.0 * h);
    }
    if (!jacobian_ok) break;
    const Eigen::Map<const Eigen::VectorXd> rv(res->data(), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * rv;

    bool improved = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd dx = A.ldlt().solve(-g);
      std::vector<double> xn = x;
      for (std::size_t j = 0; j < n; ++j) xn[j] += dx[static_cast<Eigen::Index>(j)];
      const auto rn = r(xn);
      const double cn = rn ? squared_norm(*rn) : std::numeric_limits<double>::infinity();
      if (cn < cost) {
        const bool stalled = cost - cn <= 1e-15 * cost;
        x = std::move(xn);
        res = rn;
        cost = cn;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = !stalled;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  out.x = std::move(x);
  out.cost = cost;
  return out;
}

}  // namespace calib
