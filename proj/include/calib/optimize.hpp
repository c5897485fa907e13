#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace calib {

struct SimplexOptions {
  int max_iterations = 2000;
  /// Stop once every vertex is within xtol of the best one (per coordinate)
  double xtol = 1e-10;
  /// ...and the objective spread is below ftol_abs + ftol_rel * |f_best|.
  double ftol_abs = 1e-18;
  double ftol_rel = 1e-12;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free Nelder-Mead minimization. The objective may return
/// +infinity for infeasible points; such vertices are contracted away.
/// `steps` gives the initial simplex edge along each coordinate.
SimplexResult nelder_mead(const Objective& f, std::span<const double> start,
                          std::span<const double> steps,
                          const SimplexOptions& options = {});

/// Residual vector at x, or nullopt where the model is undefined.
using ResidualFn = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

struct LeastSquaresResult {
  std::vector<double> x;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
};

/// Levenberg-Marquardt with a central-difference Jacobian. Steps that leave
/// the domain of `r` are rejected like uphill steps. Returns nullopt when
/// `r` is undefined at the start.
std::optional<LeastSquaresResult> levenberg_marquardt(const ResidualFn& r,
                                                      std::span<const double> start,
                                                      int max_iterations = 100);

}  // namespace calib
