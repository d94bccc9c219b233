// Levenberg-Marquardt for small dense least-squares problems with analytic
// Jacobians. Minimizes F(x) = ||r(x)||^2.

#ifndef NIEP_OPTIMIZER_HPP
#define NIEP_OPTIMIZER_HPP

#include <functional>

#include <Eigen/Core>

namespace niep {

/// Evaluates residuals r(x) and, when `jacobian` is non-null, dr/dx.
using ResidualFunction = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jacobian)>;

struct LmOptions {
  int max_iters = 2000;
  /// F at or below which the problem counts as solved.
  double target = 1e-16;
  /// Extra iterations spent driving F toward rounding level once solved.
  int polish_iters = 60;
  double initial_damping = 1e-3;
  /// Give up when this many consecutive accepted steps each improve F by a
  /// relative amount below `stall_rel`.
  int stall_window = 60;
  double stall_rel = 1e-9;
};

struct LmResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  bool reached_target = false;
};

/// Called after every iteration with (iteration, objective, x).
using LmObserver = std::function<void(int, double, const Eigen::VectorXd&)>;

LmResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd x0, const LmOptions& opts,
                             const LmObserver& observer = {});

}  // namespace niep

#endif  // NIEP_OPTIMIZER_HPP
