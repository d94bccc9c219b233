#include "niep/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace niep {

LmResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd x0, const LmOptions& opts,
                             const LmObserver& observer) {
  LmResult out;
  out.x = std::move(x0);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  fn(out.x, r, &jac);
  double f = r.squaredNorm();

  double mu = opts.initial_damping;
  double nu = 2.0;
  int stalled = 0;
  int polishing = 0;
  Eigen::VectorXd r_try;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.iterations = iter + 1;
    if (f == 0.0) break;
    if (f <= opts.target && polishing++ >= opts.polish_iters) break;

    const Eigen::VectorXd grad = jac.transpose() * r;
    Eigen::MatrixXd normal = jac.transpose() * jac;
    const double diag_scale = std::max(normal.diagonal().maxCoeff(), 1e-300);
    normal.diagonal().array() += mu * diag_scale;
    const Eigen::VectorXd step = normal.ldlt().solve(-grad);
    if (!step.allFinite()) break;

    const Eigen::VectorXd x_try = out.x + step;
    fn(x_try, r_try, nullptr);
    const double f_try = r_try.squaredNorm();
    // Gain ratio against the linear model's predicted decrease.
    const double predicted = -(2.0 * step.dot(grad) + (jac * step).squaredNorm());
    const double rho = predicted > 0.0 ? (f - f_try) / predicted : -1.0;

    if (f_try < f && std::isfinite(f_try)) {
      const double rel = (f - f_try) / f;
      out.x = x_try;
      fn(out.x, r, &jac);
      f = r.squaredNorm();
      stalled = rel < opts.stall_rel ? stalled + 1 : 0;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * std::clamp(rho, 0.0, 1.0) - 1.0, 3));
      mu = std::max(mu, 1e-15);
      nu = 2.0;
      if (stalled >= opts.stall_window) break;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e16) break;
    }
    if (observer) observer(iter, f, out.x);
  }
  out.objective = f;
  out.reached_target = f <= opts.target;
  return out;
}

}  // namespace niep
