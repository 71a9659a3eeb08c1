#include "vichoice/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vichoice/errors.hpp"

namespace vichoice {

namespace {

constexpr double kStallRelSlope = 1e-10;

}  // namespace

void OptimizeSettings::validate() const {
  if (!(grad_tol > 0.0)) throw ValidationError("grad_tol", "must be positive");
  if (max_iters < 1) throw ValidationError("max_iters", "must be positive");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw ValidationError("line_search.shrink", "must lie in (0, 1)");
  }
  if (!(line_search.sufficient_increase > 0.0 && line_search.sufficient_increase < 1.0)) {
    throw ValidationError("line_search.sufficient_increase", "must lie in (0, 1)");
  }
  if (line_search.max_halvings < 1) throw ValidationError("line_search.max_halvings", "must be positive");
}

std::string_view to_string(OptimizeStatus status) {
  switch (status) {
    case OptimizeStatus::Converged: return "converged";
    case OptimizeStatus::Stalled: return "stalled";
    case OptimizeStatus::MaxIterations: return "max_iterations";
  }
  return "?";
}

OptimizeResult maximize(const SmoothObjective& objective, const VectorXd& init,
                        const OptimizeSettings& settings) {
  settings.validate();
  const auto n = init.size();

  OptimizeResult res;
  res.argmax = init;
  res.gradient.resize(n);
  if (!init.allFinite()) throw OptimizerError("initial point is not finite");
  res.value = objective.value(res.argmax, &res.gradient);
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    throw OptimizerError("objective is not finite at the initial point");
  }
  res.value_trace.push_back(res.value);

  const bool newton = static_cast<bool>(objective.hessian);
  MatrixXd inv_hess = MatrixXd::Identity(n, n);  // approximates (-Hessian)^-1
  bool scaled = false;

  VectorXd x_new(n), g_new(n), dir(n);
  for (int iter = 0; iter < settings.max_iters; ++iter) {
    if (res.gradient.lpNorm<Eigen::Infinity>() <= settings.grad_tol) {
      res.status = OptimizeStatus::Converged;
      return res;
    }
    const VectorXd& g = res.gradient;

    if (newton) {
      const MatrixXd neg_hess = -objective.hessian(res.argmax);
      Eigen::LLT<MatrixXd> llt(neg_hess);
      bool ok = llt.info() == Eigen::Success;
      if (ok) {
        dir = llt.solve(g);
        ok = dir.allFinite() && g.dot(dir) > 0.0;
      }
      if (!ok) dir = g;
    } else {
      dir = inv_hess * g;
      if (!(g.dot(dir) > 0.0)) {
        inv_hess.setIdentity();
        scaled = false;
        dir = g;
      }
    }

    const double slope = g.dot(dir);
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k <= settings.line_search.max_halvings; ++k) {
      x_new = res.argmax + step * dir;
      if (x_new == res.argmax) break;
      f_new = objective.value(x_new, &g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new >= res.value + settings.line_search.sufficient_increase * step * slope) {
        accepted = true;
        break;
      }
      step *= settings.line_search.shrink;
    }
    if (!accepted) {
      // Predicted increase below the resolution of f: nothing left to gain.
      if (slope <= kStallRelSlope * std::max(1.0, std::abs(res.value))) {
        res.status = OptimizeStatus::Stalled;
        return res;
      }
      throw OptimizerError("line search failed after " +
                           std::to_string(settings.line_search.max_halvings) +
                           " halvings (gradient sup-norm " +
                           std::to_string(g.lpNorm<Eigen::Infinity>()) + ")");
    }

    if (!newton) {
      const VectorXd s = x_new - res.argmax;
      const VectorXd y = g - g_new;  // gradient change of the minimization problem -f
      const double sy = s.dot(y);
      if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
        if (!scaled) {
          inv_hess = (sy / y.squaredNorm()) * MatrixXd::Identity(n, n);
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const VectorXd hy = inv_hess * y;
        // (I - rho s y') H (I - rho y s') + rho s s'
        inv_hess += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                    rho * (hy * s.transpose() + s * hy.transpose());
      }
    }

    res.argmax = x_new;
    res.value = f_new;
    res.gradient = g_new;
    res.iterations = iter + 1;
    res.value_trace.push_back(f_new);
  }
  if (res.gradient.lpNorm<Eigen::Infinity>() <= settings.grad_tol) {
    res.status = OptimizeStatus::Converged;
  }
  return res;
}

}  // namespace vichoice
