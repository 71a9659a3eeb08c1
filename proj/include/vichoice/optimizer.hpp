#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "vichoice/linalg.hpp"

namespace vichoice {

struct LineSearchSettings {
  double shrink = 0.5;
  double sufficient_increase = 1e-4;  // Armijo constant
  int max_halvings = 60;
};

struct OptimizeSettings {
  double grad_tol = 1e-6;  // sup-norm of the gradient
  int max_iters = 200;
  LineSearchSettings line_search;

  void validate() const;
};

// Stalled: the line search failed while the predicted increase was below
// the floating-point resolution of the objective.
enum class OptimizeStatus { Converged, Stalled, MaxIterations };

std::string_view to_string(OptimizeStatus status);

/// Smooth objective to be maximized. `value` returns f(x) and, when `grad`
/// is non-null, writes the gradient. Points outside the domain should return
/// -inf or NaN; the line search treats them as rejected trials. `hessian` is
/// optional; when present Newton directions are used.
struct SmoothObjective {
  std::function<double(const VectorXd& x, VectorXd* grad)> value;
  std::function<MatrixXd(const VectorXd& x)> hessian;
};

struct OptimizeResult {
  VectorXd argmax;
  double value = 0.0;
  VectorXd gradient;
  int iterations = 0;
  OptimizeStatus status = OptimizeStatus::MaxIterations;
  std::vector<double> value_trace;  // objective at init and every accepted step

  bool converged() const { return status == OptimizeStatus::Converged; }
};

/// Ascent with Armijo backtracking. Uses Newton directions when a Hessian
/// is supplied (falling back to the gradient if the Newton step is not an
/// ascent direction) and BFGS otherwise. BFGS updates are skipped when the
/// curvature condition s'y > 0 fails.
///
/// Throws OptimizerError if f(init) is not finite or the line search fails
/// to find an acceptable step within `max_halvings` halvings (unless the
/// failure is at rounding level, which ends with status Stalled).
OptimizeResult maximize(const SmoothObjective& objective, const VectorXd& init,
                        const OptimizeSettings& settings = {});

}  // namespace vichoice
