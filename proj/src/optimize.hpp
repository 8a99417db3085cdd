#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace genheck::optimize {

/// Objective to minimize. Fills `grad` when it is non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;   // sup-norm of the gradient
  double step_tol = 1e-10;  // relative sup-norm step
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_evals = 40;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// BFGS on the inverse Hessian with a strong-Wolfe line search. The initial
/// inverse Hessian is the identity scaled by 1 / ||grad(x0)||.
BfgsResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

}  // namespace genheck::optimize
