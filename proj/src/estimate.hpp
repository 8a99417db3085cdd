#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "model.hpp"

namespace genheck {

enum class ModelKind { kGeneralized, kClassic };

enum class FitStatus { kConverged, kNonConvergence, kSingularInformation };

const char* to_string(ModelKind kind);
const char* to_string(FitStatus status);

struct FitOptions {
  int max_iter = 500;
  // Sup-norm bound on the score. Unset means 1e-6 * max(1, |loglik(start)| / n).
  std::optional<double> grad_tol;
  double step_tol = 1e-10;
  // Newton refinements on the observed information after BFGS stops short
  // of grad_tol.
  int polish_steps = 8;
  std::optional<Theta> start;
};

struct FitResult {
  ModelKind kind = ModelKind::kGeneralized;
  Theta theta_hat;
  double loglik = 0.0;
  Eigen::MatrixXd hessian;     // at theta_hat
  Eigen::MatrixXd covariance;  // inverse observed information
  Eigen::VectorXd std_errors;
  bool converged = false;
  FitStatus status = FitStatus::kNonConvergence;
  std::string detail;
  int iterations = 0;
  double grad_norm = 0.0;
  double grad_tol = 0.0;
  bool boundary_warning = false;
  Eigen::Index n = 0;
  Eigen::Index n_selected = 0;
  DesignNames names;

  BlockSizes sizes() const { return theta_hat.sizes(); }
};

/// Maximum-likelihood fit of the model on `data` as given. Non-convergence and
/// a singular observed information are reported through `status`; invalid
/// inputs throw.
FitResult fit(const Dataset& data, const FitOptions& options = {});

/// Fit with the dispersion and correlation designs replaced by intercepts.
FitResult fit_classic(const Dataset& data, const FitOptions& options = {});

/// Same data with E and V reduced to intercept columns (dropped when the
/// original block is empty).
Dataset classic_design(const Dataset& data);

/// Starting values: beta and gamma from the classic fit, dispersion and
/// correlation coefficients matching the classic constants.
Theta init_theta(const Dataset& data);

/// Probit MLE of u on W by Newton iterations.
Eigen::VectorXd probit_fit(const Eigen::MatrixXd& W, const Eigen::VectorXi& u);

struct SummaryRow {
  std::string equation;
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double z_value = 0.0;
  double p_value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Wald-type coefficient table with level-confidence intervals; throws
/// NotConverged on a failed fit.
std::vector<SummaryRow> summary(const FitResult& fit, double level = 0.95);

/// Two-sided normal p-value for a z statistic.
double two_sided_p(double z);

void require_converged(const FitResult& fit);

/// Throws MissingCensoring or ValueError when the selection pattern leaves
/// the model unidentified.
void require_censoring(const Dataset& data);

}  // namespace genheck
