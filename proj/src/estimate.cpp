#include "estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "error.hpp"
#include "numerics.hpp"
#include "optimize.hpp"

namespace genheck {

using numerics::inv_mills;
using numerics::log_norm_cdf;

const char* to_string(ModelKind kind) {
  return kind == ModelKind::kClassic ? "classic" : "generalized";
}

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kNonConvergence: return "NonConvergence";
    case FitStatus::kSingularInformation: return "SingularInformation";
  }
  return "unknown";
}

namespace {

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool is_intercept(const Eigen::MatrixXd& m) {
  return m.cols() > 0 && (m.col(0).array() == 1.0).all();
}

// Coefficients whose linear predictor best matches the constant `level`.
Eigen::VectorXd constant_predictor(const Eigen::MatrixXd& design, double level) {
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(design.cols());
  if (design.cols() == 0) return coef;
  if (is_intercept(design)) {
    coef[0] = level;
    return coef;
  }
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(design.rows(), level);
  return design.colPivHouseholderQr().solve(target);
}

Theta classic_start(const Dataset& data) {
  const BlockSizes b = data.sizes();
  Theta start = Theta::zeros(b);
  start.gamma = probit_fit(data.W, data.u);

  const Eigen::Index m = data.n_selected();
  Eigen::MatrixXd xs(m, b.p);
  Eigen::VectorXd ys(m);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.u[i] != 1) continue;
    xs.row(k) = data.X.row(i);
    ys[k] = data.y[i];
    ++k;
  }
  if (b.p > 0) start.beta = xs.colPivHouseholderQr().solve(ys);
  const Eigen::VectorXd resid = ys - xs * start.beta;
  const double dof = std::max<double>(1.0, static_cast<double>(m - b.p));
  const double sd = std::sqrt(resid.squaredNorm() / dof);
  start.lambda = constant_predictor(data.E, std::log(sd > 0.0 ? sd : 1.0));
  return start;
}

// Newton refinement on the observed information; used when BFGS stops on
// rounding noise before reaching the score tolerance.
void polish(Eigen::VectorXd& x, double& value, Eigen::VectorXd& grad, const Dataset& data,
            const BlockSizes& b, double grad_tol, int max_steps) {
  for (int step = 0; step < max_steps; ++step) {
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= grad_tol) return;
    const Theta theta = Theta::unflatten(x, b);
    const Eigen::MatrixXd info = -hessian(theta, data);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return;
    const Eigen::VectorXd candidate = x + llt.solve(grad);
    const Theta next = Theta::unflatten(candidate, b);
    const double next_value = loglik(next, data);
    const Eigen::VectorXd next_grad = score(next, data);
    if (!std::isfinite(next_value) ||
        next_value < value - 1e-10 * (1.0 + std::abs(value)) ||
        next_grad.lpNorm<Eigen::Infinity>() >= gnorm) {
      return;
    }
    x = candidate;
    value = next_value;
    grad = next_grad;
  }
}

}  // namespace

void require_censoring(const Dataset& data) {
  const Eigen::Index selected = data.n_selected();
  if (selected == data.n()) {
    throw Error(ErrorCode::kMissingCensoring,
                "every observation is selected; the selection equation is unidentified");
  }
  if (selected == 0) {
    throw Error(ErrorCode::kValueError, "no observation is selected");
  }
}

void require_converged(const FitResult& fit) {
  if (!fit.converged) {
    throw Error(ErrorCode::kNotConverged,
                std::string("fit did not converge: ") + to_string(fit.status) +
                    (fit.detail.empty() ? "" : " (" + fit.detail + ")"));
  }
}

Eigen::VectorXd probit_fit(const Eigen::MatrixXd& W, const Eigen::VectorXi& u) {
  const Eigen::Index q = W.cols();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(q);
  if (q == 0) return gamma;
  auto objective = [&](const Eigen::VectorXd& g) {
    const Eigen::VectorXd mu = W * g;
    double total = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      total += log_norm_cdf(u[i] == 1 ? mu[i] : -mu[i]);
    }
    return total;
  };
  double value = objective(gamma);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd mu = W * gamma;
    Eigen::VectorXd d1(mu.size());
    Eigen::VectorXd weight(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const double sign = u[i] == 1 ? 1.0 : -1.0;
      const double lam = inv_mills(sign * mu[i]);
      d1[i] = sign * lam;
      weight[i] = lam * (lam + sign * mu[i]);
    }
    const Eigen::VectorXd grad = W.transpose() * d1;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10 * std::max<double>(1.0, mu.size())) break;
    const Eigen::MatrixXd info = W.transpose() * weight.asDiagonal() * W;
    const Eigen::VectorXd step = info.completeOrthogonalDecomposition().solve(grad);
    double scale = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half, scale *= 0.5) {
      const Eigen::VectorXd trial = gamma + scale * step;
      const double trial_value = objective(trial);
      if (std::isfinite(trial_value) && trial_value >= value) {
        gamma = trial;
        value = trial_value;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return gamma;
}

Dataset classic_design(const Dataset& data) {
  Dataset out = data;
  const Eigen::Index n = data.n();
  const Eigen::Index r = data.E.cols() > 0 ? 1 : 0;
  const Eigen::Index s = data.V.cols() > 0 ? 1 : 0;
  out.E = Eigen::MatrixXd::Ones(n, r);
  out.V = Eigen::MatrixXd::Ones(n, s);
  out.names.dispersion.assign(r, "(Intercept)");
  out.names.correlation.assign(s, "(Intercept)");
  return out;
}

FitResult fit_classic(const Dataset& data, const FitOptions& options) {
  const Dataset reduced = classic_design(data);
  require_censoring(reduced);
  FitOptions opts = options;
  if (!opts.start) opts.start = classic_start(reduced);
  FitResult res = fit(reduced, opts);
  res.kind = ModelKind::kClassic;
  return res;
}

Theta init_theta(const Dataset& data) {
  const FitResult classic = fit_classic(data);
  Theta start;
  start.beta = classic.theta_hat.beta;
  start.gamma = classic.theta_hat.gamma;
  start.lambda = constant_predictor(
      data.E, classic.theta_hat.lambda.size() > 0 ? classic.theta_hat.lambda[0] : 0.0);
  start.kappa = constant_predictor(
      data.V, classic.theta_hat.kappa.size() > 0 ? classic.theta_hat.kappa[0] : 0.0);
  return start;
}

FitResult fit(const Dataset& data, const FitOptions& options) {
  require_censoring(data);
  const BlockSizes b = data.sizes();
  if (b.total() >= data.n()) {
    throw Error(ErrorCode::kInvalidArgument,
                "model has " + std::to_string(b.total()) + " parameters for " +
                    std::to_string(data.n()) + " observations");
  }
  if (options.max_iter < 1 || !(options.step_tol > 0.0) ||
      (options.grad_tol && !(*options.grad_tol > 0.0))) {
    throw Error(ErrorCode::kInvalidArgument, "fit options need max_iter >= 1 and tolerances > 0");
  }

  const Theta start = options.start ? *options.start : init_theta(data);
  if (start.sizes() != b) {
    throw Error(ErrorCode::kDimensionMismatch, "starting values do not match the designs");
  }

  FitResult res;
  res.n = data.n();
  res.n_selected = data.n_selected();
  res.names = data.names;

  const double start_value = loglik(start, data);
  res.grad_tol = options.grad_tol.value_or(
      1e-6 * std::max(1.0, std::abs(start_value) / static_cast<double>(data.n())));

  optimize::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Theta theta = Theta::unflatten(x, b);
    const double value = loglik(theta, data);
    if (grad) *grad = -score(theta, data);
    return -value;
  };
  optimize::BfgsOptions bfgs;
  bfgs.max_iter = options.max_iter;
  bfgs.grad_tol = res.grad_tol;
  bfgs.step_tol = options.step_tol;
  const optimize::BfgsResult opt = optimize::minimize_bfgs(objective, start.flatten(), bfgs);

  Eigen::VectorXd x = opt.x;
  double value = -opt.value;
  Eigen::VectorXd grad = -opt.grad;
  if (std::isfinite(value)) polish(x, value, grad, data, b, res.grad_tol, options.polish_steps);

  res.theta_hat = Theta::unflatten(x, b);
  res.loglik = value;
  res.iterations = opt.iterations;
  res.grad_norm = grad.lpNorm<Eigen::Infinity>();
  res.boundary_warning = predictors(res.theta_hat, data).clamped;

  const Eigen::Index d = b.total();
  res.covariance = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
  res.std_errors = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  if (!std::isfinite(value)) {
    res.status = FitStatus::kNonConvergence;
    res.detail = opt.stop_reason;
    return res;
  }

  res.hessian = hessian(res.theta_hat, data);
  const Eigen::MatrixXd info = -res.hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
  const double max_eig = eig.eigenvalues().maxCoeff();
  const double min_eig = eig.eigenvalues().minCoeff();
  const bool stationary = res.grad_norm <= res.grad_tol;
  if (!stationary) {
    res.status = FitStatus::kNonConvergence;
    res.detail = opt.stop_reason + ", score sup-norm " + format_g(res.grad_norm);
  }
  if (!(min_eig > 1e-8 * std::max(1.0, max_eig))) {
    if (stationary) {
      res.status = FitStatus::kSingularInformation;
      res.detail = "observed information has smallest eigenvalue " + format_g(min_eig);
    }
    return res;
  }
  res.covariance = info.llt().solve(Eigen::MatrixXd::Identity(d, d));
  res.covariance = 0.5 * (res.covariance + res.covariance.transpose());
  res.std_errors = res.covariance.diagonal().cwiseSqrt();
  if (stationary) {
    res.status = FitStatus::kConverged;
    res.converged = true;
  }
  return res;
}

double two_sided_p(double z) {
  if (!std::isfinite(z)) return std::isnan(z) ? z : 0.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::vector<SummaryRow> summary(const FitResult& fit, double level) {
  require_converged(fit);
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence level must lie in (0, 1)");
  }
  const double q = numerics::norm_quantile(0.5 * (1.0 + level));
  static const char* equations[] = {"outcome", "selection", "dispersion", "correlation"};
  const BlockSizes b = fit.sizes();
  const Eigen::Index counts[] = {b.p, b.q, b.r, b.s};
  Dataset labels;
  labels.names = fit.names;
  const Eigen::VectorXd est = fit.theta_hat.flatten();
  std::vector<SummaryRow> rows;
  Eigen::Index j = 0;
  for (int block = 0; block < 4; ++block) {
    for (Eigen::Index c = 0; c < counts[block]; ++c, ++j) {
      SummaryRow row;
      row.equation = equations[block];
      row.name = labels.column_name(block, c);
      row.estimate = est[j];
      row.std_error = fit.std_errors[j];
      row.z_value = row.estimate / row.std_error;
      row.p_value = row.estimate == 0.0 ? 1.0 : two_sided_p(row.z_value);
      row.ci_low = row.estimate - q * row.std_error;
      row.ci_high = row.estimate + q * row.std_error;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace genheck
