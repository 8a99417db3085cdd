#pragma once

#include <functional>

#include <Eigen/Core>

namespace genheck::numerics {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_pdf(double x);
double log_norm_pdf(double x);
double norm_cdf(double x);

/// log Phi(x), accurate in both tails. Below x = -10 the Laplace continued
/// fraction for the Mills ratio replaces erfc so the result never reaches -inf.
double log_norm_cdf(double x);

/// phi(x) / Phi(x) (the inverse Mills ratio), finite for every finite x.
double inv_mills(double x);

/// Mills ratio Phi(-t) / phi(t) for t >= 0 via the Laplace continued fraction.
double mills_ratio(double t);

double norm_quantile(double p);

/// Upper-tail probability of a chi-square with `df` degrees of freedom.
double chi_square_sf(double x, int df);

struct QuadratureSpec {
  int node_count = 128;
  // The real line is mapped onto (-1, 1) by x = center + scale * atanh(u).
  double center = 0.0;
  double scale = 3.0;
  double abs_tol = 1e-10;
};

/// Integral of f over the real line. The rule is evaluated with node_count and
/// 2 * node_count Gauss-Legendre nodes; the finer value is returned and
/// NonConvergence raised when the two differ by more than abs_tol.
double integrate(const std::function<double(double)>& f,
                 const QuadratureSpec& spec = {});

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Standard central-difference step, cbrt(eps) * max(1, |x|).
double fd_step(double x);

/// Central-difference gradient. h <= 0 selects fd_step per coordinate.
Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                            double h = 0.0);

/// Central-difference Jacobian of a gradient, symmetrized as (J + J^T) / 2.
Eigen::MatrixXd fd_hessian_of_gradient(const VectorField& grad,
                                       const Eigen::VectorXd& x,
                                       double h = 0.0);

}  // namespace genheck::numerics
