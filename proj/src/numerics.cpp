#include "numerics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "error.hpp"

namespace genheck::numerics {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTailSwitch = -10.0;

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule make_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

std::shared_ptr<const GaussLegendreRule> gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussLegendreRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaussLegendreRule>(make_gauss_legendre(n));
  return slot;
}

double apply_rule(const GaussLegendreRule& rule,
                  const std::function<double(double)>& f,
                  const QuadratureSpec& spec) {
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double u = rule.nodes[k];
    const double jac = spec.scale / ((1.0 - u) * (1.0 + u));
    const double value = f(spec.center + spec.scale * std::atanh(u));
    sum += rule.weights[k] * jac * value;
  }
  return sum;
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_norm_pdf(double x) { return -kLogSqrt2Pi - 0.5 * x * x; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double mills_ratio(double t) {
  if (t < 0.0) {
    throw Error(ErrorCode::kDomainError, "mills_ratio: argument must be >= 0");
  }
  if (t < -kTailSwitch) {
    return std::exp(std::log(0.5 * std::erfc(t * kInvSqrt2)) - log_norm_pdf(t));
  }
  // Modified Lentz evaluation of t + 1/(t + 2/(t + 3/(t + ...))).
  constexpr double tiny = 1e-300;
  double f = t;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 10000; ++k) {
    d = t + k * d;
    if (d == 0.0) d = tiny;
    c = t + k / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

double log_norm_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x >= kTailSwitch) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return log_norm_pdf(x) + std::log(mills_ratio(-x));
}

double inv_mills(double x) {
  if (x < kTailSwitch) return 1.0 / mills_ratio(-x);
  return std::exp(log_norm_pdf(x) - log_norm_cdf(x));
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kDomainError, "norm_quantile: p must lie in (0, 1)");
  }
  // 1 - p is exact for p >= 0.5, which keeps the upper tail accurate.
  if (p > 0.5) return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::kDomainError, "chi_square_sf: df must be >= 1");
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  if (spec.node_count < 16 || !(spec.abs_tol > 0.0) || !(spec.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "integrate: need node_count >= 16, abs_tol > 0 and scale > 0");
  }
  const double coarse = apply_rule(*gauss_legendre(spec.node_count), f, spec);
  const double fine = apply_rule(*gauss_legendre(2 * spec.node_count), f, spec);
  if (!std::isfinite(fine) || std::abs(fine - coarse) > spec.abs_tol) {
    char gap[32];
    std::snprintf(gap, sizeof gap, "%.3g", std::abs(fine - coarse));
    throw Error(ErrorCode::kNonConvergence,
                std::string("integrate: node doubling changed the result by ") + gap);
  }
  return fine;
}

double fd_step(double x) {
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  return cbrt_eps * std::max(1.0, std::abs(x));
}

Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h > 0.0 ? h : fd_step(x[j]);
    probe[j] = x[j] + step;
    const double up = f(probe);
    probe[j] = x[j] - step;
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_hessian_of_gradient(const VectorField& grad, const Eigen::VectorXd& x,
                                       double h) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd jac(d, d);
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double step = h > 0.0 ? h : fd_step(x[j]);
    probe[j] = x[j] + step;
    const Eigen::VectorXd up = grad(probe);
    probe[j] = x[j] - step;
    const Eigen::VectorXd down = grad(probe);
    probe[j] = x[j];
    jac.col(j) = (up - down) / (2.0 * step);
  }
  return 0.5 * (jac + jac.transpose());
}

}  // namespace genheck::numerics
