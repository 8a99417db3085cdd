#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulate.hpp"

namespace genheck {

using numerics::inv_mills;
using numerics::log_norm_cdf;
using numerics::log_norm_pdf;

namespace {

// Type-7 sample quantile of sorted values.
double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void require_same_design(const FitResult& fit, const Dataset& data) {
  if (fit.sizes() != data.sizes() || fit.n != data.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "fit was not computed on this design");
  }
}

}  // namespace

double psi(double mu2, double sigma, double rho) {
  check_domain(sigma, rho);
  const double root = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double log_sel = log_norm_cdf(mu2);
  // Integrate over z = (y - mu1) / sigma; the 1 / sigma Jacobian cancels.
  auto integrand = [&](double z) {
    const double zeta = (mu2 + rho * z) / root;
    return std::exp(log_norm_pdf(z) + 2.0 * log_norm_pdf(zeta) - log_norm_cdf(zeta) - log_sel);
  };
  numerics::QuadratureSpec spec;
  spec.center = rho * inv_mills(mu2);
  return numerics::integrate(integrand, spec);
}

ResidualReport score_residuals(const FitResult& fit, const Dataset& data) {
  require_converged(fit);
  require_same_design(fit, data);
  const Predictors pr = predictors(fit.theta_hat, data);
  ResidualReport rep;
  const Eigen::Index m = data.n_selected();
  rep.ordinary.resize(m);
  rep.standardized.resize(m);
  rep.all_obs = Eigen::VectorXd::Zero(data.n());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.u[i] != 1) continue;
    const double t = pr.atanh_rho[i];
    const double sh = std::sinh(t);  // rho / sqrt(1 - rho^2)
    const double mu2 = pr.mu2[i];
    const double rho = pr.rho[i];
    const double z = (data.y[i] - pr.mu1[i]) / pr.sigma[i];
    const double zeta = mu2 * std::cosh(t) + z * sh;
    const double s = z - sh * inv_mills(zeta);
    const double variance = 1.0 + mu2 * rho * rho * inv_mills(mu2) +
                            (sh == 0.0 ? 0.0 : sh * sh * psi(mu2, pr.sigma[i], rho));
    rep.ordinary[k] = s;
    rep.standardized[k] = s / std::sqrt(variance);
    rep.all_obs[i] = s / std::sqrt(std::exp(log_norm_cdf(mu2)) * variance);
    rep.indices.push_back(i);
    ++k;
  }
  return rep;
}

double EnvelopeBand::inside_fraction() const {
  if (observed.size() == 0) return 0.0;
  Eigen::Index inside = 0;
  for (Eigen::Index k = 0; k < observed.size(); ++k) {
    if (observed[k] >= lower[k] && observed[k] <= upper[k]) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(observed.size());
}

EnvelopeBand envelope(const FitResult& fit, const Dataset& data, int n_sim, double level,
                      std::uint64_t seed, int threads) {
  require_converged(fit);
  require_same_design(fit, data);
  if (n_sim < 19) throw Error(ErrorCode::kInvalidArgument, "envelope needs n_sim >= 19");
  if (!(level > 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "envelope level must lie in (0, 1]");
  }
  const Eigen::Index n = data.n();
  EnvelopeBand band;
  band.level = level;
  band.n_sim = n_sim;

  const ResidualReport observed = score_residuals(fit, data);
  band.order.resize(n);
  std::iota(band.order.begin(), band.order.end(), Eigen::Index{0});
  std::stable_sort(band.order.begin(), band.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return observed.all_obs[a] < observed.all_obs[b];
  });
  band.observed.resize(n);
  band.theoretical.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    band.observed[k] = observed.all_obs[band.order[k]];
    band.theoretical[k] =
        numerics::norm_quantile((static_cast<double>(k) + 1.0 - 0.375) / (n + 0.25));
  }

  const Designs designs = designs_of(data);
  std::vector<Eigen::VectorXd> sims(static_cast<std::size_t>(n_sim));
  parallel_for(sims.size(), threads, [&](std::size_t j) {
    try {
      const Dataset sim = gen_dataset(fit.theta_hat, designs, rng::mix(seed, j + 1));
      FitOptions opts;
      opts.start = fit.theta_hat;
      FitResult refit = genheck::fit(sim, opts);
      if (!refit.converged) refit = genheck::fit(sim);
      if (!refit.converged) return;
      Eigen::VectorXd r = score_residuals(refit, sim).all_obs;
      std::sort(r.data(), r.data() + r.size());
      sims[j] = std::move(r);
    } catch (const Error&) {
    }
  });

  std::vector<const Eigen::VectorXd*> ok;
  for (const auto& s : sims) {
    if (s.size() == n) ok.push_back(&s);
  }
  band.n_failed = n_sim - static_cast<int>(ok.size());
  if (ok.empty()) throw Error(ErrorCode::kNonConvergence, "every envelope refit failed");

  band.lower.resize(n);
  band.upper.resize(n);
  std::vector<double> column(ok.size());
  const double tail = 0.5 * (1.0 - level);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < ok.size(); ++j) column[j] = (*ok[j])[k];
    std::sort(column.begin(), column.end());
    band.lower[k] = sorted_quantile(column, tail);
    band.upper[k] = sorted_quantile(column, 1.0 - tail);
  }
  return band;
}

CookReport cook_distance(const FitResult& fit, const Dataset& data, CookWeight weight,
                         const std::vector<Eigen::Index>& rows, int threads) {
  require_converged(fit);
  require_same_design(fit, data);
  const Eigen::Index d = fit.sizes().total();
  CookReport rep;
  if (rows.empty()) {
    rep.rows.resize(data.n());
    std::iota(rep.rows.begin(), rep.rows.end(), Eigen::Index{0});
  } else {
    rep.rows = rows;
  }
  rep.threshold = 2.0 * static_cast<double>(d) / static_cast<double>(data.n());
  const Eigen::MatrixXd metric =
      weight == CookWeight::kInformation ? Eigen::MatrixXd(-fit.hessian) : fit.covariance;
  const Eigen::VectorXd est = fit.theta_hat.flatten();

  rep.distance = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rep.rows.size()),
                                           std::numeric_limits<double>::quiet_NaN());
  parallel_for(rep.rows.size(), threads, [&](std::size_t k) {
    try {
      const Dataset reduced = data.without_rows({rep.rows[k]});
      FitOptions opts;
      opts.start = fit.theta_hat;
      opts.max_iter = 50;
      opts.grad_tol = fit.grad_tol;
      const FitResult refit = genheck::fit(reduced, opts);
      if (!refit.converged) return;
      const Eigen::VectorXd diff = est - refit.theta_hat.flatten();
      rep.distance[static_cast<Eigen::Index>(k)] = diff.dot(metric * diff);
    } catch (const Error&) {
    }
  });
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const double v = rep.distance[static_cast<Eigen::Index>(k)];
    if (std::isnan(v)) {
      ++rep.failures;
    } else if (v > rep.threshold) {
      rep.flagged.push_back(rep.rows[k]);
    }
  }
  return rep;
}

}  // namespace genheck
