#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "estimate.hpp"
#include "model.hpp"

namespace genheck {

/// E(phi^2(zeta) / Phi^2(zeta) | U = 1) by quadrature over the conditional
/// outcome density. Independent of sigma.
double psi(double mu2, double sigma, double rho);

struct ResidualReport {
  Eigen::VectorXd ordinary;      // s_i, selected observations
  Eigen::VectorXd standardized;  // S_i, selected observations
  Eigen::VectorXd all_obs;       // S*_i, every observation (0 where u = 0)
  std::vector<Eigen::Index> indices;  // dataset rows of the selected entries
};

/// Score residuals at the fitted parameters. `data` must be the design the
/// fit was computed on.
ResidualReport score_residuals(const FitResult& fit, const Dataset& data);

struct EnvelopeBand {
  Eigen::VectorXd theoretical;  // normal quantiles (k - 3/8) / (n + 1/4)
  Eigen::VectorXd observed;     // sorted all-observation residuals
  std::vector<Eigen::Index> order;  // dataset row of each sorted residual
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double level = 0.95;
  int n_sim = 0;
  int n_failed = 0;

  /// Fraction of observed residuals within [lower, upper].
  double inside_fraction() const;
};

/// Simulated envelope for the sorted all-observation score residuals: n_sim
/// datasets are drawn from the fitted model over the same designs, refitted,
/// and the per-rank empirical `level` interval taken. Replicate j uses seed
/// mix(seed, j + 1). A refit that fails from the estimate is retried from the
/// default start; replicates failing both are dropped and counted.
EnvelopeBand envelope(const FitResult& fit, const Dataset& data, int n_sim, double level,
                      std::uint64_t seed, int threads = 1);

enum class CookWeight { kInformation, kCovariance };

struct CookReport {
  Eigen::VectorXd distance;  // NaN where the deletion refit failed
  std::vector<Eigen::Index> rows;
  double threshold = 0.0;    // 2 dim(theta) / n
  std::vector<Eigen::Index> flagged;
  int failures = 0;
};

/// Generalized Cook distance by exact case-deletion refits warm-started at
/// the estimate. `rows` selects which observations to delete (all when empty).
CookReport cook_distance(const FitResult& fit, const Dataset& data,
                         CookWeight weight = CookWeight::kInformation,
                         const std::vector<Eigen::Index>& rows = {}, int threads = 1);

}  // namespace genheck
