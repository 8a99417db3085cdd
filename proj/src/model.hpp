#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace genheck {

/// Column counts of the four design matrices, which fix the layout of the
/// flattened parameter vector (beta, gamma, lambda, kappa).
struct BlockSizes {
  Eigen::Index p = 0;  // outcome
  Eigen::Index q = 0;  // selection
  Eigen::Index r = 0;  // dispersion
  Eigen::Index s = 0;  // correlation

  Eigen::Index total() const { return p + q + r + s; }
  Eigen::Index beta_offset() const { return 0; }
  Eigen::Index gamma_offset() const { return p; }
  Eigen::Index lambda_offset() const { return p + q; }
  Eigen::Index kappa_offset() const { return p + q + r; }

  bool operator==(const BlockSizes&) const = default;
};

struct DesignNames {
  std::vector<std::string> outcome;
  std::vector<std::string> selection;
  std::vector<std::string> dispersion;
  std::vector<std::string> correlation;
};

/// Observed sample: outcome y (only meaningful where u = 1), selection
/// indicators u and the outcome, selection, dispersion and correlation designs.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXi u;
  Eigen::MatrixXd X;
  Eigen::MatrixXd W;
  Eigen::MatrixXd E;
  Eigen::MatrixXd V;
  DesignNames names;

  /// Validates shapes and values; throws DimensionMismatch or ValueError.
  /// Entries of y where u = 0 are set to zero.
  static Dataset create(Eigen::VectorXd y, Eigen::VectorXi u, Eigen::MatrixXd X,
                        Eigen::MatrixXd W, Eigen::MatrixXd E, Eigen::MatrixXd V);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index n_selected() const;
  BlockSizes sizes() const { return {X.cols(), W.cols(), E.cols(), V.cols()}; }

  /// Copy without the listed rows.
  Dataset without_rows(const std::vector<Eigen::Index>& rows) const;
  /// Copy with the listed columns removed from the chosen design (0..3 for
  /// X, W, E, V).
  Dataset without_columns(int block, const std::vector<Eigen::Index>& cols) const;

  /// Name for the design column, or a positional default.
  std::string column_name(int block, Eigen::Index col) const;
};

struct Theta {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd lambda;
  Eigen::VectorXd kappa;

  BlockSizes sizes() const {
    return {beta.size(), gamma.size(), lambda.size(), kappa.size()};
  }
  Eigen::VectorXd flatten() const;
  static Theta unflatten(const Eigen::VectorXd& flat, const BlockSizes& sizes);
  static Theta zeros(const BlockSizes& sizes);
};

/// Linear predictors after their links. Correlation predictors are clamped
/// to |v'kappa| <= kCorrelationClamp before tanh.
struct Predictors {
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
  Eigen::VectorXd sigma;
  Eigen::VectorXd rho;
  Eigen::VectorXd log_sigma;
  Eigen::VectorXd atanh_rho;  // clamped v'kappa
  bool clamped = false;
};

inline constexpr double kCorrelationClamp = 18.0;

Predictors predictors(const Theta& theta, const Dataset& data);

/// Conditional density of the outcome given selection.
double cond_density(double y, double mu1, double mu2, double sigma, double rho);
double log_cond_density(double y, double mu1, double mu2, double sigma, double rho);

double loglik(const Theta& theta, const Dataset& data);
Eigen::VectorXd score(const Theta& theta, const Dataset& data);

/// Per-observation score contributions, one row per observation.
Eigen::MatrixXd score_contributions(const Theta& theta, const Dataset& data);

/// Full Hessian by central differences of the analytic score, symmetrized.
Eigen::MatrixXd hessian(const Theta& theta, const Dataset& data);

/// Closed-form second derivative with respect to beta.
Eigen::MatrixXd hessian_beta_block(const Theta& theta, const Dataset& data);

struct ConditionalMoments {
  double ey = 0.0;          // E(Y | U = 1)
  double ez = 0.0;          // E(Z | U = 1)
  double ez2 = 0.0;         // E(Z^2 | U = 1)
  double emills = 0.0;      // E(phi(zeta)/Phi(zeta) | U = 1)
  double ezeta_mills = 0.0; // E(zeta phi(zeta)/Phi(zeta) | U = 1)
};

ConditionalMoments conditional_moments(double mu1, double mu2, double sigma, double rho);

void check_domain(double sigma, double rho);

/// False when every selection column duplicates an outcome column exactly,
/// i.e. no covariate enters the selection equation alone.
bool has_exclusion_restriction(const Dataset& data);

}  // namespace genheck
