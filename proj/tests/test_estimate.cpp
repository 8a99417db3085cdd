#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "error.hpp"
#include "estimate.hpp"
#include "numerics.hpp"
#include "simulate.hpp"
#include "support.hpp"

using namespace genheck;

namespace {

const Dataset& scenario_one() {
  static const Dataset d = scenario(make_scenario(1, 1000), 42);
  return d;
}

const FitResult& scenario_one_fit() {
  static const FitResult f = fit(scenario_one());
  return f;
}

TEST(Fit, ConvergesOnScenarioOne) {
  const FitResult& f = scenario_one_fit();
  ASSERT_TRUE(f.converged) << f.detail;
  EXPECT_EQ(f.status, FitStatus::kConverged);
  EXPECT_LE(f.grad_norm, f.grad_tol);
  EXPECT_EQ(f.n, 1000);
  const Theta truth = make_scenario(1, 1000).theta_true;
  const Eigen::VectorXd err = f.theta_hat.flatten() - truth.flatten();
  // Every estimate within four standard errors of the generating value.
  for (Eigen::Index j = 0; j < err.size(); ++j)
    EXPECT_LT(std::abs(err[j]), 4.0 * f.std_errors[j]) << "parameter " << j;
}

TEST(Fit, ScoreVanishesAndInformationIsPositiveDefinite) {
  const FitResult& f = scenario_one_fit();
  EXPECT_LE(score(f.theta_hat, scenario_one()).cwiseAbs().maxCoeff(), f.grad_tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-f.hessian);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT((f.covariance * -f.hessian - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Fit, MaximizesTheLikelihoodLocally) {
  const FitResult& f = scenario_one_fit();
  const Eigen::VectorXd x = f.theta_hat.flatten();
  const BlockSizes b = f.sizes();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    for (double h : {-1e-3, 1e-3}) {
      Eigen::VectorXd y = x;
      y[j] += h;
      EXPECT_LT(loglik(Theta::unflatten(y, b), scenario_one()), f.loglik);
    }
  }
}

TEST(FitClassic, ShowsSignFlippedDispersionBiasOnScenarioOne) {
  const FitResult c = fit_classic(scenario_one());
  ASSERT_TRUE(c.converged) << c.detail;
  EXPECT_EQ(c.kind, ModelKind::kClassic);
  EXPECT_EQ(c.sizes(), (BlockSizes{3, 4, 1, 1}));
  // True lambda0 is -0.4 with sigma varying; the constant-dispersion fit
  // absorbs the heteroscedasticity into a positive intercept.
  EXPECT_GT(c.theta_hat.lambda[0], 0.0);
  EXPECT_LT(c.loglik, scenario_one_fit().loglik);
}

TEST(ClassicDesign, CollapsesDispersionAndCorrelationToIntercepts) {
  const Dataset c = classic_design(scenario_one());
  EXPECT_EQ(c.E.cols(), 1);
  EXPECT_EQ(c.V.cols(), 1);
  EXPECT_EQ(c.E, Eigen::MatrixXd::Ones(1000, 1));
  EXPECT_EQ(c.X, scenario_one().X);
}

TEST(Fit, ConstantColumnsMatchTheClassicModel) {
  const Dataset c = classic_design(scenario(make_scenario(5, 800), 9));
  const FitResult a = fit(c);
  const FitResult b = fit_classic(c);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LT((a.theta_hat.flatten() - b.theta_hat.flatten()).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-6);
}

TEST(Fit, RequiresCensoring) {
  Dataset d = scenario(make_scenario(1, 200), 1);
  d.u.setOnes();
  d.y.setConstant(1.0);
  try {
    fit(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingCensoring);
  }
}

TEST(Fit, ReportsSingularInformationForAZeroColumn) {
  Dataset d = scenario(make_scenario(1, 400), 3);
  d.W.col(3).setZero();
  const FitResult f = fit(d);
  EXPECT_FALSE(f.converged);
  EXPECT_EQ(f.status, FitStatus::kSingularInformation);
  EXPECT_THROW(summary(f), Error);
}

TEST(Fit, ReportsNonConvergenceAtTheIterationLimit) {
  FitOptions opts;
  opts.max_iter = 2;
  opts.polish_steps = 0;
  opts.start = Theta::zeros(scenario_one().sizes());
  const FitResult f = fit(scenario_one(), opts);
  EXPECT_FALSE(f.converged);
  EXPECT_EQ(f.status, FitStatus::kNonConvergence);
  EXPECT_FALSE(f.detail.empty());
}

TEST(Fit, RejectsMoreParametersThanObservations) {
  const auto draw = support::random_draw(8, {3, 3, 2, 2}, 5);
  EXPECT_THROW(fit(draw.data), Error);
}

TEST(Fit, WarmStartReachesTheSameOptimum) {
  FitOptions opts;
  opts.start = scenario_one_fit().theta_hat;
  const FitResult f = fit(scenario_one(), opts);
  ASSERT_TRUE(f.converged);
  EXPECT_NEAR(f.loglik, scenario_one_fit().loglik, 1e-8);
  EXPECT_LE(f.iterations, 3);
}

TEST(InitTheta, MatchesClassicConstants) {
  const Theta t = init_theta(scenario_one());
  const FitResult c = fit_classic(scenario_one());
  EXPECT_LT((t.beta - c.theta_hat.beta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(t.lambda[0], c.theta_hat.lambda[0], 1e-12);
  EXPECT_EQ(t.lambda[1], 0.0);
  EXPECT_NEAR(t.kappa[0], c.theta_hat.kappa[0], 1e-12);
}

TEST(ProbitFit, RecoversCoefficients) {
  rng::Stream stream(17);
  const Eigen::Index n = 20000;
  Eigen::MatrixXd W = support::design_with_intercept(n, 2, stream);
  Eigen::VectorXi u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = 0.3 - 0.8 * W(i, 1) + stream.normal() > 0 ? 1 : 0;
  const Eigen::VectorXd g = probit_fit(W, u);
  EXPECT_NEAR(g[0], 0.3, 0.05);
  EXPECT_NEAR(g[1], -0.8, 0.05);
}

TEST(Summary, BuildsWaldTable) {
  const FitResult& f = scenario_one_fit();
  const auto rows = summary(f, 0.95);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0].equation, "outcome");
  EXPECT_EQ(rows[0].name, "(Intercept)");
  EXPECT_EQ(rows[10].equation, "correlation");
  for (const auto& r : rows) {
    EXPECT_NEAR(r.z_value, r.estimate / r.std_error, 1e-12);
    EXPECT_NEAR(r.ci_high - r.estimate, 1.959963984540054 * r.std_error, 1e-12);
    EXPECT_NEAR(r.p_value, std::erfc(std::abs(r.z_value) / std::sqrt(2.0)), 1e-15);
  }
}

// Published table rows give estimates and standard errors rounded to three
// decimals; the computed statistic must lie within the range those roundings
// allow.
TEST(Summary, ReproducesTableArithmeticWithinRounding) {
  struct Row {
    double est, se, z, lo, hi;
  };
  const Row rows[] = {{0.630, 0.060, 10.544, 0.513, 0.747}, {0.086, 0.026, 3.260, 0.034, 0.138}};
  for (const Row& r : rows) {
    const double z_min = (r.est - 5e-4) / (r.se + 5e-4);
    const double z_max = (r.est + 5e-4) / (r.se - 5e-4);
    EXPECT_GE(r.z, z_min);
    EXPECT_LE(r.z, z_max);

    FitResult f;
    f.theta_hat.beta = Eigen::VectorXd::Constant(1, r.est);
    f.covariance = Eigen::MatrixXd::Constant(1, 1, r.se * r.se);
    f.std_errors = Eigen::VectorXd::Constant(1, r.se);
    f.converged = true;
    f.status = FitStatus::kConverged;
    const SummaryRow s = summary(f, 0.95).front();
    // Rounding of estimate, standard error and printed bound.
    const double slack = 5e-4 * (1.0 + 1.959963984540054) + 5e-4;
    EXPECT_NEAR(s.ci_low, r.lo, slack);
    EXPECT_NEAR(s.ci_high, r.hi, slack);
  }
}

TEST(Summary, RejectsBadLevel) {
  EXPECT_THROW(summary(scenario_one_fit(), 1.0), Error);
  EXPECT_THROW(summary(scenario_one_fit(), 0.0), Error);
}

TEST(TwoSidedP, IsOneAtZeroAndSymmetric) {
  EXPECT_DOUBLE_EQ(two_sided_p(0.0), 1.0);
  EXPECT_DOUBLE_EQ(two_sided_p(-2.5), two_sided_p(2.5));
  EXPECT_NEAR(two_sided_p(1.959963984540054), 0.05, 1e-15);
}

}  // namespace
