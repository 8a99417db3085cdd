#pragma once

#include <vector>

#include <Eigen/Core>

#include "estimate.hpp"
#include "model.hpp"

namespace genheck {

enum class TestKind { kLikelihoodRatio, kWald, kGradient };

const char* to_string(TestKind kind);

/// Hypothesized values for positions of the flattened parameter vector.
struct Restriction {
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd values;
};

struct TestResult {
  TestKind kind = TestKind::kLikelihoodRatio;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  // Set when a negative gradient statistic was floored at zero.
  bool numerical_warning = false;
};

TestResult lr_test(const FitResult& full, const FitResult& restricted, int df);
TestResult wald_test(const FitResult& fit, const Restriction& restriction);

/// Terrell gradient statistic S(theta_restricted)' (theta_full - theta_restricted),
/// with both vectors in the full parameterization.
TestResult gradient_test(const Theta& theta_restricted, const Theta& theta_full,
                         const Dataset& data, int df);

/// Restriction fixing columns `cols` of design block `block` (0..3) at zero.
Restriction zero_restriction(const BlockSizes& sizes, int block,
                             const std::vector<Eigen::Index>& cols);

/// Re-inserts zero coefficients removed from `block` so `restricted` lives in
/// the parameter space of `full`.
Theta embed(const Theta& restricted, const BlockSizes& full, int block,
            const std::vector<Eigen::Index>& removed_cols);

struct ZeroRestrictionTests {
  FitResult restricted;
  TestResult lr;
  TestResult wald;
  TestResult gradient;
};

/// LR, Wald and gradient tests of H0: coefficients `cols` of `block` are zero.
/// `data` is the design the full fit was computed on. The restricted model is
/// fitted by deleting those design columns, warm-started from the full fit.
ZeroRestrictionTests test_zero_restriction(const Dataset& data, const FitResult& full,
                                           int block, const std::vector<Eigen::Index>& cols,
                                           const FitOptions& options = {});

}  // namespace genheck
