#include "infer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "error.hpp"
#include "numerics.hpp"

namespace genheck {

const char* to_string(TestKind kind) {
  switch (kind) {
    case TestKind::kLikelihoodRatio: return "LR";
    case TestKind::kWald: return "Wald";
    case TestKind::kGradient: return "Gradient";
  }
  return "unknown";
}

namespace {

Eigen::Index block_offset(const BlockSizes& b, int block) {
  switch (block) {
    case 0: return b.beta_offset();
    case 1: return b.gamma_offset();
    case 2: return b.lambda_offset();
    case 3: return b.kappa_offset();
  }
  throw Error(ErrorCode::kInvalidArgument, "design block must be 0..3");
}

Eigen::Index block_size(const BlockSizes& b, int block) {
  const Eigen::Index sizes[] = {b.p, b.q, b.r, b.s};
  if (block < 0 || block > 3) throw Error(ErrorCode::kInvalidArgument, "design block must be 0..3");
  return sizes[block];
}

void require_df(int df) {
  if (df < 1) throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be >= 1");
}

}  // namespace

TestResult lr_test(const FitResult& full, const FitResult& restricted, int df) {
  require_converged(full);
  require_converged(restricted);
  require_df(df);
  if (full.loglik < restricted.loglik - 1e-6) {
    throw Error(ErrorCode::kNotNested,
                "restricted log-likelihood exceeds the full one; models are not nested");
  }
  TestResult t;
  t.kind = TestKind::kLikelihoodRatio;
  t.df = df;
  t.statistic = std::max(0.0, 2.0 * (full.loglik - restricted.loglik));
  t.p_value = numerics::chi_square_sf(t.statistic, df);
  return t;
}

TestResult wald_test(const FitResult& fit, const Restriction& restriction) {
  require_converged(fit);
  const Eigen::Index k = static_cast<Eigen::Index>(restriction.indices.size());
  const Eigen::Index d = fit.sizes().total();
  if (k < 1 || restriction.values.size() != k) {
    throw Error(ErrorCode::kInvalidArgument, "restriction needs matching, non-empty indices and values");
  }
  std::set<Eigen::Index> seen;
  for (Eigen::Index idx : restriction.indices) {
    if (idx < 0 || idx >= d || !seen.insert(idx).second) {
      throw Error(ErrorCode::kInvalidArgument, "restriction indices must be distinct and in range");
    }
  }
  const Eigen::VectorXd est = fit.theta_hat.flatten();
  Eigen::VectorXd diff(k);
  Eigen::MatrixXd cov(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    diff[a] = est[restriction.indices[a]] - restriction.values[a];
    for (Eigen::Index b = 0; b < k; ++b) {
      cov(a, b) = fit.covariance(restriction.indices[a], restriction.indices[b]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (!cov.allFinite() || llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "restricted covariance block is not invertible");
  }
  TestResult t;
  t.kind = TestKind::kWald;
  t.df = static_cast<int>(k);
  t.statistic = diff.dot(llt.solve(diff));
  t.p_value = numerics::chi_square_sf(t.statistic, t.df);
  return t;
}

TestResult gradient_test(const Theta& theta_restricted, const Theta& theta_full,
                         const Dataset& data, int df) {
  require_df(df);
  if (theta_restricted.sizes() != theta_full.sizes()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "restricted estimate must be embedded in the full parameter space");
  }
  const Eigen::VectorXd s = score(theta_restricted, data);
  TestResult t;
  t.kind = TestKind::kGradient;
  t.df = df;
  t.statistic = s.dot(theta_full.flatten() - theta_restricted.flatten());
  if (t.statistic < 0.0) {
    t.statistic = 0.0;
    t.numerical_warning = true;
  }
  t.p_value = numerics::chi_square_sf(t.statistic, df);
  return t;
}

Restriction zero_restriction(const BlockSizes& sizes, int block,
                             const std::vector<Eigen::Index>& cols) {
  const Eigen::Index offset = block_offset(sizes, block);
  const Eigen::Index count = block_size(sizes, block);
  Restriction r;
  for (Eigen::Index c : cols) {
    if (c < 0 || c >= count) throw Error(ErrorCode::kInvalidArgument, "restricted column out of range");
    r.indices.push_back(offset + c);
  }
  r.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols.size()));
  return r;
}

Theta embed(const Theta& restricted, const BlockSizes& full, int block,
            const std::vector<Eigen::Index>& removed_cols) {
  const Eigen::Index count = block_size(full, block);
  std::vector<bool> removed(count, false);
  for (Eigen::Index c : removed_cols) {
    if (c < 0 || c >= count) throw Error(ErrorCode::kInvalidArgument, "removed column out of range");
    removed[c] = true;
  }
  Theta out = restricted;
  const Eigen::VectorXd* src[] = {&restricted.beta, &restricted.gamma, &restricted.lambda,
                                  &restricted.kappa};
  Eigen::VectorXd* dst[] = {&out.beta, &out.gamma, &out.lambda, &out.kappa};
  const Eigen::VectorXd& from = *src[block];
  if (from.size() + static_cast<Eigen::Index>(removed_cols.size()) != count) {
    throw Error(ErrorCode::kDimensionMismatch, "restricted block has the wrong length");
  }
  Eigen::VectorXd filled = Eigen::VectorXd::Zero(count);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < count; ++c) {
    if (!removed[c]) filled[c] = from[k++];
  }
  *dst[block] = filled;
  if (out.sizes() != full) throw Error(ErrorCode::kDimensionMismatch, "embedded parameter has wrong shape");
  return out;
}

ZeroRestrictionTests test_zero_restriction(const Dataset& data, const FitResult& full,
                                           int block, const std::vector<Eigen::Index>& cols,
                                           const FitOptions& options) {
  require_converged(full);
  if (full.sizes() != data.sizes()) {
    throw Error(ErrorCode::kDimensionMismatch, "full fit does not match the supplied design");
  }
  const int df = static_cast<int>(cols.size());
  const Restriction restriction = zero_restriction(data.sizes(), block, cols);

  const Dataset reduced = data.without_columns(block, cols);
  // Warm start: full estimate with the restricted coefficients dropped.
  const Eigen::VectorXd full_flat = full.theta_hat.flatten();
  std::vector<bool> drop(full_flat.size(), false);
  for (Eigen::Index idx : restriction.indices) drop[idx] = true;
  Eigen::VectorXd start_flat(full_flat.size() - df);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < full_flat.size(); ++j) {
    if (!drop[j]) start_flat[k++] = full_flat[j];
  }
  FitOptions opts = options;
  opts.start = Theta::unflatten(start_flat, reduced.sizes());

  ZeroRestrictionTests out;
  out.restricted = fit(reduced, opts);
  out.restricted.kind = full.kind;
  out.lr = lr_test(full, out.restricted, df);
  out.wald = wald_test(full, restriction);
  const Theta embedded = embed(out.restricted.theta_hat, data.sizes(), block, cols);
  out.gradient = gradient_test(embedded, full.theta_hat, data, df);
  return out;
}

}  // namespace genheck
