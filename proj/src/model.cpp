#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "numerics.hpp"

namespace genheck {

using numerics::inv_mills;
using numerics::log_norm_cdf;
using numerics::log_norm_pdf;

namespace {

void require_rows(const Eigen::MatrixXd& m, Eigen::Index n, const char* name) {
  if (m.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string("design ") + name + " has " + std::to_string(m.rows()) +
                    " rows, expected " + std::to_string(n));
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kValueError, std::string("design ") + name + " has non-finite entries");
  }
}

void require_sizes(const Theta& theta, const Dataset& data) {
  if (theta.sizes() != data.sizes()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parameter blocks do not match the design column counts");
  }
}

Eigen::MatrixXd drop_rows(const Eigen::MatrixXd& m, const std::vector<bool>& keep,
                          Eigen::Index kept) {
  Eigen::MatrixXd out(kept, m.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (keep[i]) out.row(k++) = m.row(i);
  }
  return out;
}

// Derivatives of one observation's log-likelihood with respect to the four
// linear predictors mu1, mu2, log sigma and the (clamped) atanh rho.
struct ObsTerms {
  double value = 0.0;
  double d_mu1 = 0.0;
  double d_mu2 = 0.0;
  double d_log_sigma = 0.0;
  double d_atanh_rho = 0.0;
};

ObsTerms observation_terms(bool selected, double y, double mu1, double mu2,
                           double log_sigma, double t) {
  ObsTerms out;
  if (!selected) {
    out.value = log_norm_cdf(-mu2);
    out.d_mu2 = -inv_mills(-mu2);
    return out;
  }
  const double sigma = std::exp(log_sigma);
  const double z = (y - mu1) / sigma;
  // rho / sqrt(1 - rho^2) = sinh(t) and 1 / sqrt(1 - rho^2) = cosh(t).
  const double ch = std::cosh(t);
  const double sh = std::sinh(t);
  const double zeta = mu2 * ch + z * sh;
  const double mills = inv_mills(zeta);
  out.value = log_norm_cdf(zeta) + log_norm_pdf(z) - log_sigma;
  out.d_mu1 = (z - mills * sh) / sigma;
  out.d_mu2 = mills * ch;
  out.d_log_sigma = z * z - 1.0 - mills * sh * z;
  out.d_atanh_rho = mills * (mu2 * sh + z * ch);
  return out;
}

}  // namespace

Dataset Dataset::create(Eigen::VectorXd y, Eigen::VectorXi u, Eigen::MatrixXd X,
                        Eigen::MatrixXd W, Eigen::MatrixXd E, Eigen::MatrixXd V) {
  const Eigen::Index n = y.size();
  if (u.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "selection vector length differs from outcome");
  }
  require_rows(X, n, "X");
  require_rows(W, n, "W");
  require_rows(E, n, "E");
  require_rows(V, n, "V");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (u[i] != 0 && u[i] != 1) {
      throw Error(ErrorCode::kValueError,
                  "selection indicator at index " + std::to_string(i) + " is not 0/1");
    }
    if (u[i] == 1 && !std::isfinite(y[i])) {
      throw Error(ErrorCode::kValueError,
                  "selected observation at index " + std::to_string(i) + " has no outcome");
    }
    if (u[i] == 0) y[i] = 0.0;
  }
  Dataset d;
  d.y = std::move(y);
  d.u = std::move(u);
  d.X = std::move(X);
  d.W = std::move(W);
  d.E = std::move(E);
  d.V = std::move(V);
  return d;
}

Eigen::Index Dataset::n_selected() const { return u.sum(); }

Dataset Dataset::without_rows(const std::vector<Eigen::Index>& rows) const {
  std::vector<bool> keep(n(), true);
  for (Eigen::Index r : rows) {
    if (r < 0 || r >= n()) throw Error(ErrorCode::kInvalidArgument, "row index out of range");
    keep[r] = false;
  }
  const Eigen::Index kept = std::count(keep.begin(), keep.end(), true);
  Dataset out;
  out.y.resize(kept);
  out.u.resize(kept);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (!keep[i]) continue;
    out.y[k] = y[i];
    out.u[k] = u[i];
    ++k;
  }
  out.X = drop_rows(X, keep, kept);
  out.W = drop_rows(W, keep, kept);
  out.E = drop_rows(E, keep, kept);
  out.V = drop_rows(V, keep, kept);
  out.names = names;
  return out;
}

Dataset Dataset::without_columns(int block, const std::vector<Eigen::Index>& cols) const {
  Dataset out = *this;
  Eigen::MatrixXd* m = nullptr;
  std::vector<std::string>* nm = nullptr;
  switch (block) {
    case 0: m = &out.X; nm = &out.names.outcome; break;
    case 1: m = &out.W; nm = &out.names.selection; break;
    case 2: m = &out.E; nm = &out.names.dispersion; break;
    case 3: m = &out.V; nm = &out.names.correlation; break;
    default: throw Error(ErrorCode::kInvalidArgument, "design block must be 0..3");
  }
  std::vector<bool> keep(m->cols(), true);
  for (Eigen::Index c : cols) {
    if (c < 0 || c >= m->cols()) throw Error(ErrorCode::kInvalidArgument, "column out of range");
    keep[c] = false;
  }
  const Eigen::Index kept = std::count(keep.begin(), keep.end(), true);
  Eigen::MatrixXd reduced(m->rows(), kept);
  std::vector<std::string> reduced_names;
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < m->cols(); ++c) {
    if (!keep[c]) continue;
    reduced.col(k++) = m->col(c);
    if (static_cast<std::size_t>(c) < nm->size()) reduced_names.push_back((*nm)[c]);
  }
  *m = std::move(reduced);
  if (!nm->empty()) *nm = std::move(reduced_names);
  return out;
}

std::string Dataset::column_name(int block, Eigen::Index col) const {
  static const char* prefixes[] = {"beta", "gamma", "lambda", "kappa"};
  const std::vector<std::string>* nm[] = {&names.outcome, &names.selection,
                                          &names.dispersion, &names.correlation};
  if (block < 0 || block > 3) throw Error(ErrorCode::kInvalidArgument, "design block must be 0..3");
  const auto& list = *nm[block];
  if (col >= 0 && static_cast<std::size_t>(col) < list.size()) return list[col];
  return std::string(prefixes[block]) + std::to_string(col);
}

Eigen::VectorXd Theta::flatten() const {
  const BlockSizes b = sizes();
  Eigen::VectorXd flat(b.total());
  flat << beta, gamma, lambda, kappa;
  return flat;
}

Theta Theta::unflatten(const Eigen::VectorXd& flat, const BlockSizes& b) {
  if (flat.size() != b.total()) {
    throw Error(ErrorCode::kDimensionMismatch, "flat parameter vector has the wrong length");
  }
  Theta t;
  t.beta = flat.segment(b.beta_offset(), b.p);
  t.gamma = flat.segment(b.gamma_offset(), b.q);
  t.lambda = flat.segment(b.lambda_offset(), b.r);
  t.kappa = flat.segment(b.kappa_offset(), b.s);
  return t;
}

Theta Theta::zeros(const BlockSizes& b) {
  return {Eigen::VectorXd::Zero(b.p), Eigen::VectorXd::Zero(b.q), Eigen::VectorXd::Zero(b.r),
          Eigen::VectorXd::Zero(b.s)};
}

Predictors predictors(const Theta& theta, const Dataset& data) {
  require_sizes(theta, data);
  Predictors out;
  out.mu1 = data.X * theta.beta;
  out.mu2 = data.W * theta.gamma;
  out.log_sigma = data.E * theta.lambda;
  out.sigma = out.log_sigma.array().exp();
  Eigen::VectorXd raw = data.V * theta.kappa;
  out.clamped = (raw.array().abs() > kCorrelationClamp).any();
  out.atanh_rho = raw.cwiseMax(-kCorrelationClamp).cwiseMin(kCorrelationClamp);
  out.rho = out.atanh_rho.array().tanh();
  return out;
}

void check_domain(double sigma, double rho) {
  if (!(sigma > 0.0) || !(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::kDomainError, "need sigma > 0 and |rho| < 1");
  }
}

double log_cond_density(double y, double mu1, double mu2, double sigma, double rho) {
  check_domain(sigma, rho);
  const double z = (y - mu1) / sigma;
  const double root = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double zeta = (mu2 + rho * z) / root;
  return log_norm_pdf(z) - std::log(sigma) + log_norm_cdf(zeta) - log_norm_cdf(mu2);
}

double cond_density(double y, double mu1, double mu2, double sigma, double rho) {
  return std::exp(log_cond_density(y, mu1, mu2, sigma, rho));
}

double loglik(const Theta& theta, const Dataset& data) {
  const Predictors pr = predictors(theta, data);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    total += observation_terms(data.u[i] == 1, data.y[i], pr.mu1[i], pr.mu2[i],
                               pr.log_sigma[i], pr.atanh_rho[i])
                 .value;
  }
  return total;
}

namespace {

struct PredictorGradients {
  Eigen::VectorXd d_mu1, d_mu2, d_log_sigma, d_atanh_rho;
};

PredictorGradients predictor_gradients(const Theta& theta, const Dataset& data) {
  const Predictors pr = predictors(theta, data);
  const Eigen::Index n = data.n();
  PredictorGradients g{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n),
                       Eigen::VectorXd(n)};
  const Eigen::VectorXd raw = data.V * theta.kappa;
  for (Eigen::Index i = 0; i < n; ++i) {
    const ObsTerms t = observation_terms(data.u[i] == 1, data.y[i], pr.mu1[i], pr.mu2[i],
                                         pr.log_sigma[i], pr.atanh_rho[i]);
    g.d_mu1[i] = t.d_mu1;
    g.d_mu2[i] = t.d_mu2;
    g.d_log_sigma[i] = t.d_log_sigma;
    // Past the clamp the likelihood is flat in kappa.
    g.d_atanh_rho[i] = std::abs(raw[i]) > kCorrelationClamp ? 0.0 : t.d_atanh_rho;
  }
  return g;
}

}  // namespace

Eigen::VectorXd score(const Theta& theta, const Dataset& data) {
  const PredictorGradients g = predictor_gradients(theta, data);
  const BlockSizes b = data.sizes();
  Eigen::VectorXd s(b.total());
  s.segment(b.beta_offset(), b.p) = data.X.transpose() * g.d_mu1;
  s.segment(b.gamma_offset(), b.q) = data.W.transpose() * g.d_mu2;
  s.segment(b.lambda_offset(), b.r) = data.E.transpose() * g.d_log_sigma;
  s.segment(b.kappa_offset(), b.s) = data.V.transpose() * g.d_atanh_rho;
  return s;
}

Eigen::MatrixXd score_contributions(const Theta& theta, const Dataset& data) {
  const PredictorGradients g = predictor_gradients(theta, data);
  const BlockSizes b = data.sizes();
  Eigen::MatrixXd s(data.n(), b.total());
  s.middleCols(b.beta_offset(), b.p) = data.X.array().colwise() * g.d_mu1.array();
  s.middleCols(b.gamma_offset(), b.q) = data.W.array().colwise() * g.d_mu2.array();
  s.middleCols(b.lambda_offset(), b.r) = data.E.array().colwise() * g.d_log_sigma.array();
  s.middleCols(b.kappa_offset(), b.s) = data.V.array().colwise() * g.d_atanh_rho.array();
  return s;
}

Eigen::MatrixXd hessian(const Theta& theta, const Dataset& data) {
  const BlockSizes b = theta.sizes();
  auto grad = [&](const Eigen::VectorXd& flat) {
    return score(Theta::unflatten(flat, b), data);
  };
  return numerics::fd_hessian_of_gradient(grad, theta.flatten());
}

Eigen::MatrixXd hessian_beta_block(const Theta& theta, const Dataset& data) {
  const Predictors pr = predictors(theta, data);
  const Eigen::Index p = data.X.cols();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.u[i] != 1) continue;
    const double sigma = pr.sigma[i];
    const double t = pr.atanh_rho[i];
    const double z = (data.y[i] - pr.mu1[i]) / sigma;
    const double zeta = pr.mu2[i] * std::cosh(t) + z * std::sinh(t);
    const double mills = inv_mills(zeta);
    const double ratio = std::sinh(t) * std::sinh(t);  // rho^2 / (1 - rho^2)
    const double weight = -(ratio * (zeta * mills + mills * mills) + 1.0) / (sigma * sigma);
    h.noalias() += weight * data.X.row(i).transpose() * data.X.row(i);
  }
  return h;
}

ConditionalMoments conditional_moments(double mu1, double mu2, double sigma, double rho) {
  check_domain(sigma, rho);
  const double mills = inv_mills(mu2);
  const double one_minus = (1.0 - rho) * (1.0 + rho);
  ConditionalMoments m;
  m.ey = mu1 + rho * sigma * mills;
  m.ez = rho * mills;
  m.ez2 = 1.0 - mu2 * rho * rho * mills;
  m.emills = std::sqrt(one_minus) * mills;
  m.ezeta_mills = mu2 * one_minus * mills;
  return m;
}

bool has_exclusion_restriction(const Dataset& data) {
  for (Eigen::Index j = 0; j < data.W.cols(); ++j) {
    bool duplicated = false;
    for (Eigen::Index k = 0; k < data.X.cols() && !duplicated; ++k)
      duplicated = data.W.col(j) == data.X.col(k);
    if (!duplicated) return true;
  }
  return false;
}

}  // namespace genheck
