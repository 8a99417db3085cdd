#include "genheck/genheck.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "error.hpp"
#include "estimate.hpp"
#include "infer.hpp"
#include "ingest.hpp"
#include "model.hpp"
#include "simulate.hpp"

struct gh_dataset {
  genheck::Dataset data;
};

struct gh_fit {
  genheck::FitResult result;
};

struct gh_mc_summary {
  genheck::McSummary summary;
  std::string parameters_csv;
  std::string rejections_csv;
};

namespace {

thread_local std::string g_last_error;

gh_status status_of(genheck::ErrorCode code) {
  using genheck::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return GH_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return GH_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kDomainError: return GH_ERR_DOMAIN;
    case ErrorCode::kNonConvergence: return GH_ERR_NON_CONVERGENCE;
    case ErrorCode::kSingularInformation: return GH_ERR_SINGULAR_INFORMATION;
    case ErrorCode::kMissingCensoring: return GH_ERR_MISSING_CENSORING;
    case ErrorCode::kNotConverged: return GH_ERR_NOT_CONVERGED;
    case ErrorCode::kNotNested: return GH_ERR_NOT_NESTED;
    case ErrorCode::kSingularCovariance: return GH_ERR_SINGULAR_COVARIANCE;
    case ErrorCode::kInvalidScenario: return GH_ERR_INVALID_SCENARIO;
    case ErrorCode::kParseError: return GH_ERR_PARSE;
    case ErrorCode::kSchemaError: return GH_ERR_SCHEMA;
    case ErrorCode::kValueError: return GH_ERR_VALUE;
    case ErrorCode::kIoError: return GH_ERR_IO;
  }
  return GH_ERR_INTERNAL;
}

gh_status fail(gh_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
gh_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const genheck::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GH_ERR_INTERNAL, "unknown error");
  }
}

#define GH_REQUIRE(cond, msg) \
  do {                        \
    if (!(cond)) return fail(GH_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

Eigen::MatrixXd matrix_from(const double* values, size_t n, size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  return m;
}

Eigen::VectorXd vector_from(const double* values, size_t len) {
  return Eigen::Map<const Eigen::VectorXd>(values, static_cast<Eigen::Index>(len));
}

gh_status copy_string(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf == nullptr || len < s.size() + 1) {
    if (buf == nullptr && needed) return GH_OK;
    return fail(GH_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GH_OK;
}

genheck::Theta theta_for(const genheck::Dataset& data, const double* theta, size_t len) {
  const genheck::BlockSizes sizes = data.sizes();
  if (static_cast<Eigen::Index>(len) != sizes.total())
    throw genheck::Error(genheck::ErrorCode::kDimensionMismatch,
                         "parameter vector has " + std::to_string(len) + " entries, expected " +
                             std::to_string(sizes.total()));
  return genheck::Theta::unflatten(vector_from(theta, len), sizes);
}

gh_status fit_status(const genheck::FitResult& fit) {
  switch (fit.status) {
    case genheck::FitStatus::kConverged: return GH_OK;
    case genheck::FitStatus::kNonConvergence: return GH_ERR_NON_CONVERGENCE;
    case genheck::FitStatus::kSingularInformation: return GH_ERR_SINGULAR_INFORMATION;
  }
  return GH_ERR_INTERNAL;
}

gh_test_result to_c(const genheck::TestResult& t) {
  gh_test_result out{};
  out.kind = static_cast<int>(t.kind);
  out.statistic = t.statistic;
  out.df = t.df;
  out.p_value = t.p_value;
  out.numerical_warning = t.numerical_warning ? 1 : 0;
  return out;
}

std::vector<std::string> names_from(const char* const* items, size_t count) {
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) {
    if (items[i] == nullptr)
      throw genheck::Error(genheck::ErrorCode::kInvalidArgument, "null covariate name");
    out.emplace_back(items[i]);
  }
  return out;
}

std::vector<Eigen::Index> indices_from(const size_t* cols, size_t k) {
  std::vector<Eigen::Index> out;
  for (size_t i = 0; i < k; ++i) out.push_back(static_cast<Eigen::Index>(cols[i]));
  return out;
}

genheck::ModelKind model_of(gh_model_kind kind) {
  if (kind == GH_MODEL_GENERALIZED) return genheck::ModelKind::kGeneralized;
  if (kind == GH_MODEL_CLASSIC) return genheck::ModelKind::kClassic;
  throw genheck::Error(genheck::ErrorCode::kInvalidArgument, "unknown model kind");
}

}  // namespace

extern "C" {

uint32_t gh_api_version(void) { return GENHECK_API_VERSION; }

const char* gh_status_name(gh_status status) {
  switch (status) {
    case GH_OK: return "Ok";
    case GH_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case GH_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case GH_ERR_DOMAIN: return "DomainError";
    case GH_ERR_NON_CONVERGENCE: return "NonConvergence";
    case GH_ERR_SINGULAR_INFORMATION: return "SingularInformation";
    case GH_ERR_MISSING_CENSORING: return "MissingCensoring";
    case GH_ERR_NOT_CONVERGED: return "NotConverged";
    case GH_ERR_NOT_NESTED: return "NotNested";
    case GH_ERR_SINGULAR_COVARIANCE: return "SingularCovariance";
    case GH_ERR_INVALID_SCENARIO: return "InvalidScenario";
    case GH_ERR_PARSE: return "ParseError";
    case GH_ERR_SCHEMA: return "SchemaError";
    case GH_ERR_VALUE: return "ValueError";
    case GH_ERR_IO: return "IoError";
    case GH_ERR_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case GH_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

const char* gh_last_error(void) { return g_last_error.c_str(); }

void gh_model_config_init(gh_model_config* config) {
  if (config == nullptr) return;
  std::memset(config, 0, sizeof(*config));
  for (int& flag : config->intercepts) flag = 1;
}

gh_status gh_dataset_create(size_t n, const double* y, const int* u, const double* X, size_t p,
                            const double* W, size_t q, const double* E, size_t r,
                            const double* V, size_t s, gh_dataset** out) {
  GH_REQUIRE(out != nullptr, "out is null");
  *out = nullptr;
  GH_REQUIRE(n == 0 || (y != nullptr && u != nullptr), "y and u are required");
  GH_REQUIRE((p == 0 || X) && (q == 0 || W) && (r == 0 || E) && (s == 0 || V),
             "design pointer is null");
  return guarded([&] {
    Eigen::VectorXi uv(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) uv(static_cast<Eigen::Index>(i)) = u[i];
    Eigen::VectorXd yv = n ? vector_from(y, n) : Eigen::VectorXd();
    // Unobserved outcomes may legitimately be NaN.
    for (size_t i = 0; i < n; ++i)
      if (u[i] == 0) yv(static_cast<Eigen::Index>(i)) = 0.0;
    auto handle = std::make_unique<gh_dataset>();
    handle->data = genheck::Dataset::create(std::move(yv), std::move(uv),
                                            matrix_from(X, n, p), matrix_from(W, n, q),
                                            matrix_from(E, n, r), matrix_from(V, n, s));
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_dataset_read_csv(const char* path, const gh_model_config* config,
                              gh_dataset** out) {
  GH_REQUIRE(out != nullptr && path != nullptr && config != nullptr, "null argument");
  *out = nullptr;
  GH_REQUIRE(config->outcome != nullptr && config->selection != nullptr,
             "outcome and selection column names are required");
  return guarded([&] {
    genheck::ModelConfig cfg;
    cfg.outcome = config->outcome;
    cfg.selection = config->selection;
    cfg.outcome_covariates = names_from(config->outcome_covariates, config->n_outcome_covariates);
    cfg.selection_covariates =
        names_from(config->selection_covariates, config->n_selection_covariates);
    cfg.dispersion_covariates =
        names_from(config->dispersion_covariates, config->n_dispersion_covariates);
    cfg.correlation_covariates =
        names_from(config->correlation_covariates, config->n_correlation_covariates);
    for (int b = 0; b < 4; ++b) cfg.intercepts[b] = config->intercepts[b] != 0;
    auto handle = std::make_unique<gh_dataset>();
    handle->data = genheck::ingest_file(path, cfg);
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_dataset_write_csv(const gh_dataset* data, const char* path) {
  GH_REQUIRE(data != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    std::ofstream file(path, std::ios::binary);
    if (!file) return fail(GH_ERR_IO, std::string("cannot open ") + path + " for writing");
    file << genheck::dataset_to_csv(data->data);
    if (!file) return fail(GH_ERR_IO, std::string("write to ") + path + " failed");
    return GH_OK;
  });
}

gh_status gh_dataset_csv(const gh_dataset* data, char* buf, size_t len, size_t* needed) {
  GH_REQUIRE(data != nullptr, "data is null");
  return guarded([&] { return copy_string(genheck::dataset_to_csv(data->data), buf, len, needed); });
}

gh_status gh_dataset_exclusion_restriction(const gh_dataset* data, int* out) {
  GH_REQUIRE(data != nullptr && out != nullptr, "null argument");
  *out = genheck::has_exclusion_restriction(data->data) ? 1 : 0;
  return GH_OK;
}

void gh_dataset_destroy(gh_dataset* data) { delete data; }

gh_status gh_dataset_dims(const gh_dataset* data, gh_dims* dims) {
  GH_REQUIRE(data != nullptr && dims != nullptr, "null argument");
  const genheck::BlockSizes sizes = data->data.sizes();
  dims->n = static_cast<size_t>(data->data.n());
  dims->n_selected = static_cast<size_t>(data->data.n_selected());
  dims->p = static_cast<size_t>(sizes.p);
  dims->q = static_cast<size_t>(sizes.q);
  dims->r = static_cast<size_t>(sizes.r);
  dims->s = static_cast<size_t>(sizes.s);
  return GH_OK;
}

gh_status gh_dataset_column_name(const gh_dataset* data, int block, size_t col, char* buf,
                                 size_t len, size_t* needed) {
  GH_REQUIRE(data != nullptr, "data is null");
  GH_REQUIRE(block >= 0 && block < 4, "block must be in 0..3");
  const genheck::BlockSizes b = data->data.sizes();
  const Eigen::Index widths[] = {b.p, b.q, b.r, b.s};
  GH_REQUIRE(col < static_cast<size_t>(widths[block]), "column index out of range");
  return guarded([&] {
    return copy_string(data->data.column_name(block, static_cast<Eigen::Index>(col)), buf, len,
                       needed);
  });
}

gh_status gh_dataset_classic(const gh_dataset* data, gh_dataset** out) {
  GH_REQUIRE(data != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<gh_dataset>();
    handle->data = genheck::classic_design(data->data);
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_dataset_drop_columns(const gh_dataset* data, int block, const size_t* cols,
                                  size_t k, gh_dataset** out) {
  GH_REQUIRE(data != nullptr && out != nullptr && (k == 0 || cols != nullptr), "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<gh_dataset>();
    handle->data = data->data.without_columns(block, indices_from(cols, k));
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_loglik(const gh_dataset* data, const double* theta, size_t len, double* out) {
  GH_REQUIRE(data != nullptr && theta != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    *out = genheck::loglik(theta_for(data->data, theta, len), data->data);
    return GH_OK;
  });
}

gh_status gh_score(const gh_dataset* data, const double* theta, size_t len, double* out) {
  GH_REQUIRE(data != nullptr && theta != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    const Eigen::VectorXd g = genheck::score(theta_for(data->data, theta, len), data->data);
    std::copy(g.data(), g.data() + g.size(), out);
    return GH_OK;
  });
}

void gh_fit_options_init(gh_fit_options* options) {
  if (options == nullptr) return;
  const genheck::FitOptions defaults;
  options->max_iter = defaults.max_iter;
  options->grad_tol = 0.0;
  options->step_tol = defaults.step_tol;
  options->start = nullptr;
  options->start_len = 0;
}

gh_status gh_fit_model(const gh_dataset* data, gh_model_kind model, const gh_fit_options* options,
                       gh_fit** out) {
  GH_REQUIRE(data != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    const genheck::ModelKind kind = model_of(model);
    genheck::FitOptions opts;
    if (options != nullptr) {
      GH_REQUIRE(options->max_iter > 0, "max_iter must be positive");
      opts.max_iter = options->max_iter;
      if (options->grad_tol > 0.0) opts.grad_tol = options->grad_tol;
      opts.step_tol = options->step_tol;
      if (options->start != nullptr) {
        const genheck::Dataset& target = kind == genheck::ModelKind::kClassic
                                             ? genheck::classic_design(data->data)
                                             : data->data;
        opts.start = theta_for(target, options->start, options->start_len);
      }
    }
    auto handle = std::make_unique<gh_fit>();
    handle->result = kind == genheck::ModelKind::kClassic
                         ? genheck::fit_classic(data->data, opts)
                         : genheck::fit(data->data, opts);
    const gh_status status = fit_status(handle->result);
    if (status != GH_OK) g_last_error = handle->result.detail;
    *out = handle.release();
    return status;
  });
}

void gh_fit_destroy(gh_fit* fit) { delete fit; }

gh_status gh_fit_get_info(const gh_fit* fit, gh_fit_info* info) {
  GH_REQUIRE(fit != nullptr && info != nullptr, "null argument");
  const genheck::FitResult& r = fit->result;
  const genheck::BlockSizes sizes = r.sizes();
  info->model = r.kind == genheck::ModelKind::kClassic ? GH_MODEL_CLASSIC : GH_MODEL_GENERALIZED;
  info->converged = r.converged ? 1 : 0;
  info->status = fit_status(r);
  info->iterations = r.iterations;
  info->loglik = r.loglik;
  info->grad_norm = r.grad_norm;
  info->grad_tol = r.grad_tol;
  info->boundary_warning = r.boundary_warning ? 1 : 0;
  info->n = static_cast<size_t>(r.n);
  info->n_selected = static_cast<size_t>(r.n_selected);
  info->p = static_cast<size_t>(sizes.p);
  info->q = static_cast<size_t>(sizes.q);
  info->r = static_cast<size_t>(sizes.r);
  info->s = static_cast<size_t>(sizes.s);
  return GH_OK;
}

gh_status gh_fit_detail(const gh_fit* fit, char* buf, size_t len, size_t* needed) {
  GH_REQUIRE(fit != nullptr, "fit is null");
  return copy_string(fit->result.detail, buf, len, needed);
}

gh_status gh_fit_estimates(const gh_fit* fit, double* out, size_t len) {
  GH_REQUIRE(fit != nullptr && out != nullptr, "null argument");
  const Eigen::VectorXd flat = fit->result.theta_hat.flatten();
  if (len != static_cast<size_t>(flat.size()))
    return fail(GH_ERR_DIMENSION_MISMATCH, "expected " + std::to_string(flat.size()) + " entries");
  std::copy(flat.data(), flat.data() + flat.size(), out);
  return GH_OK;
}

gh_status gh_fit_std_errors(const gh_fit* fit, double* out, size_t len) {
  GH_REQUIRE(fit != nullptr && out != nullptr, "null argument");
  const Eigen::Index d = fit->result.sizes().total();
  if (len != static_cast<size_t>(d))
    return fail(GH_ERR_DIMENSION_MISMATCH, "expected " + std::to_string(d) + " entries");
  const Eigen::VectorXd& se = fit->result.std_errors;
  for (Eigen::Index j = 0; j < d; ++j)
    out[j] = j < se.size() ? se(j) : std::numeric_limits<double>::quiet_NaN();
  return GH_OK;
}

gh_status gh_fit_covariance(const gh_fit* fit, double* out, size_t len) {
  GH_REQUIRE(fit != nullptr && out != nullptr, "null argument");
  const Eigen::Index d = fit->result.sizes().total();
  if (len != static_cast<size_t>(d * d))
    return fail(GH_ERR_DIMENSION_MISMATCH, "expected " + std::to_string(d * d) + " entries");
  const Eigen::MatrixXd& cov = fit->result.covariance;
  if (cov.rows() != d || cov.cols() != d)
    return fail(GH_ERR_NOT_CONVERGED, "covariance unavailable for this fit");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out[i * d + j] = cov(i, j);
  return GH_OK;
}

gh_status gh_fit_coefficient_name(const gh_fit* fit, size_t index, char* buf, size_t len,
                                  size_t* needed) {
  GH_REQUIRE(fit != nullptr, "fit is null");
  const genheck::BlockSizes sizes = fit->result.sizes();
  GH_REQUIRE(index < static_cast<size_t>(sizes.total()), "index out of range");
  const genheck::DesignNames& names = fit->result.names;
  const std::vector<std::string>* blocks[4] = {&names.outcome, &names.selection,
                                               &names.dispersion, &names.correlation};
  const Eigen::Index widths[4] = {sizes.p, sizes.q, sizes.r, sizes.s};
  auto j = static_cast<Eigen::Index>(index);
  int b = 0;
  while (j >= widths[b]) j -= widths[b++];
  const auto& list = *blocks[b];
  const std::string name = static_cast<size_t>(j) < list.size()
                               ? list[static_cast<size_t>(j)]
                               : "v" + std::to_string(j + 1);
  return copy_string(name, buf, len, needed);
}

gh_status gh_fit_summary(const gh_fit* fit, double level, gh_summary_row* rows, size_t len) {
  GH_REQUIRE(fit != nullptr && rows != nullptr, "null argument");
  return guarded([&] {
    const std::vector<genheck::SummaryRow> table = genheck::summary(fit->result, level);
    if (len != table.size())
      return fail(GH_ERR_DIMENSION_MISMATCH, "expected " + std::to_string(table.size()) + " rows");
    const genheck::BlockSizes sizes = fit->result.sizes();
    const Eigen::Index widths[4] = {sizes.p, sizes.q, sizes.r, sizes.s};
    int block = 0;
    Eigen::Index col = 0;
    for (size_t i = 0; i < table.size(); ++i) {
      while (col >= widths[block]) {
        col = 0;
        ++block;
      }
      rows[i].block = block;
      rows[i].column = static_cast<size_t>(col++);
      rows[i].estimate = table[i].estimate;
      rows[i].std_error = table[i].std_error;
      rows[i].z_value = table[i].z_value;
      rows[i].p_value = table[i].p_value;
      rows[i].ci_low = table[i].ci_low;
      rows[i].ci_high = table[i].ci_high;
    }
    return GH_OK;
  });
}

gh_status gh_lr_test(const gh_fit* full, const gh_fit* restricted, int df, gh_test_result* out) {
  GH_REQUIRE(full != nullptr && restricted != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    *out = to_c(genheck::lr_test(full->result, restricted->result, df));
    return GH_OK;
  });
}

gh_status gh_wald_test(const gh_fit* fit, const size_t* indices, const double* values, size_t k,
                       gh_test_result* out) {
  GH_REQUIRE(fit != nullptr && out != nullptr && (k == 0 || indices != nullptr), "null argument");
  return guarded([&] {
    genheck::Restriction restriction;
    restriction.indices = indices_from(indices, k);
    restriction.values = values != nullptr ? vector_from(values, k)
                                           : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    *out = to_c(genheck::wald_test(fit->result, restriction));
    return GH_OK;
  });
}

gh_status gh_gradient_test(const gh_dataset* data, const double* theta_restricted,
                           const double* theta_full, size_t len, int df, gh_test_result* out) {
  GH_REQUIRE(data != nullptr && theta_restricted != nullptr && theta_full != nullptr &&
                 out != nullptr,
             "null argument");
  return guarded([&] {
    *out = to_c(genheck::gradient_test(theta_for(data->data, theta_restricted, len),
                                       theta_for(data->data, theta_full, len), data->data, df));
    return GH_OK;
  });
}

gh_status gh_test_zero_restriction(const gh_dataset* data, const gh_fit* full, int block,
                                   const size_t* cols, size_t k, gh_test_result results[3],
                                   gh_fit** restricted_out) {
  GH_REQUIRE(data != nullptr && full != nullptr && results != nullptr &&
                 (k == 0 || cols != nullptr),
             "null argument");
  if (restricted_out) *restricted_out = nullptr;
  return guarded([&] {
    genheck::ZeroRestrictionTests tests =
        genheck::test_zero_restriction(data->data, full->result, block, indices_from(cols, k));
    results[0] = to_c(tests.lr);
    results[1] = to_c(tests.wald);
    results[2] = to_c(tests.gradient);
    if (restricted_out) {
      auto handle = std::make_unique<gh_fit>();
      handle->result = std::move(tests.restricted);
      *restricted_out = handle.release();
    }
    return GH_OK;
  });
}

gh_status gh_psi(double mu2, double sigma, double rho, double* out) {
  GH_REQUIRE(out != nullptr, "out is null");
  return guarded([&] {
    *out = genheck::psi(mu2, sigma, rho);
    return GH_OK;
  });
}

gh_status gh_score_residuals(const gh_fit* fit, const gh_dataset* data, double* ordinary,
                             double* standardized, size_t* indices, size_t n_selected,
                             double* all_obs, size_t n) {
  GH_REQUIRE(fit != nullptr && data != nullptr, "null argument");
  return guarded([&] {
    const genheck::ResidualReport report = genheck::score_residuals(fit->result, data->data);
    if (n_selected != static_cast<size_t>(report.ordinary.size()) ||
        n != static_cast<size_t>(report.all_obs.size()))
      return fail(GH_ERR_DIMENSION_MISMATCH, "residual buffer sizes do not match the data");
    for (size_t i = 0; i < n_selected; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (ordinary) ordinary[i] = report.ordinary(k);
      if (standardized) standardized[i] = report.standardized(k);
      if (indices) indices[i] = static_cast<size_t>(report.indices[i]);
    }
    if (all_obs)
      std::copy(report.all_obs.data(), report.all_obs.data() + report.all_obs.size(), all_obs);
    return GH_OK;
  });
}

gh_status gh_envelope(const gh_fit* fit, const gh_dataset* data, int n_sim, double level,
                      uint64_t seed, int threads, size_t n, double* theoretical, double* observed,
                      size_t* order, double* lower, double* upper, gh_envelope_info* info) {
  GH_REQUIRE(fit != nullptr && data != nullptr, "null argument");
  return guarded([&] {
    if (n != static_cast<size_t>(data->data.n()))
      return fail(GH_ERR_DIMENSION_MISMATCH, "envelope buffers must have n entries");
    const genheck::EnvelopeBand band =
        genheck::envelope(fit->result, data->data, n_sim, level, seed, threads);
    for (size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (theoretical) theoretical[i] = band.theoretical(k);
      if (observed) observed[i] = band.observed(k);
      if (order) order[i] = static_cast<size_t>(band.order[i]);
      if (lower) lower[i] = band.lower(k);
      if (upper) upper[i] = band.upper(k);
    }
    if (info) {
      info->level = band.level;
      info->n_sim = band.n_sim;
      info->n_failed = band.n_failed;
      info->inside_fraction = band.inside_fraction();
    }
    return GH_OK;
  });
}

gh_status gh_cook_distance(const gh_fit* fit, const gh_dataset* data, int weight,
                           const size_t* rows, size_t n_rows, int threads, double* distances,
                           size_t len, double* threshold, int* failures) {
  GH_REQUIRE(fit != nullptr && data != nullptr && distances != nullptr, "null argument");
  GH_REQUIRE(weight == GH_COOK_INFORMATION || weight == GH_COOK_COVARIANCE, "unknown weight");
  return guarded([&] {
    const std::vector<Eigen::Index> selected =
        rows != nullptr ? indices_from(rows, n_rows) : std::vector<Eigen::Index>{};
    const size_t expected = rows != nullptr ? n_rows : static_cast<size_t>(data->data.n());
    if (len != expected)
      return fail(GH_ERR_DIMENSION_MISMATCH,
                  "distance buffer needs " + std::to_string(expected) + " entries");
    const genheck::CookReport report = genheck::cook_distance(
        fit->result, data->data,
        weight == GH_COOK_COVARIANCE ? genheck::CookWeight::kCovariance
                                     : genheck::CookWeight::kInformation,
        selected, threads);
    std::copy(report.distance.data(), report.distance.data() + report.distance.size(), distances);
    if (threshold) *threshold = report.threshold;
    if (failures) *failures = report.failures;
    return GH_OK;
  });
}

gh_status gh_scenario_dataset(int scenario, size_t n, uint64_t seed, int null_kappa,
                              gh_dataset** out) {
  GH_REQUIRE(out != nullptr, "out is null");
  *out = nullptr;
  return guarded([&] {
    genheck::Scenario spec = genheck::make_scenario(scenario, static_cast<Eigen::Index>(n));
    if (null_kappa) spec = genheck::null_scenario(spec);
    auto handle = std::make_unique<gh_dataset>();
    handle->data = genheck::scenario(spec, seed);
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_gen_dataset(const gh_dataset* designs, const double* theta, size_t len,
                         uint64_t seed, gh_dataset** out) {
  GH_REQUIRE(designs != nullptr && theta != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<gh_dataset>();
    handle->data = genheck::gen_dataset(theta_for(designs->data, theta, len),
                                        genheck::designs_of(designs->data), seed);
    *out = handle.release();
    return GH_OK;
  });
}

gh_status gh_monte_carlo(int scenario, size_t n, int n_reps, uint64_t master_seed,
                         gh_model_kind model, int null_kappa, const double* levels,
                         size_t n_levels, int threads, gh_mc_summary** out) {
  GH_REQUIRE(out != nullptr, "out is null");
  *out = nullptr;
  return guarded([&] {
    genheck::Scenario spec = genheck::make_scenario(scenario, static_cast<Eigen::Index>(n));
    if (null_kappa) spec = genheck::null_scenario(spec);
    const genheck::ModelKind kind = model_of(model);
    auto handle = std::make_unique<gh_mc_summary>();
    if (levels != nullptr && n_levels > 0) {
      const std::vector<double> lv(levels, levels + n_levels);
      handle->summary = genheck::size_power(spec, n_reps, master_seed, lv, kind, threads);
    } else {
      handle->summary = genheck::monte_carlo(spec, n_reps, master_seed, kind, threads);
    }
    handle->parameters_csv = genheck::mc_parameters_csv(handle->summary);
    handle->rejections_csv = genheck::mc_rejections_csv(handle->summary);
    *out = handle.release();
    return GH_OK;
  });
}

void gh_mc_summary_destroy(gh_mc_summary* summary) { delete summary; }

gh_status gh_mc_summary_info(const gh_mc_summary* summary, gh_mc_info* info) {
  GH_REQUIRE(summary != nullptr && info != nullptr, "null argument");
  const genheck::McSummary& s = summary->summary;
  info->scenario = s.scenario;
  info->n = static_cast<size_t>(s.n);
  info->model = s.model == genheck::ModelKind::kClassic ? GH_MODEL_CLASSIC : GH_MODEL_GENERALIZED;
  info->replicates = s.replicates;
  info->failures = s.failures;
  info->n_parameters = s.parameters.size();
  info->n_rejections = s.rejections.size();
  return GH_OK;
}

gh_status gh_mc_summary_parameter(const gh_mc_summary* summary, size_t index,
                                  gh_mc_parameter* out) {
  GH_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  GH_REQUIRE(index < summary->summary.parameters.size(), "index out of range");
  const genheck::ParameterSummary& p = summary->summary.parameters[index];
  std::memset(out->name, 0, sizeof(out->name));
  std::strncpy(out->name, p.name.c_str(), sizeof(out->name) - 1);
  out->truth = p.truth;
  out->mean = p.mean;
  out->rmse = p.rmse;
  return GH_OK;
}

gh_status gh_mc_summary_rejection(const gh_mc_summary* summary, size_t index,
                                  gh_mc_rejection* out) {
  GH_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  GH_REQUIRE(index < summary->summary.rejections.size(), "index out of range");
  const genheck::RejectionRate& r = summary->summary.rejections[index];
  out->test = static_cast<int>(r.test);
  out->level = r.level;
  out->rate = r.rate;
  return GH_OK;
}

gh_status gh_mc_summary_csv(const gh_mc_summary* summary, int table, char* buf, size_t len,
                            size_t* needed) {
  GH_REQUIRE(summary != nullptr, "summary is null");
  GH_REQUIRE(table == 0 || table == 1, "table must be 0 or 1");
  return copy_string(table == 0 ? summary->parameters_csv : summary->rejections_csv, buf, len,
                     needed);
}

}  // extern "C"
