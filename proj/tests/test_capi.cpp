// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "genheck/genheck.h"

namespace {

std::string data_path(const char* file) {
  const char* dir = std::getenv("GENHECK_DATA_DIR");
  return std::string(dir ? dir : "data") + "/" + file;
}

struct DatasetPtr {
  gh_dataset* p = nullptr;
  ~DatasetPtr() { gh_dataset_destroy(p); }
};

struct FitPtr {
  gh_fit* p = nullptr;
  ~FitPtr() { gh_fit_destroy(p); }
};

gh_status read_fixture(gh_dataset** out) {
  static const char* outcome[] = {"age", "female", "educ", "blhisp", "totchr", "ins"};
  static const char* selection[] = {"age", "female", "educ", "blhisp", "totchr", "ins", "income"};
  static const char* dispersion[] = {"age", "totchr", "ins"};
  static const char* correlation[] = {"female", "totchr"};
  gh_model_config c;
  gh_model_config_init(&c);
  c.outcome = "lnambx";
  c.selection = "dambexp";
  c.outcome_covariates = outcome;
  c.n_outcome_covariates = 6;
  c.selection_covariates = selection;
  c.n_selection_covariates = 7;
  c.dispersion_covariates = dispersion;
  c.n_dispersion_covariates = 3;
  c.correlation_covariates = correlation;
  c.n_correlation_covariates = 2;
  return gh_dataset_read_csv(data_path("meps_fixture.csv").c_str(), &c, out);
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_EQ(gh_api_version(), GENHECK_API_VERSION);
  EXPECT_STREQ(gh_status_name(GH_OK), "Ok");
  EXPECT_STREQ(gh_status_name(GH_ERR_PARSE), "ParseError");
  EXPECT_STREQ(gh_status_name(GH_ERR_BUFFER_TOO_SMALL), "BufferTooSmall");
}

TEST(CApi, NullArgumentsAreRejected) {
  gh_dims dims;
  EXPECT_EQ(gh_dataset_dims(nullptr, &dims), GH_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::strlen(gh_last_error()), 0u);
  gh_dataset_destroy(nullptr);
  gh_fit_destroy(nullptr);
  gh_mc_summary_destroy(nullptr);
}

TEST(CApi, CreateFromArrays) {
  const double y[] = {1.0, 0.0, 2.0, 0.5};
  const int u[] = {1, 0, 1, 1};
  const double X[] = {1, 0.1, 1, 0.2, 1, 0.3, 1, 0.4};
  const double W[] = {1, 1, 1, 1};
  DatasetPtr d;
  ASSERT_EQ(gh_dataset_create(4, y, u, X, 2, W, 1, W, 1, W, 1, &d.p), GH_OK);
  gh_dims dims;
  ASSERT_EQ(gh_dataset_dims(d.p, &dims), GH_OK);
  EXPECT_EQ(dims.n, 4u);
  EXPECT_EQ(dims.n_selected, 3u);
  EXPECT_EQ(dims.p, 2u);

  const int bad_u[] = {1, 0, 2, 1};
  DatasetPtr bad;
  EXPECT_EQ(gh_dataset_create(4, y, bad_u, X, 2, W, 1, W, 1, W, 1, &bad.p), GH_ERR_VALUE);
  EXPECT_EQ(bad.p, nullptr);
  const int all_u[] = {1, 1, 1, 1};
  DatasetPtr uncensored;
  ASSERT_EQ(gh_dataset_create(4, y, all_u, X, 2, W, 1, W, 1, W, 1, &uncensored.p), GH_OK);
  FitPtr f;
  EXPECT_EQ(gh_fit_model(uncensored.p, GH_MODEL_GENERALIZED, nullptr, &f.p),
            GH_ERR_MISSING_CENSORING);
  EXPECT_EQ(f.p, nullptr);
}

TEST(CApi, IngestErrorsMapToStatusCodes) {
  gh_model_config c;
  gh_model_config_init(&c);
  c.outcome = "lnambx";
  c.selection = "dambexp";
  DatasetPtr d;
  EXPECT_EQ(gh_dataset_read_csv("/nonexistent.csv", &c, &d.p), GH_ERR_IO);
  c.outcome = "no_such_column";
  EXPECT_EQ(gh_dataset_read_csv(data_path("meps_fixture.csv").c_str(), &c, &d.p), GH_ERR_SCHEMA);
  EXPECT_NE(std::string(gh_last_error()).find("no_such_column"), std::string::npos);
}

TEST(CApi, BufferContract) {
  DatasetPtr d;
  ASSERT_EQ(read_fixture(&d.p), GH_OK);
  size_t needed = 0;
  ASSERT_EQ(gh_dataset_column_name(d.p, GH_BLOCK_SELECTION, 7, nullptr, 0, &needed), GH_OK);
  EXPECT_EQ(needed, std::strlen("income") + 1);
  char small[3];
  EXPECT_EQ(gh_dataset_column_name(d.p, GH_BLOCK_SELECTION, 7, small, sizeof small, &needed),
            GH_ERR_BUFFER_TOO_SMALL);
  std::vector<char> buf(needed);
  ASSERT_EQ(gh_dataset_column_name(d.p, GH_BLOCK_SELECTION, 7, buf.data(), buf.size(), &needed),
            GH_OK);
  EXPECT_STREQ(buf.data(), "income");
  EXPECT_EQ(gh_dataset_column_name(d.p, GH_BLOCK_SELECTION, 8, nullptr, 0, &needed),
            GH_ERR_INVALID_ARGUMENT);

  ASSERT_EQ(gh_dataset_csv(d.p, nullptr, 0, &needed), GH_OK);
  std::vector<char> csv(needed);
  ASSERT_EQ(gh_dataset_csv(d.p, csv.data(), csv.size(), &needed), GH_OK);
  EXPECT_EQ(std::string(csv.data()).rfind("y,u,age,", 0), 0u);
}

TEST(CApi, FitsTheFixture) {
  DatasetPtr d;
  ASSERT_EQ(read_fixture(&d.p), GH_OK);
  int excl = -1;
  ASSERT_EQ(gh_dataset_exclusion_restriction(d.p, &excl), GH_OK);
  EXPECT_EQ(excl, 1);

  FitPtr f;
  ASSERT_EQ(gh_fit_model(d.p, GH_MODEL_GENERALIZED, nullptr, &f.p), GH_OK) << gh_last_error();
  gh_fit_info info;
  ASSERT_EQ(gh_fit_get_info(f.p, &info), GH_OK);
  EXPECT_TRUE(info.converged);
  EXPECT_EQ(info.n, 200u);
  EXPECT_EQ(info.n_selected, 176u);
  const size_t dim = info.p + info.q + info.r + info.s;
  EXPECT_EQ(dim, 22u);
  EXPECT_LE(info.grad_norm, info.grad_tol);

  std::vector<double> theta(dim), se(dim), score(dim), cov(dim * dim);
  ASSERT_EQ(gh_fit_estimates(f.p, theta.data(), dim), GH_OK);
  ASSERT_EQ(gh_fit_std_errors(f.p, se.data(), dim), GH_OK);
  ASSERT_EQ(gh_fit_covariance(f.p, cov.data(), cov.size()), GH_OK);
  EXPECT_EQ(gh_fit_estimates(f.p, theta.data(), dim - 1), GH_ERR_DIMENSION_MISMATCH);
  for (size_t j = 0; j < dim; ++j) EXPECT_NEAR(se[j] * se[j], cov[j * dim + j], 1e-12);

  double ll = 0.0;
  ASSERT_EQ(gh_loglik(d.p, theta.data(), dim, &ll), GH_OK);
  EXPECT_DOUBLE_EQ(ll, info.loglik);
  ASSERT_EQ(gh_score(d.p, theta.data(), dim, score.data()), GH_OK);
  for (double s : score) EXPECT_LE(std::abs(s), info.grad_tol);
  EXPECT_EQ(gh_loglik(d.p, theta.data(), dim + 1, &ll), GH_ERR_DIMENSION_MISMATCH);

  std::vector<gh_summary_row> rows(dim);
  ASSERT_EQ(gh_fit_summary(f.p, 0.95, rows.data(), dim), GH_OK);
  EXPECT_EQ(rows[0].block, GH_BLOCK_OUTCOME);
  EXPECT_EQ(rows[dim - 1].block, GH_BLOCK_CORRELATION);
  EXPECT_NEAR(rows[3].z_value, theta[3] / se[3], 1e-12);

  size_t needed = 0;
  char name[64];
  ASSERT_EQ(gh_fit_coefficient_name(f.p, dim - 1, name, sizeof name, &needed), GH_OK);
  EXPECT_STREQ(name, "totchr");
}

TEST(CApi, ReportsNonConvergenceWithTheFit) {
  DatasetPtr d;
  ASSERT_EQ(gh_scenario_dataset(1, 400, 3, 0, &d.p), GH_OK);
  gh_fit_options o;
  gh_fit_options_init(&o);
  o.max_iter = 2;
  std::vector<double> zero(11, 0.0);
  o.start = zero.data();
  o.start_len = zero.size();
  FitPtr f;
  ASSERT_EQ(gh_fit_model(d.p, GH_MODEL_GENERALIZED, &o, &f.p), GH_ERR_NON_CONVERGENCE);
  ASSERT_NE(f.p, nullptr);
  gh_fit_info info;
  ASSERT_EQ(gh_fit_get_info(f.p, &info), GH_OK);
  EXPECT_FALSE(info.converged);
  EXPECT_EQ(info.status, GH_ERR_NON_CONVERGENCE);
  size_t needed = 0;
  ASSERT_EQ(gh_fit_detail(f.p, nullptr, 0, &needed), GH_OK);
  EXPECT_GT(needed, 1u);
  std::vector<gh_summary_row> rows(11);
  EXPECT_EQ(gh_fit_summary(f.p, 0.95, rows.data(), 11), GH_ERR_NOT_CONVERGED);

  o.start_len = 3;
  FitPtr g;
  EXPECT_EQ(gh_fit_model(d.p, GH_MODEL_GENERALIZED, &o, &g.p), GH_ERR_DIMENSION_MISMATCH);
  EXPECT_EQ(g.p, nullptr);
}

TEST(CApi, ZeroRestrictionTests) {
  DatasetPtr d;
  ASSERT_EQ(gh_scenario_dataset(1, 600, 5, 0, &d.p), GH_OK);
  FitPtr full;
  ASSERT_EQ(gh_fit_model(d.p, GH_MODEL_GENERALIZED, nullptr, &full.p), GH_OK);
  const size_t cols[] = {0, 1};
  gh_test_result r[3];
  FitPtr restricted;
  ASSERT_EQ(gh_test_zero_restriction(d.p, full.p, GH_BLOCK_CORRELATION, cols, 2, r, &restricted.p),
            GH_OK)
      << gh_last_error();
  EXPECT_EQ(r[0].kind, GH_TEST_LR);
  EXPECT_EQ(r[1].kind, GH_TEST_WALD);
  EXPECT_EQ(r[2].kind, GH_TEST_GRADIENT);
  for (const auto& t : r) EXPECT_EQ(t.df, 2);

  gh_test_result lr;
  ASSERT_EQ(gh_lr_test(full.p, restricted.p, 2, &lr), GH_OK);
  EXPECT_DOUBLE_EQ(lr.statistic, r[0].statistic);
  EXPECT_EQ(gh_lr_test(restricted.p, full.p, 2, &lr), GH_ERR_NOT_NESTED);

  const size_t idx[] = {9, 10};
  const double zero[] = {0.0, 0.0};
  gh_test_result wald;
  ASSERT_EQ(gh_wald_test(full.p, idx, zero, 2, &wald), GH_OK);
  EXPECT_DOUBLE_EQ(wald.statistic, r[1].statistic);
  const size_t out_of_range[] = {11};
  EXPECT_EQ(gh_wald_test(full.p, out_of_range, zero, 1, &wald), GH_ERR_INVALID_ARGUMENT);
}

TEST(CApi, DiagnosticsShapes) {
  DatasetPtr d;
  ASSERT_EQ(gh_scenario_dataset(1, 200, 2, 0, &d.p), GH_OK);
  FitPtr f;
  ASSERT_EQ(gh_fit_model(d.p, GH_MODEL_GENERALIZED, nullptr, &f.p), GH_OK);
  gh_dims dims;
  gh_dataset_dims(d.p, &dims);
  std::vector<double> ord(dims.n_selected), st(dims.n_selected), all(dims.n);
  std::vector<size_t> idx(dims.n_selected);
  ASSERT_EQ(gh_score_residuals(f.p, d.p, ord.data(), st.data(), idx.data(), dims.n_selected,
                               all.data(), dims.n),
            GH_OK);
  EXPECT_EQ(gh_score_residuals(f.p, d.p, ord.data(), st.data(), idx.data(), dims.n_selected,
                               all.data(), dims.n - 1),
            GH_ERR_DIMENSION_MISMATCH);

  const size_t rows[] = {0, 5};
  double dist[2], threshold = 0.0;
  int failures = -1;
  ASSERT_EQ(gh_cook_distance(f.p, d.p, GH_COOK_INFORMATION, rows, 2, 1, dist, 2, &threshold,
                             &failures),
            GH_OK);
  EXPECT_EQ(failures, 0);
  EXPECT_NEAR(threshold, 22.0 / 200.0, 1e-15);

  double psi = 0.0;
  ASSERT_EQ(gh_psi(0.0, 1.0, 0.0, &psi), GH_OK);
  EXPECT_NEAR(psi, 2.0 / M_PI, 1e-10);
  EXPECT_EQ(gh_psi(0.0, 1.0, 1.5, &psi), GH_ERR_DOMAIN);
}

TEST(CApi, MonteCarloSummaryAndCsv) {
  const double levels[] = {0.05};
  gh_mc_summary* mc = nullptr;
  ASSERT_EQ(gh_monte_carlo(1, 300, 3, 1, GH_MODEL_GENERALIZED, 0, levels, 1, 1, &mc), GH_OK);
  gh_mc_info info;
  ASSERT_EQ(gh_mc_summary_info(mc, &info), GH_OK);
  EXPECT_EQ(info.n_parameters, 11u);
  EXPECT_EQ(info.n_rejections, 3u);
  gh_mc_parameter p;
  ASSERT_EQ(gh_mc_summary_parameter(mc, 0, &p), GH_OK);
  EXPECT_EQ(p.truth, 1.1);
  EXPECT_EQ(gh_mc_summary_parameter(mc, 11, &p), GH_ERR_INVALID_ARGUMENT);
  size_t needed = 0;
  ASSERT_EQ(gh_mc_summary_csv(mc, 0, nullptr, 0, &needed), GH_OK);
  std::vector<char> buf(needed);
  ASSERT_EQ(gh_mc_summary_csv(mc, 0, buf.data(), buf.size(), &needed), GH_OK);
  EXPECT_EQ(std::string(buf.data()).rfind("parameter,true,mean,rmse\n", 0), 0u);
  gh_mc_summary_destroy(mc);

  EXPECT_EQ(gh_monte_carlo(9, 300, 3, 1, GH_MODEL_GENERALIZED, 0, nullptr, 0, 1, &mc),
            GH_ERR_INVALID_SCENARIO);
}

}  // namespace
