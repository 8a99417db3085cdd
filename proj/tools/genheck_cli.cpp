// genheck command-line front end. Everything goes through the C API.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "genheck/genheck.h"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNonConvergence = 2;

const char* const kEquations[4] = {"outcome", "selection", "dispersion", "correlation"};

// Raised for anything the user got wrong; maps to exit code 1.
struct InputError {
  std::string message;
};

struct GhFailure {
  gh_status status;
  std::string message;
};

void check(gh_status status) {
  if (status != GH_OK)
    throw GhFailure{status, std::string(gh_status_name(status)) + ": " + gh_last_error()};
}

struct DatasetDeleter {
  void operator()(gh_dataset* d) const { gh_dataset_destroy(d); }
};
struct FitDeleter {
  void operator()(gh_fit* f) const { gh_fit_destroy(f); }
};
struct McDeleter {
  void operator()(gh_mc_summary* s) const { gh_mc_summary_destroy(s); }
};
using DatasetPtr = std::unique_ptr<gh_dataset, DatasetDeleter>;
using FitPtr = std::unique_ptr<gh_fit, FitDeleter>;
using McPtr = std::unique_ptr<gh_mc_summary, McDeleter>;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int equation_index(const std::string& name) {
  for (int b = 0; b < 4; ++b)
    if (name == kEquations[b]) return b;
  throw InputError{"unknown equation '" + name +
                   "' (expected outcome, selection, dispersion or correlation)"};
}

int default_threads() {
  if (const char* env = std::getenv("GENHECK_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (...) {
    }
    std::cerr << "warning: ignoring GENHECK_THREADS='" << env << "'\n";
  }
  return 1;
}

// JSON numbers cannot be NaN or infinite.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError{"cannot open '" + path + "' for writing"};
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_text(const std::string& path, const std::string& text) {
  Output out(path);
  out.stream() << text;
  if (!out.stream()) throw InputError{"write to '" + path + "' failed"};
}

// ---- model configuration -------------------------------------------------

struct DataOptions {
  std::string config_path;
  std::string data;
  std::string outcome;
  std::string selection;
  std::string covariates[4];
  std::string no_intercept;
};

struct ResolvedConfig {
  std::string data;
  std::string outcome;
  std::string selection;
  std::vector<std::string> covariates[4];
  bool intercepts[4] = {true, true, true, true};

  ordered_json to_json() const {
    ordered_json j;
    j["data"] = data;
    j["outcome"] = outcome;
    j["selection"] = selection;
    for (int b = 0; b < 4; ++b) j[std::string(kEquations[b]) + "_covariates"] = covariates[b];
    ordered_json ic;
    for (int b = 0; b < 4; ++b) ic[kEquations[b]] = intercepts[b];
    j["intercepts"] = ic;
    return j;
  }
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--config", o.config_path,
                  "JSON model configuration; command-line flags override its fields");
  cmd->add_option("--data", o.data, "input CSV with a header row");
  cmd->add_option("--outcome", o.outcome, "outcome column");
  cmd->add_option("--selection", o.selection, "selection indicator column (0/1)");
  const char* flags[4] = {"--outcome-covariates", "--selection-covariates",
                          "--dispersion-covariates", "--correlation-covariates"};
  for (int b = 0; b < 4; ++b)
    cmd->add_option(flags[b], o.covariates[b],
                    std::string("comma-separated ") + kEquations[b] + " covariates");
  cmd->add_option("--no-intercept", o.no_intercept,
                  "comma-separated equations fitted without an intercept, or 'all'");
}

ResolvedConfig resolve(const DataOptions& o, CLI::App* cmd) {
  ResolvedConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw InputError{"cannot read config '" + o.config_path + "'"};
    nlohmann::json j;
    try {
      in >> j;
      if (j.contains("data")) c.data = j.at("data").get<std::string>();
      if (j.contains("outcome")) c.outcome = j.at("outcome").get<std::string>();
      if (j.contains("selection")) c.selection = j.at("selection").get<std::string>();
      for (int b = 0; b < 4; ++b) {
        const std::string key = std::string(kEquations[b]) + "_covariates";
        if (j.contains(key)) c.covariates[b] = j.at(key).get<std::vector<std::string>>();
      }
      if (j.contains("intercepts")) {
        const auto& ic = j.at("intercepts");
        for (int b = 0; b < 4; ++b)
          if (ic.contains(kEquations[b])) c.intercepts[b] = ic.at(kEquations[b]).get<bool>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError{"invalid config '" + o.config_path + "': " + e.what()};
    }
  }
  if (!o.data.empty()) c.data = o.data;
  if (!o.outcome.empty()) c.outcome = o.outcome;
  if (!o.selection.empty()) c.selection = o.selection;
  const char* flags[4] = {"--outcome-covariates", "--selection-covariates",
                          "--dispersion-covariates", "--correlation-covariates"};
  for (int b = 0; b < 4; ++b)
    if (cmd->count(flags[b]) > 0) c.covariates[b] = split_list(o.covariates[b]);
  if (!o.no_intercept.empty()) {
    for (const std::string& eq : split_list(o.no_intercept)) {
      if (eq == "all") {
        for (bool& flag : c.intercepts) flag = false;
      } else {
        c.intercepts[equation_index(eq)] = false;
      }
    }
  }
  if (c.data.empty()) throw InputError{"no input data (use --data or the config 'data' field)"};
  if (c.outcome.empty() || c.selection.empty())
    throw InputError{"outcome and selection columns are required"};
  return c;
}

DatasetPtr load(const ResolvedConfig& c) {
  std::vector<const char*> lists[4];
  for (int b = 0; b < 4; ++b)
    for (const auto& name : c.covariates[b]) lists[b].push_back(name.c_str());
  gh_model_config cfg;
  gh_model_config_init(&cfg);
  cfg.outcome = c.outcome.c_str();
  cfg.selection = c.selection.c_str();
  cfg.outcome_covariates = lists[0].data();
  cfg.n_outcome_covariates = lists[0].size();
  cfg.selection_covariates = lists[1].data();
  cfg.n_selection_covariates = lists[1].size();
  cfg.dispersion_covariates = lists[2].data();
  cfg.n_dispersion_covariates = lists[2].size();
  cfg.correlation_covariates = lists[3].data();
  cfg.n_correlation_covariates = lists[3].size();
  for (int b = 0; b < 4; ++b) cfg.intercepts[b] = c.intercepts[b] ? 1 : 0;
  gh_dataset* raw = nullptr;
  check(gh_dataset_read_csv(c.data.c_str(), &cfg, &raw));
  DatasetPtr data(raw);
  gh_dims dims;
  check(gh_dataset_dims(data.get(), &dims));
  std::cerr << "read " << dims.n << " rows (" << dims.n - dims.n_selected << " censored) from "
            << c.data << "\n";
  int exclusion = 1;
  check(gh_dataset_exclusion_restriction(data.get(), &exclusion));
  if (!exclusion)
    std::cerr << "warning: every selection covariate also enters the outcome equation; "
                 "an exclusion restriction is advisable for identification\n";
  return data;
}

gh_model_kind model_kind(const std::string& name) {
  if (name == "generalized") return GH_MODEL_GENERALIZED;
  if (name == "classic") return GH_MODEL_CLASSIC;
  throw InputError{"unknown model '" + name + "'"};
}

const char* model_name(int kind) { return kind == GH_MODEL_CLASSIC ? "classic" : "generalized"; }

const char* test_name(int kind) {
  switch (kind) {
    case GH_TEST_LR: return "LR";
    case GH_TEST_WALD: return "Wald";
    case GH_TEST_GRADIENT: return "Gradient";
  }
  return "unknown";
}

std::string get_name(const gh_dataset* data, int block, size_t col) {
  size_t needed = 0;
  check(gh_dataset_column_name(data, block, col, nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(gh_dataset_column_name(data, block, col, s.data(), s.size(), &needed));
  s.resize(needed - 1);
  return s;
}

// Fits and reports status; non-convergence leaves a usable handle.
FitPtr run_fit(const gh_dataset* data, gh_model_kind kind, int max_iter, gh_status* status) {
  gh_fit_options options;
  gh_fit_options_init(&options);
  options.max_iter = max_iter;
  gh_fit* raw = nullptr;
  *status = gh_fit_model(data, kind, &options, &raw);
  if (raw == nullptr) check(*status);
  if (*status != GH_OK)
    std::cerr << "warning: fit did not converge (" << gh_status_name(*status)
              << "): " << gh_last_error() << "\n";
  return FitPtr(raw);
}

// Design the fit was computed on: the classic model collapses E and V.
DatasetPtr fitted_design(const gh_dataset* data, gh_model_kind kind) {
  gh_dataset* raw = nullptr;
  if (kind == GH_MODEL_CLASSIC) {
    check(gh_dataset_classic(data, &raw));
  } else {
    check(gh_dataset_drop_columns(data, 0, nullptr, 0, &raw));
  }
  return DatasetPtr(raw);
}

gh_fit_info fit_info(const gh_fit* fit) {
  gh_fit_info info;
  check(gh_fit_get_info(fit, &info));
  return info;
}

ordered_json fit_report(const gh_fit* fit, const gh_dataset* design, double level) {
  const gh_fit_info info = fit_info(fit);
  const size_t d = info.p + info.q + info.r + info.s;
  ordered_json coefficients = ordered_json::array();
  std::vector<gh_summary_row> rows(d);
  std::vector<double> estimates(d);
  check(gh_fit_estimates(fit, estimates.data(), d));
  const bool have_summary = info.converged && gh_fit_summary(fit, level, rows.data(), d) == GH_OK;
  const size_t widths[4] = {info.p, info.q, info.r, info.s};
  size_t j = 0;
  for (int b = 0; b < 4; ++b) {
    for (size_t c = 0; c < widths[b]; ++c, ++j) {
      ordered_json row;
      row["equation"] = kEquations[b];
      row["name"] = get_name(design, b, c);
      row["estimate"] = number(estimates[j]);
      if (have_summary) {
        row["std_error"] = number(rows[j].std_error);
        row["z"] = number(rows[j].z_value);
        row["p"] = number(rows[j].p_value);
        row["ci_low"] = number(rows[j].ci_low);
        row["ci_high"] = number(rows[j].ci_high);
      } else {
        for (const char* key : {"std_error", "z", "p", "ci_low", "ci_high"}) row[key] = nullptr;
      }
      coefficients.push_back(row);
    }
  }
  ordered_json report;
  report["model"] = model_name(info.model);
  report["coefficients"] = coefficients;
  report["loglik"] = number(info.loglik);
  report["n"] = info.n;
  report["n_selected"] = info.n_selected;
  report["converged"] = info.converged != 0;
  report["iterations"] = info.iterations;
  report["status"] = gh_status_name(static_cast<gh_status>(info.status));
  report["grad_norm"] = number(info.grad_norm);
  report["boundary_warning"] = info.boundary_warning != 0;
  report["level"] = level;
  return report;
}

void print_config(const std::string& command, const ordered_json& config) {
  std::cerr << "genheck " << command << " " << config.dump() << "\n";
}

// ---- commands ------------------------------------------------------------

struct FitCommand {
  DataOptions data;
  std::string model = "generalized";
  double level = 0.95;
  int max_iter = 500;
  std::string out;
};

int cmd_fit(FitCommand& o, CLI::App* cmd) {
  const ResolvedConfig config = resolve(o.data, cmd);
  ordered_json provenance = config.to_json();
  provenance["model"] = o.model;
  provenance["level"] = o.level;
  provenance["max_iter"] = o.max_iter;
  print_config("fit", provenance);
  const gh_model_kind kind = model_kind(o.model);
  DatasetPtr data = load(config);
  gh_status status = GH_OK;
  FitPtr fit = run_fit(data.get(), kind, o.max_iter, &status);
  DatasetPtr design = fitted_design(data.get(), kind);
  ordered_json report = fit_report(fit.get(), design.get(), o.level);
  report["config"] = provenance;
  Output out(o.out);
  out.stream() << report.dump(2) << "\n";
  return status == GH_OK ? kExitOk : kExitNonConvergence;
}

struct TestCommand {
  DataOptions data;
  std::string model = "generalized";
  std::string restrict = "correlation";
  int max_iter = 500;
  std::string out;
};

int cmd_test(TestCommand& o, CLI::App* cmd) {
  const ResolvedConfig config = resolve(o.data, cmd);
  ordered_json provenance = config.to_json();
  provenance["model"] = o.model;
  provenance["restrict"] = o.restrict;
  provenance["max_iter"] = o.max_iter;
  print_config("test", provenance);
  const gh_model_kind kind = model_kind(o.model);

  const auto colon = o.restrict.find(':');
  const int block = equation_index(o.restrict.substr(0, colon));
  DatasetPtr data = load(config);
  gh_status status = GH_OK;
  FitPtr full = run_fit(data.get(), kind, o.max_iter, &status);
  if (status != GH_OK) return kExitNonConvergence;
  DatasetPtr design = fitted_design(data.get(), kind);

  gh_dims dims;
  check(gh_dataset_dims(design.get(), &dims));
  const size_t width[4] = {dims.p, dims.q, dims.r, dims.s};
  std::vector<size_t> cols;
  std::vector<std::string> names;
  if (colon == std::string::npos) {
    for (size_t c = 0; c < width[block]; ++c) cols.push_back(c);
  } else {
    for (const std::string& wanted : split_list(o.restrict.substr(colon + 1))) {
      size_t c = 0;
      while (c < width[block] && get_name(design.get(), block, c) != wanted) ++c;
      if (c == width[block])
        throw InputError{"no column '" + wanted + "' in the " + kEquations[block] + " equation"};
      cols.push_back(c);
    }
  }
  if (cols.empty()) throw InputError{"restriction selects no coefficients"};
  for (size_t c : cols) names.push_back(get_name(design.get(), block, c));

  gh_test_result results[3];
  gh_fit* restricted_raw = nullptr;
  check(gh_test_zero_restriction(design.get(), full.get(), block, cols.data(), cols.size(), results,
                                 &restricted_raw));
  FitPtr restricted(restricted_raw);
  const gh_fit_info full_info = fit_info(full.get());
  const gh_fit_info restricted_info = fit_info(restricted.get());

  ordered_json report;
  report["model"] = model_name(full_info.model);
  report["restriction"] = {{"equation", kEquations[block]}, {"coefficients", names}};
  report["df"] = cols.size();
  report["loglik_full"] = number(full_info.loglik);
  report["loglik_restricted"] = number(restricted_info.loglik);
  report["restricted_converged"] = restricted_info.converged != 0;
  ordered_json tests = ordered_json::array();
  for (const gh_test_result& r : results) {
    tests.push_back({{"test", test_name(r.kind)},
                     {"statistic", number(r.statistic)},
                     {"df", r.df},
                     {"p_value", number(r.p_value)},
                     {"numerical_warning", r.numerical_warning != 0}});
    if (r.numerical_warning)
      std::cerr << "warning: " << test_name(r.kind)
                << " statistic was negative and has been floored at zero\n";
  }
  report["tests"] = tests;
  report["n"] = full_info.n;
  report["n_selected"] = full_info.n_selected;
  report["config"] = provenance;
  Output out(o.out);
  out.stream() << report.dump(2) << "\n";
  return restricted_info.converged ? kExitOk : kExitNonConvergence;
}

struct ResidualsCommand {
  DataOptions data;
  std::string model = "generalized";
  int max_iter = 500;
  std::string out;
};

int cmd_residuals(ResidualsCommand& o, CLI::App* cmd) {
  const ResolvedConfig config = resolve(o.data, cmd);
  ordered_json provenance = config.to_json();
  provenance["model"] = o.model;
  print_config("residuals", provenance);
  const gh_model_kind kind = model_kind(o.model);
  DatasetPtr data = load(config);
  gh_status status = GH_OK;
  FitPtr fit = run_fit(data.get(), kind, o.max_iter, &status);
  if (status != GH_OK) return kExitNonConvergence;
  DatasetPtr design = fitted_design(data.get(), kind);
  gh_dims dims;
  check(gh_dataset_dims(design.get(), &dims));
  std::vector<double> ordinary(dims.n_selected), standardized(dims.n_selected), all(dims.n);
  std::vector<size_t> indices(dims.n_selected);
  check(gh_score_residuals(fit.get(), design.get(), ordinary.data(), standardized.data(),
                           indices.data(), dims.n_selected, all.data(), dims.n));
  std::vector<double> ord_full(dims.n, NAN), std_full(dims.n, NAN);
  for (size_t k = 0; k < indices.size(); ++k) {
    ord_full[indices[k]] = ordinary[k];
    std_full[indices[k]] = standardized[k];
  }
  std::ostringstream csv;
  csv << "index,u,ordinary,standardized,all_obs\n";
  for (size_t i = 0; i < dims.n; ++i)
    csv << i + 1 << "," << (std::isnan(ord_full[i]) ? 0 : 1) << "," << format_double(ord_full[i])
        << "," << format_double(std_full[i]) << "," << format_double(all[i]) << "\n";
  write_text(o.out, csv.str());
  return kExitOk;
}

struct EnvelopeCommand {
  DataOptions data;
  std::string model = "generalized";
  int n_sim = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 1;
  int max_iter = 500;
  std::string out;
};

int cmd_envelope(EnvelopeCommand& o, CLI::App* cmd) {
  const ResolvedConfig config = resolve(o.data, cmd);
  ordered_json provenance = config.to_json();
  provenance["model"] = o.model;
  provenance["n_sim"] = o.n_sim;
  provenance["level"] = o.level;
  provenance["seed"] = o.seed;
  provenance["threads"] = o.threads;
  print_config("envelope", provenance);
  const gh_model_kind kind = model_kind(o.model);
  DatasetPtr data = load(config);
  gh_status status = GH_OK;
  FitPtr fit = run_fit(data.get(), kind, o.max_iter, &status);
  if (status != GH_OK) return kExitNonConvergence;
  DatasetPtr design = fitted_design(data.get(), kind);
  gh_dims dims;
  check(gh_dataset_dims(design.get(), &dims));
  const size_t n = dims.n;
  std::vector<double> theoretical(n), observed(n), lower(n), upper(n);
  std::vector<size_t> order(n);
  gh_envelope_info info;
  check(gh_envelope(fit.get(), design.get(), o.n_sim, o.level, o.seed, o.threads, n,
                    theoretical.data(), observed.data(), order.data(), lower.data(), upper.data(),
                    &info));
  std::vector<size_t> selected(dims.n_selected);
  check(gh_score_residuals(fit.get(), design.get(), nullptr, nullptr, selected.data(),
                           dims.n_selected, nullptr, n));
  std::vector<int> u(n, 0);
  for (size_t i : selected) u[i] = 1;
  std::ostringstream csv;
  csv << "index,u,theoretical_quantile,residual,lower,upper\n";
  for (size_t k = 0; k < n; ++k)
    csv << order[k] + 1 << "," << u[order[k]] << "," << format_double(theoretical[k]) << ","
        << format_double(observed[k]) << "," << format_double(lower[k]) << ","
        << format_double(upper[k]) << "\n";
  write_text(o.out, csv.str());
  std::cerr << "envelope: " << info.n_sim - info.n_failed << " of " << info.n_sim
            << " simulated refits used\n";
  if (info.n_failed > 0)
    std::cerr << "warning: " << info.n_failed << " simulated refits failed and were dropped\n";
  return kExitOk;
}

struct CookCommand {
  DataOptions data;
  std::string model = "generalized";
  std::string weight = "information";
  std::string rows;
  int subsample = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  int max_iter = 500;
  std::string out;
};

// Uniform sample of k distinct indices out of n, sorted.
std::vector<size_t> subsample_rows(size_t n, size_t k, std::uint64_t seed) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 engine(seed);
  for (size_t i = 0; i < k && i + 1 < n; ++i) {
    const std::uint64_t span = n - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw;
    do draw = engine();
    while (draw >= limit);
    std::swap(idx[i], idx[i + draw % span]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

int cmd_cook(CookCommand& o, CLI::App* cmd) {
  const ResolvedConfig config = resolve(o.data, cmd);
  ordered_json provenance = config.to_json();
  provenance["model"] = o.model;
  provenance["weight"] = o.weight;
  provenance["rows"] = o.rows;
  provenance["subsample"] = o.subsample;
  provenance["seed"] = o.seed;
  provenance["threads"] = o.threads;
  print_config("cook", provenance);
  const gh_model_kind kind = model_kind(o.model);
  int weight = GH_COOK_INFORMATION;
  if (o.weight == "covariance") {
    weight = GH_COOK_COVARIANCE;
  } else if (o.weight != "information") {
    throw InputError{"unknown weight '" + o.weight + "'"};
  }
  DatasetPtr data = load(config);
  gh_status status = GH_OK;
  FitPtr fit = run_fit(data.get(), kind, o.max_iter, &status);
  if (status != GH_OK) return kExitNonConvergence;
  DatasetPtr design = fitted_design(data.get(), kind);
  gh_dims dims;
  check(gh_dataset_dims(design.get(), &dims));

  std::vector<size_t> rows;
  if (!o.rows.empty()) {
    for (const std::string& item : split_list(o.rows)) {
      long long r = 0;
      try {
        r = std::stoll(item);
      } catch (...) {
        throw InputError{"invalid row '" + item + "'"};
      }
      if (r < 1 || static_cast<size_t>(r) > dims.n)
        throw InputError{"row " + item + " outside 1.." + std::to_string(dims.n)};
      rows.push_back(static_cast<size_t>(r - 1));
    }
  } else if (o.subsample > 0) {
    rows = subsample_rows(dims.n, std::min<size_t>(dims.n, static_cast<size_t>(o.subsample)),
                          o.seed);
  } else {
    for (size_t i = 0; i < dims.n; ++i) rows.push_back(i);
  }
  std::vector<double> distance(rows.size());
  double threshold = 0.0;
  int failures = 0;
  check(gh_cook_distance(fit.get(), design.get(), weight, rows.data(), rows.size(), o.threads,
                         distance.data(), distance.size(), &threshold, &failures));
  std::ostringstream csv;
  csv << "index,distance,threshold,flagged\n";
  for (size_t k = 0; k < rows.size(); ++k)
    csv << rows[k] + 1 << "," << format_double(distance[k]) << "," << format_double(threshold)
        << "," << (distance[k] > threshold ? 1 : 0) << "\n";
  write_text(o.out, csv.str());
  if (failures > 0)
    std::cerr << "warning: " << failures << " case-deletion refits failed (distance NA)\n";
  return kExitOk;
}

struct SimulateCommand {
  int scenario = 1;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  bool null_kappa = false;
  std::string out;
};

int cmd_simulate(SimulateCommand& o) {
  ordered_json provenance = {{"scenario", o.scenario},
                             {"n", o.n},
                             {"seed", o.seed},
                             {"null", o.null_kappa}};
  print_config("simulate", provenance);
  gh_dataset* raw = nullptr;
  check(gh_scenario_dataset(o.scenario, o.n, o.seed, o.null_kappa ? 1 : 0, &raw));
  DatasetPtr data(raw);
  size_t needed = 0;
  check(gh_dataset_csv(data.get(), nullptr, 0, &needed));
  std::string csv(needed, '\0');
  check(gh_dataset_csv(data.get(), csv.data(), csv.size(), &needed));
  csv.resize(needed - 1);
  write_text(o.out, csv);
  return kExitOk;
}

struct McCommand {
  int scenario = 1;
  std::size_t n = 1000;
  int reps = 200;
  std::uint64_t seed = 1;
  std::string model = "generalized";
  bool null_kappa = false;
  std::string tests;
  int threads = 1;
  std::string out;
};

std::string mc_csv(const gh_mc_summary* summary, int table) {
  size_t needed = 0;
  check(gh_mc_summary_csv(summary, table, nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(gh_mc_summary_csv(summary, table, s.data(), s.size(), &needed));
  s.resize(needed - 1);
  return s;
}

int cmd_mc(McCommand& o) {
  std::vector<double> levels;
  for (const std::string& item : split_list(o.tests)) {
    try {
      levels.push_back(std::stod(item));
    } catch (...) {
      throw InputError{"invalid test level '" + item + "'"};
    }
  }
  // Thread count is deliberately absent from the written outputs, which do
  // not depend on it.
  ordered_json provenance = {{"scenario", o.scenario}, {"n", o.n},
                             {"reps", o.reps},         {"seed", o.seed},
                             {"model", o.model},       {"null", o.null_kappa},
                             {"tests", levels}};
  ordered_json echoed = provenance;
  echoed["threads"] = o.threads;
  print_config("mc", echoed);
  const gh_model_kind kind = model_kind(o.model);
  gh_mc_summary* raw = nullptr;
  check(gh_monte_carlo(o.scenario, o.n, o.reps, o.seed, kind, o.null_kappa ? 1 : 0,
                       levels.empty() ? nullptr : levels.data(), levels.size(), o.threads, &raw));
  McPtr summary(raw);
  gh_mc_info info;
  check(gh_mc_summary_info(summary.get(), &info));

  ordered_json report;
  report["scenario"] = info.scenario;
  report["n"] = info.n;
  report["model"] = model_name(info.model);
  report["replicates"] = info.replicates;
  report["failures"] = info.failures;
  report["master_seed"] = o.seed;
  ordered_json params = ordered_json::array();
  for (size_t j = 0; j < info.n_parameters; ++j) {
    gh_mc_parameter p;
    check(gh_mc_summary_parameter(summary.get(), j, &p));
    params.push_back({{"parameter", p.name},
                      {"true", number(p.truth)},
                      {"mean", number(p.mean)},
                      {"rmse", number(p.rmse)}});
  }
  report["parameters"] = params;
  ordered_json rejections = ordered_json::array();
  for (size_t j = 0; j < info.n_rejections; ++j) {
    gh_mc_rejection r;
    check(gh_mc_summary_rejection(summary.get(), j, &r));
    rejections.push_back({{"test", test_name(r.test)},
                          {"level", r.level},
                          {"rejection_rate", number(r.rate)}});
  }
  report["rejections"] = rejections;
  report["config"] = provenance;

  const std::string parameters_csv = mc_csv(summary.get(), 0);
  const std::string rejections_csv = mc_csv(summary.get(), 1);
  if (o.out.empty() || o.out == "-") {
    std::cout << parameters_csv;
    if (!levels.empty()) std::cout << "\n" << rejections_csv;
  } else {
    write_text(o.out + "_parameters.csv", parameters_csv);
    if (!levels.empty()) write_text(o.out + "_tests.csv", rejections_csv);
    write_text(o.out + ".json", report.dump(2) + "\n");
  }
  if (info.failures > 0)
    std::cerr << "warning: " << info.failures << " of " << info.replicates
              << " replicates failed to converge and were excluded\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Heckman sample-selection models: fit, test, diagnose, simulate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "genheck 0.1.0");

  const int threads = default_threads();

  FitCommand fit_opts;
  auto* fit = app.add_subcommand("fit", "fit a model and write a JSON report");
  add_data_options(fit, fit_opts.data);
  fit->add_option("--model", fit_opts.model, "generalized or classic")->capture_default_str();
  fit->add_option("--level", fit_opts.level, "confidence level")->capture_default_str();
  fit->add_option("--max-iter", fit_opts.max_iter)->capture_default_str();
  fit->add_option("--out", fit_opts.out, "output path (default stdout)");

  TestCommand test_opts;
  auto* test = app.add_subcommand("test", "LR, Wald and gradient tests of a zero restriction");
  add_data_options(test, test_opts.data);
  test->add_option("--model", test_opts.model)->capture_default_str();
  test->add_option("--restrict", test_opts.restrict,
                   "EQUATION or EQUATION:col1,col2 (coefficients set to zero)")
      ->capture_default_str();
  test->add_option("--max-iter", test_opts.max_iter)->capture_default_str();
  test->add_option("--out", test_opts.out);

  ResidualsCommand res_opts;
  auto* residuals = app.add_subcommand("residuals", "score residuals as CSV");
  add_data_options(residuals, res_opts.data);
  residuals->add_option("--model", res_opts.model)->capture_default_str();
  residuals->add_option("--max-iter", res_opts.max_iter)->capture_default_str();
  residuals->add_option("--out", res_opts.out);

  EnvelopeCommand env_opts;
  env_opts.threads = threads;
  auto* envelope = app.add_subcommand("envelope", "simulated envelope for the residual QQ plot");
  add_data_options(envelope, env_opts.data);
  envelope->add_option("--model", env_opts.model)->capture_default_str();
  envelope->add_option("--n-sim", env_opts.n_sim, "simulated datasets")->capture_default_str();
  envelope->add_option("--level", env_opts.level)->capture_default_str();
  envelope->add_option("--seed", env_opts.seed)->capture_default_str();
  envelope->add_option("--threads", env_opts.threads)->capture_default_str();
  envelope->add_option("--max-iter", env_opts.max_iter)->capture_default_str();
  envelope->add_option("--out", env_opts.out);

  CookCommand cook_opts;
  cook_opts.threads = threads;
  auto* cook = app.add_subcommand("cook", "generalized Cook distance by case deletion");
  add_data_options(cook, cook_opts.data);
  cook->add_option("--model", cook_opts.model)->capture_default_str();
  cook->add_option("--weight", cook_opts.weight, "information or covariance")
      ->capture_default_str();
  cook->add_option("--rows", cook_opts.rows, "comma-separated 1-based rows to delete");
  cook->add_option("--subsample", cook_opts.subsample, "delete a random subset of this size");
  cook->add_option("--seed", cook_opts.seed, "seed for --subsample")->capture_default_str();
  cook->add_option("--threads", cook_opts.threads)->capture_default_str();
  cook->add_option("--max-iter", cook_opts.max_iter)->capture_default_str();
  cook->add_option("--out", cook_opts.out);

  SimulateCommand sim_opts;
  auto* simulate = app.add_subcommand("simulate", "write a simulation-scenario dataset as CSV");
  simulate->add_option("--scenario", sim_opts.scenario, "1..6")->capture_default_str();
  simulate->add_option("--n", sim_opts.n)->capture_default_str();
  simulate->add_option("--seed", sim_opts.seed)->capture_default_str();
  simulate->add_flag("--null", sim_opts.null_kappa, "set the correlation coefficients to zero");
  simulate->add_option("--out", sim_opts.out);

  McCommand mc_opts;
  mc_opts.threads = threads;
  auto* mc = app.add_subcommand("mc", "Monte Carlo study: parameter means/RMSE and test sizes");
  mc->add_option("--scenario", mc_opts.scenario)->capture_default_str();
  mc->add_option("--n", mc_opts.n)->capture_default_str();
  mc->add_option("--reps", mc_opts.reps)->capture_default_str();
  mc->add_option("--seed", mc_opts.seed)->capture_default_str();
  mc->add_option("--model", mc_opts.model)->capture_default_str();
  mc->add_flag("--null", mc_opts.null_kappa, "simulate with zero correlation coefficients");
  mc->add_option("--tests", mc_opts.tests,
                 "comma-separated levels; runs LR, gradient and Wald tests of kappa = 0");
  mc->add_option("--threads", mc_opts.threads)->capture_default_str();
  mc->add_option("--out", mc_opts.out,
                 "output prefix for _parameters.csv, _tests.csv and .json (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(fit_opts, fit);
    if (*test) return cmd_test(test_opts, test);
    if (*residuals) return cmd_residuals(res_opts, residuals);
    if (*envelope) return cmd_envelope(env_opts, envelope);
    if (*cook) return cmd_cook(cook_opts, cook);
    if (*simulate) return cmd_simulate(sim_opts);
    if (*mc) return cmd_mc(mc_opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitInput;
  } catch (const GhFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.status == GH_ERR_NON_CONVERGENCE || e.status == GH_ERR_SINGULAR_INFORMATION ||
                   e.status == GH_ERR_NOT_CONVERGED
               ? kExitNonConvergence
               : kExitInput;
  }
  return kExitInput;
}
