#include "simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace genheck {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Parameter names and true values in the layout the chosen model estimates.
void truth_for(const Scenario& spec, ModelKind model, std::vector<std::string>& names,
               Eigen::VectorXd& truth) {
  Theta t = spec.theta_true;
  if (model == ModelKind::kClassic) {
    t.lambda = t.lambda.head(std::min<Eigen::Index>(1, t.lambda.size())).eval();
    t.kappa = t.kappa.head(std::min<Eigen::Index>(1, t.kappa.size())).eval();
  }
  static const char* prefixes[] = {"beta", "gamma", "lambda", "kappa"};
  const Eigen::Index counts[] = {t.beta.size(), t.gamma.size(), t.lambda.size(), t.kappa.size()};
  names.clear();
  for (int block = 0; block < 4; ++block) {
    for (Eigen::Index c = 0; c < counts[block]; ++c) {
      names.push_back(std::string(prefixes[block]) + std::to_string(c));
    }
  }
  truth = t.flatten();
}

struct Replicate {
  bool ok = false;
  Eigen::VectorXd estimate;
  ZeroRestrictionTests tests;
};

Replicate run_replicate(const Scenario& spec, const Designs& designs, std::uint64_t seed,
                        ModelKind model, bool with_tests) {
  Replicate rep;
  try {
    const Dataset data = gen_dataset(spec.theta_true, designs, seed);
    const Dataset fitted_on = model == ModelKind::kClassic ? classic_design(data) : data;
    const FitResult full = model == ModelKind::kClassic ? fit_classic(data) : fit(data);
    if (!full.converged) return rep;
    rep.estimate = full.theta_hat.flatten();
    if (with_tests) {
      std::vector<Eigen::Index> cols(static_cast<std::size_t>(fitted_on.V.cols()));
      for (Eigen::Index c = 0; c < fitted_on.V.cols(); ++c) cols[c] = c;
      rep.tests = test_zero_restriction(fitted_on, full, 3, cols);
    }
    rep.ok = true;
  } catch (const Error&) {
    rep.ok = false;
  }
  return rep;
}

McSummary run_study(const Scenario& spec, int n_reps, std::uint64_t master_seed,
                    ModelKind model, int threads, const std::vector<double>* levels) {
  if (n_reps < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one replicate");
  const Designs designs = scenario_designs(spec, rng::mix(master_seed, 0));
  McSummary out;
  out.scenario = spec.id;
  out.n = spec.n;
  out.model = model;
  out.replicates = n_reps;
  out.master_seed = master_seed;

  std::vector<std::string> names;
  Eigen::VectorXd truth;
  truth_for(spec, model, names, truth);

  std::vector<Replicate> reps(static_cast<std::size_t>(n_reps));
  parallel_for(reps.size(), threads, [&](std::size_t k) {
    reps[k] = run_replicate(spec, designs, rng::mix(master_seed, k + 1), model,
                            levels != nullptr);
  });

  const Eigen::Index d = truth.size();
  out.estimates = Eigen::MatrixXd::Constant(n_reps, d, std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  int ok = 0;
  for (int k = 0; k < n_reps; ++k) {
    if (!reps[k].ok) {
      ++out.failures;
      continue;
    }
    ++ok;
    out.estimates.row(k) = reps[k].estimate.transpose();
    sum += reps[k].estimate;
    sq += (reps[k].estimate - truth).array().square().matrix();
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    ParameterSummary ps;
    ps.name = names[j];
    ps.truth = truth[j];
    ps.mean = ok > 0 ? sum[j] / ok : std::numeric_limits<double>::quiet_NaN();
    ps.rmse = ok > 0 ? std::sqrt(sq[j] / ok) : std::numeric_limits<double>::quiet_NaN();
    out.parameters.push_back(ps);
  }
  if (levels) {
    for (TestKind kind : {TestKind::kLikelihoodRatio, TestKind::kGradient, TestKind::kWald}) {
      for (double level : *levels) {
        int rejected = 0;
        for (const Replicate& rep : reps) {
          if (!rep.ok) continue;
          const TestResult& t = kind == TestKind::kLikelihoodRatio ? rep.tests.lr
                                : kind == TestKind::kGradient      ? rep.tests.gradient
                                                                   : rep.tests.wald;
          if (t.p_value < level) ++rejected;
        }
        out.rejections.push_back(
            {kind, level, ok > 0 ? static_cast<double>(rejected) / ok
                                 : std::numeric_limits<double>::quiet_NaN()});
      }
    }
  }
  return out;
}

}  // namespace

Designs designs_of(const Dataset& data) {
  return {data.X, data.W, data.E, data.V, data.names};
}

Dataset gen_dataset(const Theta& theta, const Designs& designs, std::uint64_t seed) {
  const Eigen::Index n = designs.X.rows();
  Dataset shape;
  shape.X = designs.X;
  shape.W = designs.W;
  shape.E = designs.E;
  shape.V = designs.V;
  shape.y = Eigen::VectorXd::Zero(n);
  shape.u = Eigen::VectorXi::Zero(n);
  const Predictors pr = predictors(theta, shape);

  rng::Stream stream(seed);
  Eigen::VectorXd y(n);
  Eigen::VectorXi u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eta = stream.normal();
    const double eps2 = stream.normal();
    const double t = pr.atanh_rho[i];
    const double root = 1.0 / std::cosh(t);  // sqrt(1 - rho^2)
    const double eps1 = pr.sigma[i] * (pr.rho[i] * eps2 + root * eta);
    u[i] = pr.mu2[i] + eps2 > 0.0 ? 1 : 0;
    y[i] = u[i] == 1 ? pr.mu1[i] + eps1 : 0.0;
  }
  Dataset out = Dataset::create(std::move(y), std::move(u), designs.X, designs.W, designs.E,
                                designs.V);
  out.names = designs.names;
  return out;
}

Scenario make_scenario(int id, Eigen::Index n) {
  if (id < 1 || id > 6) {
    throw Error(ErrorCode::kInvalidScenario, "scenario id must be 1..6, got " + std::to_string(id));
  }
  if (n < 1) throw Error(ErrorCode::kInvalidScenario, "scenario needs n >= 1");
  Scenario s;
  s.id = id;
  s.n = n;
  s.theta_true.beta = vec({1.1, 0.7, 0.1});
  s.theta_true.gamma = vec({0.9, 0.5, 1.1, 0.6});
  s.theta_true.lambda = vec({-0.4, 0.7});
  s.theta_true.kappa = vec({0.3, 0.5});
  // P(U = 1) = Phi(gamma0 / sqrt(1 + 0.5^2 + 1.1^2 + 0.6^2)) ~ 0.70.
  s.target_censoring = 0.296;
  switch (id) {
    case 1:
      s.description = "varying dispersion and correlation, exclusion restriction";
      break;
    case 2:
      s.description = "varying dispersion and correlation, no exclusion restriction";
      s.exclusion_restriction = false;
      s.theta_true.gamma = vec({0.9, 0.5, 1.1});
      s.target_censoring = 0.283;
      break;
    case 3:
      s.description = "constant dispersion, varying correlation";
      s.theta_true.lambda[1] = 0.0;
      break;
    case 4:
      s.description = "varying dispersion, constant correlation";
      s.theta_true.kappa[1] = 0.0;
      break;
    case 5:
      s.description = "constant dispersion and correlation";
      s.theta_true.lambda[1] = 0.0;
      s.theta_true.kappa[1] = 0.0;
      break;
    case 6:
      s.description = "varying dispersion and strong correlation, 50% censoring";
      s.theta_true.gamma[0] = 0.0;
      s.theta_true.kappa[0] = 0.8;
      s.target_censoring = 0.5;
      break;
  }
  return s;
}

Scenario null_scenario(const Scenario& spec) {
  Scenario s = spec;
  s.theta_true.kappa.setZero();
  s.description += " (kappa = 0)";
  return s;
}

Designs scenario_designs(const Scenario& spec, std::uint64_t seed) {
  const Eigen::Index n = spec.n;
  rng::Stream stream(seed);
  Eigen::MatrixXd x(n, 3);
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, c) = stream.normal();
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Designs d;
  d.X.resize(n, 3);
  d.X << ones, x.col(0), x.col(1);
  d.names.outcome = {"(Intercept)", "x1", "x2"};
  if (spec.exclusion_restriction) {
    d.W.resize(n, 4);
    d.W << ones, x.col(0), x.col(1), x.col(2);
    d.names.selection = {"(Intercept)", "x1", "x2", "x3"};
  } else {
    d.W = d.X;
    d.names.selection = d.names.outcome;
  }
  d.E.resize(n, 2);
  d.E << ones, x.col(0);
  d.V = d.E;
  d.names.dispersion = {"(Intercept)", "x1"};
  d.names.correlation = {"(Intercept)", "x1"};
  if (spec.theta_true.sizes() != BlockSizes{d.X.cols(), d.W.cols(), d.E.cols(), d.V.cols()}) {
    throw Error(ErrorCode::kInvalidScenario, "scenario coefficients do not match its designs");
  }
  return d;
}

Dataset scenario(const Scenario& spec, std::uint64_t seed) {
  return gen_dataset(spec.theta_true, scenario_designs(spec, rng::mix(seed, 0)),
                     rng::mix(seed, 1));
}

McSummary monte_carlo(const Scenario& spec, int n_reps, std::uint64_t master_seed,
                      ModelKind model, int threads) {
  return run_study(spec, n_reps, master_seed, model, threads, nullptr);
}

McSummary size_power(const Scenario& spec, int n_reps, std::uint64_t master_seed,
                     const std::vector<double>& levels, ModelKind model, int threads) {
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "test levels must lie in (0, 1)");
    }
  }
  return run_study(spec, n_reps, master_seed, model, threads, &levels);
}

std::string mc_parameters_csv(const McSummary& summary) {
  std::ostringstream os;
  os << "parameter,true,mean,rmse\n";
  for (const auto& p : summary.parameters) {
    os << p.name << ',' << format_number(p.truth) << ',' << format_number(p.mean) << ','
       << format_number(p.rmse) << '\n';
  }
  return os.str();
}

std::string mc_rejections_csv(const McSummary& summary) {
  std::ostringstream os;
  os << "test,level,rejection_rate\n";
  for (const auto& r : summary.rejections) {
    os << to_string(r.test) << ',' << format_number(r.level) << ',' << format_number(r.rate)
       << '\n';
  }
  return os.str();
}

}  // namespace genheck
