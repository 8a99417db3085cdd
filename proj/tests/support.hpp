#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "model.hpp"
#include "rng.hpp"
#include "simulate.hpp"

namespace genheck::support {

inline Eigen::MatrixXd design_with_intercept(Eigen::Index n, Eigen::Index cols,
                                             rng::Stream& stream) {
  Eigen::MatrixXd m(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < cols; ++j) m(i, j) = stream.normal();
  }
  return m;
}

// Moderate coefficients: intercepts keep selection near 70% and |rho| away
// from one, slopes are small enough that no observation dominates.
inline Theta random_theta(const BlockSizes& b, rng::Stream& stream) {
  auto draw = [&](Eigen::Index k, double intercept, double spread) {
    Eigen::VectorXd v(k);
    for (Eigen::Index j = 0; j < k; ++j) v[j] = spread * (2.0 * stream.uniform() - 1.0);
    if (k > 0) v[0] += intercept;
    return v;
  };
  Theta t;
  t.beta = draw(b.p, 1.0, 1.0);
  t.gamma = draw(b.q, 0.5, 0.6);
  t.lambda = draw(b.r, -0.2, 0.3);
  t.kappa = draw(b.s, 0.2, 0.4);
  return t;
}

inline Designs random_designs(Eigen::Index n, const BlockSizes& b, rng::Stream& stream) {
  Designs d;
  d.X = design_with_intercept(n, b.p, stream);
  d.W = design_with_intercept(n, b.q, stream);
  d.E = design_with_intercept(n, b.r, stream);
  d.V = design_with_intercept(n, b.s, stream);
  return d;
}

struct Draw {
  Theta theta;
  Dataset data;
};

// Parameters and a dataset simulated at those parameters.
inline Draw random_draw(Eigen::Index n, const BlockSizes& b, std::uint64_t seed) {
  rng::Stream stream(seed);
  Draw out;
  out.theta = random_theta(b, stream);
  const Designs designs = random_designs(n, b, stream);
  out.data = gen_dataset(out.theta, designs, rng::mix(seed, 1));
  return out;
}

inline double max_relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace genheck::support
