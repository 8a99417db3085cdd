#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace genheck::optimize {

namespace {

struct LinePoint {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const BfgsOptions& opt, const Eigen::VectorXd& x0,
             const Eigen::VectorXd& dir, double f0, double slope0)
      : f_(f), opt_(opt), x0_(x0), dir_(dir), f0_(f0), slope0_(slope0),
        noise_(1e-12 * (1.0 + std::abs(f0))) {}

  // Returns false when no point satisfying the Wolfe conditions was found;
  // `best` then holds the lowest point seen (possibly alpha = 0).
  bool run(LinePoint& out) {
    LinePoint prev{0.0, f0_, slope0_, x0_, {}};
    best_ = prev;
    double alpha = 1.0;
    for (int i = 0; evals_ < opt_.max_line_search_evals; ++i) {
      LinePoint cur = eval(alpha);
      if (!sufficient(cur) || (i > 0 && cur.value >= prev.value)) {
        return zoom(prev, cur, out);
      }
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    out = best_;
    return false;
  }

  int evaluations() const { return evals_; }

 private:
  LinePoint eval(double alpha) {
    LinePoint pt;
    pt.alpha = alpha;
    pt.x = x0_ + alpha * dir_;
    pt.value = f_(pt.x, &pt.grad);
    ++evals_;
    if (!std::isfinite(pt.value) || !pt.grad.allFinite()) {
      pt.value = std::numeric_limits<double>::infinity();
      pt.slope = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.slope = pt.grad.dot(dir_);
      if (pt.value < best_.value) best_ = pt;
    }
    return pt;
  }

  // Armijo, or its approximate form once function differences drop into
  // rounding noise (the gradient then carries the information).
  bool sufficient(const LinePoint& pt) const {
    if (!std::isfinite(pt.value)) return false;
    if (pt.value <= f0_ + opt_.c1 * pt.alpha * slope0_) return true;
    return pt.value <= f0_ + noise_ && pt.slope <= (1.0 - 2.0 * opt_.c1) * -slope0_;
  }

  bool curvature(const LinePoint& pt) const {
    return std::abs(pt.slope) <= -opt_.c2 * slope0_;
  }

  static double interpolate(const LinePoint& a, const LinePoint& b) {
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double width = hi - lo;
    if (std::isfinite(a.value) && std::isfinite(b.value) && std::isfinite(a.slope) &&
        std::isfinite(b.slope)) {
      // Cubic through both end points.
      const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
      const double disc = d1 * d1 - a.slope * b.slope;
      if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
        const double t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) /
                                        (b.slope - a.slope + 2.0 * d2);
        if (std::isfinite(t) && t > lo + 0.1 * width && t < hi - 0.1 * width) return t;
      }
    }
    return lo + 0.5 * width;
  }

  bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
    while (evals_ < opt_.max_line_search_evals) {
      const double alpha = interpolate(lo, hi);
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      LinePoint cur = eval(alpha);
      if (!sufficient(cur) || cur.value >= lo.value) {
        hi = std::move(cur);
        continue;
      }
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    out = best_;
    return false;
  }

  const Objective& f_;
  const BfgsOptions& opt_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  double noise_;
  LinePoint best_;
  int evals_ = 0;
};

}  // namespace

BfgsResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options) {
  const Eigen::Index d = x0.size();
  BfgsResult res;
  res.x = x0;
  res.value = f(res.x, &res.grad);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !res.grad.allFinite()) {
    res.stop_reason = "objective not finite at the starting point";
    return res;
  }

  auto initial_inverse = [&](const Eigen::VectorXd& g) {
    const double norm = g.norm();
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d) / (norm > 0.0 ? norm : 1.0));
  };
  Eigen::MatrixXd inv_hess = initial_inverse(res.grad);
  bool just_reset = true;

  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      res.converged = true;
      res.stop_reason = "gradient tolerance";
      return res;
    }
    Eigen::VectorXd dir = -inv_hess * res.grad;
    double slope = dir.dot(res.grad);
    if (!(slope < 0.0)) {
      inv_hess = initial_inverse(res.grad);
      dir = -inv_hess * res.grad;
      slope = dir.dot(res.grad);
      just_reset = true;
    }

    LineSearch search(f, options, res.x, dir, res.value, slope);
    LinePoint next;
    const bool ok = search.run(next);
    res.evaluations += search.evaluations();
    if (!ok) {
      if (next.alpha > 0.0 && next.value < res.value) {
        // Take the decrease found but restart curvature information.
        res.x = next.x;
        res.value = next.value;
        res.grad = next.grad;
        inv_hess = initial_inverse(res.grad);
        just_reset = true;
        continue;
      }
      if (!just_reset) {
        inv_hess = initial_inverse(res.grad);
        just_reset = true;
        continue;
      }
      res.stop_reason = "line search failed";
      return res;
    }

    const Eigen::VectorXd s = next.x - res.x;
    const Eigen::VectorXd y = next.grad - res.grad;
    const double rel_step =
        s.lpNorm<Eigen::Infinity>() / std::max(1.0, res.x.lpNorm<Eigen::Infinity>());
    res.x = next.x;
    res.value = next.value;
    res.grad = next.grad;
    just_reset = false;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hess * y;
      const double yhy = y.dot(hy);
      inv_hess += (rho * rho * yhy + rho) * s * s.transpose() -
                  rho * (hy * s.transpose() + s * hy.transpose());
    }

    if (rel_step < options.step_tol) {
      res.converged = res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol;
      res.stop_reason = "step tolerance";
      ++res.iterations;
      return res;
    }
  }
  res.converged = res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol;
  res.stop_reason = res.converged ? "gradient tolerance" : "iteration limit";
  return res;
}

}  // namespace genheck::optimize
