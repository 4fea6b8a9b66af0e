#pragma once

// Orthant-wise limited-memory quasi-Newton ascent for objectives of the
// form f(x) - l1 * ||x||_1, optionally restricted to x >= 0. The L1
// non-smoothness is handled by the pseudo-gradient / orthant-projection
// scheme; with l1 = 0 and no bound this reduces to plain L-BFGS with a
// backtracking line search. Every accepted step increases the penalized
// objective, and the whole procedure is deterministic.

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "smgb/types.hpp"

namespace smgb {

// Returns the smooth objective value at x (maximization form) and, when
// grad is non-null, fills its gradient.
using SmoothObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct OwlqnOptions {
  int max_iterations = 100;
  int history = 10;
  // Stop when the pseudo-gradient 2-norm falls below this, scaled by
  // sqrt(#params).
  double gradient_tolerance = 1e-5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 40;
};

struct OwlqnResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // f(x) - l1 * ||x||_1 at the returned point
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<double> trace;  // penalized objective after each accepted step
};

inline OwlqnResult maximize_with_l1(const SmoothObjectiveFn& f,
                                    Eigen::VectorXd x0, double l1,
                                    bool nonnegative,
                                    const OwlqnOptions& opts = {}) {
  if (l1 < 0.0) throw InputError("owlqn: l1 weight must be nonnegative");
  const Eigen::Index N = x0.size();
  if (nonnegative) x0 = x0.cwiseMax(0.0);

  // Work in minimization form: L(x) = -f(x).
  auto eval = [&](const Eigen::VectorXd& pt, Eigen::VectorXd* grad) {
    const double v = f(pt, grad);
    if (grad) *grad = -*grad;
    return -v;
  };
  auto penalty = [&](const Eigen::VectorXd& pt) {
    return l1 * pt.template lpNorm<1>();
  };
  // Steepest feasible descent direction of the penalized objective; zero
  // components mean no first-order improvement is available there.
  auto pseudo_gradient = [&](const Eigen::VectorXd& pt,
                             const Eigen::VectorXd& gl) {
    Eigen::VectorXd v(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double g = gl(i);
      const double xi = pt(i);
      if (xi > 0.0) {
        v(i) = g + l1;
      } else if (xi < 0.0) {
        v(i) = g - l1;
      } else if (nonnegative) {
        v(i) = (g + l1 < 0.0) ? g + l1 : 0.0;
      } else if (g + l1 < 0.0) {
        v(i) = g + l1;
      } else if (g - l1 > 0.0) {
        v(i) = g - l1;
      } else {
        v(i) = 0.0;
      }
    }
    return v;
  };

  OwlqnResult result;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad(N);
  double L = eval(x, &grad);
  double F = L + penalty(x);
  result.trace.push_back(-F);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  const bool orthant_wise = l1 > 0.0 || nonnegative;
  const double gtol = opts.gradient_tolerance * std::sqrt(double(std::max<Eigen::Index>(N, 1)));

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXd v = pseudo_gradient(x, grad);
    if (v.norm() <= gtol) {
      result.converged = true;
      break;
    }

    // Two-loop recursion on the pseudo-gradient.
    Eigen::VectorXd d = v;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const double scale =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= scale;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    d = -d;

    Eigen::VectorXd orthant(N);
    if (orthant_wise) {
      for (Eigen::Index i = 0; i < N; ++i) {
        if (d(i) * v(i) > 0.0) d(i) = 0.0;  // stay in the descent sector
        orthant(i) = x(i) != 0.0 ? (x(i) > 0.0 ? 1.0 : -1.0)
                                 : (v(i) < 0.0 ? 1.0 : (v(i) > 0.0 ? -1.0 : 0.0));
        if (orthant(i) == 0.0) d(i) = 0.0;
      }
    }
    if (d.isZero(0.0)) break;

    double step = iter == 1 ? 1.0 / d.norm() : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_next;
    double F_next = F;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_next = x + step * d;
      if (orthant_wise) {
        for (Eigen::Index i = 0; i < N; ++i) {
          if (x_next(i) * orthant(i) < 0.0) x_next(i) = 0.0;
        }
        if (nonnegative) x_next = x_next.cwiseMax(0.0);
      }
      const double L_next = eval(x_next, nullptr);
      F_next = L_next + penalty(x_next);
      const double gain = v.dot(x_next - x);
      const bool ok = gain < 0.0
                          ? F_next <= F + opts.sufficient_decrease * gain
                          : F_next < F;
      if (ok) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    Eigen::VectorXd grad_next(N);
    eval(x_next, &grad_next);
    const Eigen::VectorXd s = x_next - x;
    const Eigen::VectorXd y = grad_next - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_next);
    grad = std::move(grad_next);
    F = F_next;
    result.iterations = iter;
    result.trace.push_back(-F);
  }

  result.x = std::move(x);
  result.objective = -F;
  return result;
}

}  // namespace smgb
