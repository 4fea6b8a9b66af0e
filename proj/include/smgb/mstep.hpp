#pragma once

// M-step: the L1-penalized expected log joint over the membership matrix.
// The Kronecker trace against the posterior covariance is contracted
// through the frozen spectral cache, so every evaluation is O(n^3) time
// and O(n^2) space.

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "smgb/kernel.hpp"
#include "smgb/owlqn.hpp"
#include "smgb/types.hpp"

namespace smgb {

// Inputs that stay fixed for the whole M-step: the spectral cache of the
// kernel the E-step ran at, the posterior mean of M, and the penalty.
struct MstepProblem {
  SpectralCache cache;
  Eigen::MatrixXd M_mean;
  double lambda = 0.0;
  KernelParams kernel_params;
  bool nonnegative = false;
};

namespace detail {

struct MstepEval {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // d x n, filled only when requested
};

// Shared assembly for the objective and its gradient.
//
// f(U) = -n log det K - 1/2 tr(K^-1 M K^-1 M^T) - 1/2 a^T D a,
// with K = K(U) recomputed from the candidate and a = diag(V^T K^-1 V).
//
// The gradient contracts the row/column-i sparsity of dK/du_ir against
// precomputed O(n^3) factors:
//   d(-n log det K)        = -2n g . Kinv[:,i]
//   d(-1/2 tr quadratic)   = + g . Q2[:,i],  Q2 = Kinv C Kinv,
//                             C = M Kinv M^T + M^T Kinv M
//   d(-1/2 a^T D a)        = +2 g . W (Da o W[i,:]),  W = Kinv V
// where g is the nonzero row of dK/du_ir.
inline MstepEval eval_mstep(const MembershipMatrix& U,
                            const MstepProblem& prob, bool want_gradient) {
  const int n = U.nodes();
  const int d = U.dims();
  if (prob.cache.n() != n || prob.M_mean.rows() != n ||
      prob.M_mean.cols() != n) {
    throw InputError("mstep: cache / M_mean dimensions do not match U");
  }

  const Eigen::MatrixXd K = rbf_matrix(U, prob.kernel_params);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw NumericError(
        "mstep: Cholesky of the candidate kernel failed; increase jitter");
  }
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;

  const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd T1 = Kinv * prob.M_mean;               // K^-1 M
  const Eigen::MatrixXd T2 = Kinv * prob.M_mean.transpose();   // K^-1 M^T
  const double quad_trace = (T1.array() * T2.transpose().array()).sum();

  const Eigen::MatrixXd W = Kinv * prob.cache.V;  // n x m
  const Eigen::VectorXd a =
      (prob.cache.V.array() * W.array()).colwise().sum();
  const Eigen::VectorXd Da = prob.cache.D * a;
  const double kron_trace = a.dot(Da);

  MstepEval out;
  out.value = -double(n) * logdet - 0.5 * quad_trace - 0.5 * kron_trace;
  if (!want_gradient) return out;

  const Eigen::MatrixXd C =
      prob.M_mean * T2 + prob.M_mean.transpose() * T1;
  const Eigen::MatrixXd Q2 = Kinv * C * Kinv;

  out.gradient.resize(d, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd G =
        rbf_partial_block(U, prob.kernel_params.gamma, K, i);
    const Eigen::VectorXd q3 =
        W * Da.cwiseProduct(W.row(i).transpose());
    const Eigen::VectorXd combined =
        -2.0 * double(n) * Kinv.col(i) + Q2.col(i) + 2.0 * q3;
    out.gradient.col(i) = G * combined;
  }
  return out;
}

}  // namespace detail

// First three terms of the M-step objective (the L1 penalty excluded).
inline double smooth_objective(const MembershipMatrix& U,
                               const MstepProblem& prob) {
  return detail::eval_mstep(U, prob, false).value;
}

// Gradient of smooth_objective; entry (r, i) is df/du_ir.
inline Eigen::MatrixXd smooth_gradient(const MembershipMatrix& U,
                                       const MstepProblem& prob) {
  return detail::eval_mstep(U, prob, true).gradient;
}

struct MstepResult {
  MembershipMatrix U;
  double objective = 0.0;  // penalized value at the returned point
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

// Maximizes f(U) - lambda ||U||_1 from U0 by orthant-wise L-BFGS; the
// penalized objective never decreases below its value at U0. Honors the
// nonnegativity bound when set.
inline MstepResult optimize_memberships(const MembershipMatrix& U0,
                                        const MstepProblem& prob,
                                        int max_iter) {
  U0.require_finite("optimize_memberships");
  const int d = U0.dims();
  const int n = U0.nodes();

  SmoothObjectiveFn fn = [&](const Eigen::VectorXd& x,
                             Eigen::VectorXd* grad) {
    MembershipMatrix U(Eigen::Map<const Eigen::MatrixXd>(x.data(), d, n));
    const auto eval = detail::eval_mstep(U, prob, grad != nullptr);
    if (grad) {
      *grad = Eigen::Map<const Eigen::VectorXd>(eval.gradient.data(),
                                                eval.gradient.size());
    }
    return eval.value;
  };

  OwlqnOptions opts;
  opts.max_iterations = max_iter;
  const Eigen::Map<const Eigen::VectorXd> x0(U0.values.data(),
                                             U0.values.size());
  OwlqnResult res =
      maximize_with_l1(fn, x0, prob.lambda, prob.nonnegative, opts);

  MstepResult out;
  out.U = MembershipMatrix(
      Eigen::Map<const Eigen::MatrixXd>(res.x.data(), d, n));
  out.objective = res.objective;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.line_search_failed = res.line_search_failed;
  return out;
}

}  // namespace smgb
