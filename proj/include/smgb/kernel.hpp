#pragma once

// Isotropic RBF covariance over membership vectors, its sparse partial
// derivatives, and the (optionally truncated) eigendecomposition that
// backs the Kronecker-structured posterior.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "smgb/types.hpp"

namespace smgb {

struct KernelParams {
  double gamma = 1.0;   // RBF bandwidth
  double jitter = 1e-6; // added to the diagonal before any factorization

  void validate() const {
    if (!(gamma > 0.0)) throw InputError("kernel: gamma must be positive");
    if (!(jitter >= 0.0)) throw InputError("kernel: jitter must be nonnegative");
  }
};

// Eigendecomposition of a kernel matrix together with the spectral
// shrinkage coefficients D_ab = lam_a lam_b / (1 + lam_a lam_b). This is
// the implicit representation of the n^2 x n^2 posterior covariance: that
// matrix is never formed.
struct SpectralCache {
  Eigen::MatrixXd V;            // n x m, orthonormal columns
  Eigen::VectorXd eigenvalues;  // length m, nonincreasing, >= 0
  Eigen::MatrixXd D;            // m x m

  int n() const { return static_cast<int>(V.rows()); }
  int rank() const { return static_cast<int>(V.cols()); }
};

// K_ij = exp(-gamma ||u_i - u_j||^2) for i != j, K_ii = 1 + jitter.
// Symmetric by construction.
inline Eigen::MatrixXd rbf_matrix(const MembershipMatrix& U,
                                  const KernelParams& params) {
  params.validate();
  U.require_finite("rbf_matrix");
  const int n = U.nodes();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = 1.0 + params.jitter;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (U.values.col(i) - U.values.col(j)).squaredNorm();
      const double k = std::exp(-params.gamma * d2);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

// dK/du_ir is zero outside row/column i. Returns that row as the vector
// g with g_j = -2 gamma (u_ir - u_jr) K_ij and g_i = 0.
inline Eigen::VectorXd rbf_partial(const MembershipMatrix& U,
                                   const KernelParams& params, int i, int r) {
  params.validate();
  const int n = U.nodes();
  if (i < 0 || i >= n) throw InputError("rbf_partial: node index out of range");
  if (r < 0 || r >= U.dims()) {
    throw InputError("rbf_partial: latent dimension index out of range");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d2 = (U.values.col(i) - U.values.col(j)).squaredNorm();
    const double kij = std::exp(-params.gamma * d2);
    g(j) = -2.0 * params.gamma * (U.values(r, i) - U.values(r, j)) * kij;
  }
  return g;
}

// All latent dimensions of node i at once, reusing a precomputed K.
// Row r holds dK(i,:)/du_ir; column i is zero.
inline Eigen::MatrixXd rbf_partial_block(const MembershipMatrix& U,
                                         double gamma,
                                         const Eigen::MatrixXd& K, int i) {
  const int n = U.nodes();
  const int d = U.dims();
  Eigen::MatrixXd G(d, n);
  for (int j = 0; j < n; ++j) {
    if (j == i) {
      G.col(j).setZero();
      continue;
    }
    G.col(j) = -2.0 * gamma * K(i, j) * (U.values.col(i) - U.values.col(j));
  }
  return G;
}

// Keeps the `rank` largest eigenpairs (all of them when rank <= 0).
// Negative computed eigenvalues are numerical noise and clamp to zero.
inline SpectralCache spectral_decompose(const Eigen::MatrixXd& K,
                                        int rank = 0) {
  const int n = static_cast<int>(K.rows());
  if (K.cols() != n) throw InputError("spectral_decompose: K must be square");
  if (rank > n) throw InputError("spectral_decompose: rank exceeds n");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
  if (solver.info() != Eigen::Success) {
    const double dmin = K.diagonal().minCoeff();
    const double dmax = K.diagonal().maxCoeff();
    throw NumericError(
        "spectral_decompose: eigensolver failed to converge (n=" +
        std::to_string(n) + ", diag range [" + std::to_string(dmin) + ", " +
        std::to_string(dmax) + "], max |K| = " +
        std::to_string(K.cwiseAbs().maxCoeff()) + ")");
  }

  const int m = rank <= 0 ? n : rank;
  SpectralCache cache;
  cache.V.resize(n, m);
  cache.eigenvalues.resize(m);
  // Eigen returns ascending order; keep the top m, descending.
  for (int k = 0; k < m; ++k) {
    const int src = n - 1 - k;
    cache.eigenvalues(k) = std::max(solver.eigenvalues()(src), 0.0);
    cache.V.col(k) = solver.eigenvectors().col(src);
  }
  cache.D.resize(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double prod = cache.eigenvalues(a) * cache.eigenvalues(b);
      cache.D(a, b) = prod / (1.0 + prod);
    }
  }
  return cache;
}

}  // namespace smgb
