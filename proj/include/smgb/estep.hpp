#pragma once

// Variational E-step: closed-form coordinate updates for the truncated
// normal latents Z, the GP interaction matrix M, and the regression
// weights beta, plus the evidence lower bound used as a convergence and
// correctness monitor.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "smgb/kernel.hpp"
#include "smgb/network.hpp"
#include "smgb/types.hpp"

namespace smgb {

inline double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865476);
}

// phi(t) / Phi(t). Direct evaluation is fine for t >= -8; below that the
// ratio is computed by the classical continued fraction
//   Phi(-a)/phi(a) = 1/(a + 1/(a + 2/(a + 3/(...))))   for a = -t > 0,
// which stays accurate where the naive quotient loses precision.
inline double inverse_mills(double t) {
  if (t >= -8.0) {
    return std_normal_pdf(t) / std_normal_cdf(t);
  }
  const double a = -t;
  double f = 0.0;
  for (int k = 64; k >= 1; --k) {
    f = static_cast<double>(k) / (a + f);
  }
  return a + f;
}

// Posterior mean of z ~ N(x_mean, 1) truncated to the side selected by y
// (z > 0 for y = 1, z <= 0 for y = 0). Unobserved entries carry no
// truncation and keep their mean.
inline double expected_z(double x_mean, int y, bool observed) {
  if (!std::isfinite(x_mean)) {
    throw NumericError("expected_z: non-finite predictor mean");
  }
  if (!observed) return x_mean;
  const double s = y == 1 ? 1.0 : -1.0;
  return x_mean + s * inverse_mills(s * x_mean);
}

// Means, covariances, and bookkeeping of the factorized posterior
// q(Z) q(M) q(beta).
struct VariationalState {
  Eigen::MatrixXd M_mean;    // <M>
  Eigen::MatrixXd Z_mean;    // <Z>
  Eigen::MatrixXd P_mean;    // {<beta>^T r_ij}
  Eigen::MatrixXd X_anchor;  // predictor at which q(Z) was last refreshed
  Eigen::VectorXd beta_mean;
  Eigen::MatrixXd beta_cov;

  static VariationalState initial(int n, const SideInfo& side,
                                  double sigma_beta_sq) {
    VariationalState s;
    s.M_mean = Eigen::MatrixXd::Zero(n, n);
    s.Z_mean = Eigen::MatrixXd::Zero(n, n);
    s.P_mean = Eigen::MatrixXd::Zero(n, n);
    s.X_anchor = Eigen::MatrixXd::Zero(n, n);
    s.beta_mean = Eigen::VectorXd::Zero(side.p);
    s.beta_cov =
        sigma_beta_sq * Eigen::MatrixXd::Identity(side.p, side.p);
    return s;
  }
};

// q(z_ij) refresh for every entry. Observed pairs get the truncated
// normal mean, everything else the plain predictor.
inline void update_z(VariationalState& state, const Eigen::MatrixXd& Y,
                     const BoolGrid& observed) {
  const int n = static_cast<int>(Y.rows());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = state.M_mean(i, j) + state.P_mean(i, j);
      state.X_anchor(i, j) = x;
      state.Z_mean(i, j) =
          expected_z(x, Y(i, j) == 1.0 ? 1 : 0, observed(i, j));
    }
  }
}

// The spectral filter behind the q(M) mean update:
//   V [ (V^T R V) o D ] V^T
// applied to the residual R. This is the O(n^2 m) form of multiplying
// vec(R^T) by the Kronecker-structured posterior covariance.
inline Eigen::MatrixXd shrink_residual(const SpectralCache& cache,
                                       const Eigen::MatrixXd& residual) {
  const Eigen::MatrixXd inner =
      (cache.V.transpose() * residual * cache.V).cwiseProduct(cache.D);
  return cache.V * inner * cache.V.transpose();
}

inline Eigen::MatrixXd update_m(const SpectralCache& cache,
                                const Eigen::MatrixXd& Z_mean,
                                const Eigen::MatrixXd& P_mean) {
  return shrink_residual(cache, Z_mean - P_mean);
}

inline void update_m(VariationalState& state, const SpectralCache& cache) {
  state.M_mean = update_m(cache, state.Z_mean, state.P_mean);
}

// Ridge update of q(beta) over the observed pairs; refreshes P_mean.
// No-op when there is no side information.
inline void update_beta(VariationalState& state, const SideInfo& side,
                        const BoolGrid& observed, double sigma_beta_sq) {
  if (side.empty()) return;
  if (!(sigma_beta_sq > 0.0)) {
    throw InputError("update_beta: sigma_beta_sq must be positive");
  }
  const int p = side.p;
  const int n = side.n;
  Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(p, p) / sigma_beta_sq;
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!observed(i, j)) continue;
      const Eigen::RowVectorXd r = side.r(i, j);
      precision.noalias() += r.transpose() * r;
      moment.noalias() +=
          (state.Z_mean(i, j) - state.M_mean(i, j)) * r.transpose();
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError(
        "update_beta: normal-equation matrix is singular despite the ridge "
        "term");
  }
  state.beta_cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  state.beta_mean = ldlt.solve(moment);
  state.P_mean = side.linear_predictor(state.beta_mean);
}

// Evidence lower bound of the factorized posterior, holding U (and hence
// the cache) fixed. Latent z factors are kept only for observed pairs:
// held-out entries contribute no likelihood term, which is exactly what
// makes every sweep of update_z / update_m / update_beta non-decreasing
// here. All M terms are evaluated through the cache, so rank-truncated
// runs drop the discarded spectrum consistently.
inline double elbo(const VariationalState& state, const SpectralCache& cache,
                   const Eigen::MatrixXd& Y, const BoolGrid& observed,
                   const SideInfo& side, double sigma_beta_sq) {
  const int n = static_cast<int>(Y.rows());
  const int m = cache.rank();
  const double log_2pi = 1.8378770664093453;

  // Marginal variances of the M entries: (V o V) D (V o V)^T.
  const Eigen::MatrixXd V2 = cache.V.cwiseProduct(cache.V);
  const Eigen::MatrixXd var_m = V2 * cache.D * V2.transpose();

  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!observed(i, j)) continue;
      const int y = Y(i, j) == 1.0 ? 1 : 0;
      const double s = y == 1 ? 1.0 : -1.0;
      const double anchor = state.X_anchor(i, j);
      const double t = s * anchor;
      const double h = inverse_mills(t);
      const double z_mean = state.Z_mean(i, j);
      const double z_var = std::max(1.0 - t * h - h * h, 1e-300);
      const double x_now = state.M_mean(i, j) + state.P_mean(i, j);
      double var_p = 0.0;
      if (!side.empty()) {
        const Eigen::RowVectorXd r = side.r(i, j);
        var_p = r * state.beta_cov * r.transpose();
      }
      const double resid = z_mean - x_now;
      // E log N(z; m + p, 1)
      value += -0.5 * log_2pi -
               0.5 * (z_var + resid * resid + var_m(i, j) + var_p);
      // Entropy of the truncated normal. log Phi(t) goes through the
      // Mills ratio in the left tail, where the direct form loses it,
      // and through log1p on the right, where phi(t) underflows first.
      const double log_cdf =
          t < 0.0 ? -0.5 * t * t - 0.5 * log_2pi - std::log(h)
                  : std::log1p(-std_normal_cdf(-t));
      value += 0.5 * log_2pi + 0.5 * (1.0 - t * h) + log_cdf;
    }
  }

  // E log p(M | U) with K represented by the cache.
  double logdet_k = 0.0;
  for (int a = 0; a < m; ++a) {
    if (cache.eigenvalues(a) > 0.0) logdet_k += std::log(cache.eigenvalues(a));
  }
  const Eigen::MatrixXd S = cache.V.transpose() * state.M_mean * cache.V;
  double quad = 0.0;
  double kron_trace = 0.0;
  double logdet_sigma_m = 0.0;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double prod = cache.eigenvalues(a) * cache.eigenvalues(b);
      kron_trace += 1.0 / (1.0 + prod);
      if (prod > 0.0) {
        quad += S(a, b) * S(a, b) / prod;
        logdet_sigma_m += std::log(prod / (1.0 + prod));
      }
    }
  }
  value += -0.5 * n * n * log_2pi - n * logdet_k - 0.5 * (quad + kron_trace);
  // Entropy of q(M).
  value += 0.5 * n * n * (log_2pi + 1.0) + 0.5 * logdet_sigma_m;

  if (!side.empty()) {
    const int p = side.p;
    value += -0.5 * p * std::log(2.0 * M_PI * sigma_beta_sq) -
             (state.beta_mean.squaredNorm() + state.beta_cov.trace()) /
                 (2.0 * sigma_beta_sq);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(state.beta_cov);
    double logdet_cov = 0.0;
    for (int k = 0; k < p; ++k) {
      logdet_cov += std::log(ldlt.vectorD()(k));
    }
    value += 0.5 * p * (log_2pi + 1.0) + 0.5 * logdet_cov;
  }
  return value;
}

struct EstepOptions {
  double tol = 1e-6;     // max-abs change of <M> per sweep
  int max_sweeps = 200;
  bool record_elbo = false;
};

struct EstepReport {
  int sweeps = 0;
  bool converged = false;
  std::vector<double> elbo_per_sweep;
};

// Sweeps update_z -> update_m -> update_beta until <M> stabilizes.
inline EstepReport run_estep(VariationalState& state,
                             const SpectralCache& cache,
                             const ObservedNetwork& net,
                             const ObservationMask& train,
                             const SideInfo& side, double sigma_beta_sq,
                             const EstepOptions& opts = {}) {
  const BoolGrid observed = dense_observation(train, net);
  EstepReport report;
  auto guarded = [&](const char* step, auto&& update,
                     const Eigen::MatrixXd& result) {
    const std::string context = std::string(step) + " at sweep " +
                                std::to_string(report.sweeps);
    try {
      update();
    } catch (const NumericError& e) {
      throw NumericError(context + ": " + e.what());
    }
    if (!result.allFinite()) {
      throw NumericError(context + ": produced a non-finite value");
    }
  };
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    report.sweeps = sweep;
    const Eigen::MatrixXd m_before = state.M_mean;
    guarded("update_z",
            [&] { update_z(state, net.adjacency, observed); }, state.Z_mean);
    guarded("update_m", [&] { update_m(state, cache); }, state.M_mean);
    if (!side.empty()) {
      guarded("update_beta",
              [&] { update_beta(state, side, observed, sigma_beta_sq); },
              state.P_mean);
    }
    if (opts.record_elbo) {
      report.elbo_per_sweep.push_back(
          elbo(state, cache, net.adjacency, observed, side, sigma_beta_sq));
    }
    if ((state.M_mean - m_before).cwiseAbs().maxCoeff() < opts.tol) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace smgb
