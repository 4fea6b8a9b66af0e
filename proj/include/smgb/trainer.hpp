#pragma once

// Outer variational-EM loop, initialization, gamma cross-validation, and
// link scoring.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "smgb/estep.hpp"
#include "smgb/evaluation.hpp"
#include "smgb/kernel.hpp"
#include "smgb/mstep.hpp"
#include "smgb/network.hpp"
#include "smgb/types.hpp"

namespace smgb {

enum class InitMode { gaussian, spectral };

struct FitConfig {
  int d = 3;
  double gamma = 1.0;
  std::vector<double> gamma_grid = {0.01, 0.1, 1.0, 10.0};
  double lambda = 0.1;
  double sigma_beta_sq = 1.0;
  double jitter = 1e-6;
  int rank_m = 0;  // 0 means full rank
  double tol_e = 1e-6;
  double tol_outer = 1e-4;
  int max_e = 200;
  int max_outer = 50;
  int max_mstep = 100;
  std::uint64_t seed = 1;
  bool nonnegative = false;
  bool include_diagonal = false;
  InitMode init = InitMode::gaussian;

  KernelParams kernel() const { return KernelParams{gamma, jitter}; }

  void validate() const {
    if (d < 1) throw InputError("config: d must be at least 1");
    if (!(gamma > 0.0)) throw InputError("config: gamma must be positive");
    if (lambda < 0.0) throw InputError("config: lambda must be nonnegative");
    if (!(sigma_beta_sq > 0.0)) {
      throw InputError("config: sigma_beta_sq must be positive");
    }
    if (jitter < 0.0) throw InputError("config: jitter must be nonnegative");
    if (!(tol_e > 0.0) || !(tol_outer > 0.0)) {
      throw InputError("config: tolerances must be positive");
    }
    if (max_e < 1 || max_outer < 1 || max_mstep < 1) {
      throw InputError("config: iteration caps must be at least 1");
    }
    if (rank_m < 0) throw InputError("config: rank must be nonnegative");
  }
};

struct OuterIterationRecord {
  int iteration = 0;
  double penalized_objective = 0.0;
  double elbo = 0.0;
  int estep_sweeps = 0;
  double seconds = 0.0;
};

struct FittedModel {
  MembershipMatrix U;
  Eigen::MatrixXd M_mean;
  Eigen::VectorXd beta_mean;
  FitConfig config;
  std::vector<OuterIterationRecord> diagnostics;
};

// Default: N(0, 0.1^2) entries. Spectral mode instead seeds from the
// top-d eigenvectors of the symmetrized, grand-mean-centered adjacency,
// each row rescaled to standard deviation 0.1.
inline MembershipMatrix init_memberships(int n, int d, std::uint64_t seed,
                                         const ObservedNetwork* net = nullptr,
                                         InitMode mode = InitMode::gaussian,
                                         bool nonnegative = false) {
  if (n < 1 || d < 1) throw InputError("init_memberships: n, d must be positive");
  Eigen::MatrixXd U(d, n);
  if (mode == InitMode::spectral) {
    if (net == nullptr) {
      throw InputError("init_memberships: spectral mode needs a network");
    }
    Eigen::MatrixXd A =
        0.5 * (net->adjacency + net->adjacency.transpose());
    A.array() -= A.mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) {
      throw NumericError("init_memberships: adjacency eigensolver failed");
    }
    for (int r = 0; r < d; ++r) {
      Eigen::RowVectorXd row = solver.eigenvectors().col(n - 1 - r).transpose();
      const double sd =
          std::sqrt((row.array() - row.mean()).square().sum() / double(n));
      U.row(r) = sd > 0.0 ? (0.1 / sd) * row : row;
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.1);
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < d; ++r) U(r, i) = gauss(rng);
    }
  }
  if (nonnegative) U = U.cwiseAbs();
  return MembershipMatrix(std::move(U));
}

// Alternates spectral-cache construction, the variational E-step, and the
// penalized M-step until the membership matrix stabilizes.
inline FittedModel fit(const ObservedNetwork& net, const ObservationMask& train,
                       const SideInfo& side, const FitConfig& config) {
  config.validate();
  net.validate();
  train.validate(net);
  side.validate();
  if (train.pairs.empty()) throw InputError("fit: training mask is empty");

  const int n = net.n;
  MembershipMatrix U =
      init_memberships(n, config.d, config.seed, &net, config.init,
                       config.nonnegative);
  VariationalState state =
      VariationalState::initial(n, side, config.sigma_beta_sq);
  const BoolGrid observed = dense_observation(train, net);

  FittedModel model;
  model.config = config;

  EstepOptions eopts;
  eopts.tol = config.tol_e;
  eopts.max_sweeps = config.max_e;

  for (int iter = 1; iter <= config.max_outer; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    auto fail = [&](const char* step, const std::exception& e) {
      throw NumericError("fit: outer iteration " + std::to_string(iter) +
                         ", " + step + ": " + e.what());
    };

    SpectralCache cache;
    EstepReport estep;
    try {
      cache = spectral_decompose(rbf_matrix(U, config.kernel()), config.rank_m);
    } catch (const NumericError& e) {
      fail("spectral_decompose", e);
    }
    try {
      estep = run_estep(state, cache, net, train, side, config.sigma_beta_sq,
                        eopts);
    } catch (const NumericError& e) {
      fail("run_estep", e);
    }

    MstepProblem prob{cache, state.M_mean, config.lambda,
                      config.kernel(), config.nonnegative};
    MstepResult mres;
    try {
      mres = optimize_memberships(U, prob, config.max_mstep);
    } catch (const NumericError& e) {
      fail("optimize_memberships", e);
    }
    const double delta_u =
        (mres.U.values - U.values).cwiseAbs().maxCoeff();
    U = mres.U;

    OuterIterationRecord rec;
    rec.iteration = iter;
    rec.penalized_objective = mres.objective;
    rec.elbo = elbo(state, cache, net.adjacency, observed, side,
                    config.sigma_beta_sq);
    rec.estep_sweeps = estep.sweeps;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    model.diagnostics.push_back(rec);

    if (delta_u < config.tol_outer) break;
  }

  model.U = std::move(U);
  model.M_mean = state.M_mean;
  model.beta_mean = state.beta_mean;
  return model;
}

struct PairScore {
  double score = 0.0;        // <m_ij> + <beta>^T r_ij
  double probability = 0.5;  // Phi(score)
};

inline std::vector<PairScore> score_pairs(const FittedModel& model,
                                          const SideInfo& side,
                                          const std::vector<IndexPair>& pairs) {
  const int n = static_cast<int>(model.M_mean.rows());
  std::vector<PairScore> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw InputError("score_pairs: index pair out of range");
    }
    double s = model.M_mean(i, j);
    if (!side.empty() && model.beta_mean.size() == side.p) {
      s += side.r(i, j).dot(model.beta_mean);
    }
    out.push_back({s, std_normal_cdf(s)});
  }
  return out;
}

struct GammaCvRow {
  double gamma = 0.0;
  double val_auc = 0.0;
  bool ok = false;
  std::string error;
};

struct GammaCvResult {
  double best_gamma = 0.0;
  std::vector<GammaCvRow> table;
  FittedModel model;  // refit on the full training mask at best_gamma
};

// Selects gamma on an inner 80/20 split of the training pairs, then
// refits at the winner. Ties break toward the smaller gamma.
inline GammaCvResult cross_validate_gamma(const ObservedNetwork& net,
                                          const ObservationMask& train,
                                          const SideInfo& side,
                                          const FitConfig& config) {
  if (config.gamma_grid.empty()) {
    throw InputError("cross_validate_gamma: empty gamma grid");
  }
  // Inner split over the training pairs only.
  std::vector<IndexPair> pool = train.pairs;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(pool.begin(), pool.end(), rng);
  const auto cut = std::llround(0.8 * double(pool.size()));
  ObservationMask inner_train, inner_val;
  inner_train.pairs.assign(pool.begin(), pool.begin() + cut);
  inner_val.pairs.assign(pool.begin() + cut, pool.end());
  std::sort(inner_train.pairs.begin(), inner_train.pairs.end());
  std::sort(inner_val.pairs.begin(), inner_val.pairs.end());

  std::vector<double> grid = config.gamma_grid;
  std::sort(grid.begin(), grid.end());

  GammaCvResult result;
  bool any_ok = false;
  double best_auc = -1.0;
  for (double gamma : grid) {
    GammaCvRow row;
    row.gamma = gamma;
    try {
      FitConfig inner_cfg = config;
      inner_cfg.gamma = gamma;
      const FittedModel m = fit(net, inner_train, side, inner_cfg);
      const auto scored = score_pairs(m, side, inner_val.pairs);
      std::vector<double> scores;
      std::vector<int> labels;
      scores.reserve(scored.size());
      labels.reserve(scored.size());
      for (std::size_t k = 0; k < scored.size(); ++k) {
        scores.push_back(scored[k].score);
        const auto& [i, j] = inner_val.pairs[k];
        labels.push_back(net.adjacency(i, j) == 1.0 ? 1 : 0);
      }
      row.val_auc = auc(scores, labels);
      row.ok = true;
      if (row.val_auc > best_auc) {  // ties keep the earlier (smaller) gamma
        best_auc = row.val_auc;
        result.best_gamma = gamma;
      }
      any_ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    result.table.push_back(row);
  }
  if (!any_ok) {
    throw NumericError("cross_validate_gamma: every gamma in the grid failed");
  }
  FitConfig final_cfg = config;
  final_cfg.gamma = result.best_gamma;
  result.model = fit(net, train, side, final_cfg);
  return result;
}

}  // namespace smgb
