#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "smgb/kernel.hpp"

using namespace smgb;

TEST_CASE("rbf_matrix of identical columns is all-ones plus jitter") {
  MembershipMatrix U(Eigen::MatrixXd::Constant(2, 5, 0.37));
  const KernelParams params{1.3, 1e-6};
  const Eigen::MatrixXd K = rbf_matrix(U, params);
  const Eigen::MatrixXd expected =
      Eigen::MatrixXd::Ones(5, 5) +
      params.jitter * Eigen::MatrixXd::Identity(5, 5);
  REQUIRE((K - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rbf_matrix hits one half at unit distance with gamma ln 2") {
  Eigen::MatrixXd vals(1, 2);
  vals << 0.0, 1.0;
  const Eigen::MatrixXd K =
      rbf_matrix(MembershipMatrix(vals), {std::log(2.0), 0.0});
  REQUIRE(K(0, 1) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("rbf_matrix is exactly symmetric") {
  std::mt19937_64 rng(3);
  const auto U = oracle::random_memberships(3, 12, rng);
  const Eigen::MatrixXd K = rbf_matrix(U, {0.8, 1e-6});
  REQUIRE(K == K.transpose().eval());
}

TEST_CASE("rbf_matrix rejects non-finite memberships") {
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(2, 3);
  vals(1, 2) = std::nan("");
  REQUIRE_THROWS_AS(rbf_matrix(MembershipMatrix(vals), {1.0, 0.0}),
                    NumericError);
}

TEST_CASE("rbf_matrix is invariant under simultaneous permutation") {
  std::mt19937_64 rng(5);
  const auto U = oracle::random_memberships(2, 8, rng);
  const Eigen::MatrixXd K = rbf_matrix(U, {0.6, 1e-6});
  std::vector<int> perm{3, 1, 7, 0, 5, 2, 6, 4};
  Eigen::MatrixXd permuted(2, 8);
  for (int i = 0; i < 8; ++i) permuted.col(i) = U.values.col(perm[i]);
  const Eigen::MatrixXd Kp = rbf_matrix(MembershipMatrix(permuted), {0.6, 1e-6});
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      REQUIRE(Kp(i, j) == Catch::Approx(K(perm[i], perm[j])).margin(1e-12));
    }
  }
}

TEST_CASE("rbf_partial vanishes where memberships coincide") {
  Eigen::MatrixXd vals(2, 3);
  vals.col(0) << 0.2, -0.1;
  vals.col(1) << 0.2, -0.1;  // same as node 0
  vals.col(2) << 1.0, 0.5;
  const MembershipMatrix U(vals);
  const Eigen::VectorXd g = rbf_partial(U, {0.9, 0.0}, 0, 0);
  REQUIRE(g(0) == 0.0);
  REQUIRE(g(1) == 0.0);
  REQUIRE(g(2) != 0.0);
}

TEST_CASE("rbf_partial matches central finite differences") {
  std::mt19937_64 rng(17);
  const KernelParams params{0.7, 0.0};
  const auto U = oracle::random_memberships(3, 6, rng);
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    for (int r = 0; r < 3; ++r) {
      const Eigen::VectorXd g = rbf_partial(U, params, i, r);
      MembershipMatrix up = U, down = U;
      up.values(r, i) += h;
      down.values(r, i) -= h;
      const Eigen::MatrixXd fd =
          (rbf_matrix(up, params) - rbf_matrix(down, params)) / (2.0 * h);
      for (int j = 0; j < 6; ++j) {
        REQUIRE(g(j) == Catch::Approx(fd(i, j)).margin(1e-6));
        REQUIRE(g(j) == Catch::Approx(fd(j, i)).margin(1e-6));
      }
      // Everything off row/column i is flat.
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          if (a != i && b != i) REQUIRE(std::abs(fd(a, b)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("rbf_partial_block agrees with rbf_partial") {
  std::mt19937_64 rng(23);
  const KernelParams params{1.1, 1e-6};
  const auto U = oracle::random_memberships(2, 7, rng);
  const Eigen::MatrixXd K = rbf_matrix(U, params);
  for (int i = 0; i < 7; ++i) {
    const Eigen::MatrixXd block = rbf_partial_block(U, params.gamma, K, i);
    for (int r = 0; r < 2; ++r) {
      const Eigen::VectorXd g = rbf_partial(U, params, i, r);
      REQUIRE((block.row(r).transpose() - g).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("rbf_partial validates indices") {
  const MembershipMatrix U(Eigen::MatrixXd::Zero(2, 3));
  REQUIRE_THROWS_AS(rbf_partial(U, {1.0, 0.0}, 3, 0), InputError);
  REQUIRE_THROWS_AS(rbf_partial(U, {1.0, 0.0}, 0, 2), InputError);
}

TEST_CASE("spectral_decompose of the identity gives unit spectrum") {
  const auto cache = spectral_decompose(Eigen::MatrixXd::Identity(3, 3));
  REQUIRE(cache.rank() == 3);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(cache.eigenvalues(k) == Catch::Approx(1.0).epsilon(1e-14));
  }
  REQUIRE((cache.D.array() - 0.5).abs().maxCoeff() < 1e-14);
}

TEST_CASE("spectral_decompose reconstructs the kernel") {
  std::mt19937_64 rng(31);
  const auto U = oracle::random_memberships(3, 9, rng);
  const Eigen::MatrixXd K = rbf_matrix(U, {0.5, 1e-6});
  const auto cache = spectral_decompose(K);
  const Eigen::MatrixXd rebuilt =
      cache.V * cache.eigenvalues.asDiagonal() * cache.V.transpose();
  REQUIRE((rebuilt - K).cwiseAbs().maxCoeff() < 1e-8);
  REQUIRE((cache.V.transpose() * cache.V -
           Eigen::MatrixXd::Identity(9, 9))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  for (int k = 1; k < cache.rank(); ++k) {
    REQUIRE(cache.eigenvalues(k) <= cache.eigenvalues(k - 1));
  }
}

TEST_CASE("zero eigenvalues zero out their shrinkage entries") {
  Eigen::VectorXd v(4);
  v << 1.0, -0.5, 2.0, 0.25;
  const Eigen::MatrixXd K = v * v.transpose();  // rank one, PSD
  const auto cache = spectral_decompose(K);
  REQUIRE(cache.eigenvalues(0) == Catch::Approx(v.squaredNorm()));
  for (int k = 1; k < 4; ++k) {
    REQUIRE(cache.eigenvalues(k) >= 0.0);
    REQUIRE(cache.eigenvalues(k) < 1e-12);
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = 1; b < 4; ++b) {
      REQUIRE(cache.D(a, b) < 1e-10);
    }
  }
}

TEST_CASE("shrinkage entries live in [0, 1) and grow with the spectrum") {
  std::mt19937_64 rng(41);
  const auto U = oracle::random_memberships(2, 10, rng, 0.3);
  const auto cache = spectral_decompose(rbf_matrix(U, {1.0, 1e-6}));
  for (int a = 0; a < cache.rank(); ++a) {
    for (int b = 0; b < cache.rank(); ++b) {
      REQUIRE(cache.D(a, b) >= 0.0);
      REQUIRE(cache.D(a, b) < 1.0);
      REQUIRE(cache.D(a, b) == cache.D(b, a));
      if (b > 0) {
        // eigenvalues are nonincreasing, so D is monotone along rows
        REQUIRE(cache.D(a, b) <= cache.D(a, b - 1) + 1e-15);
      }
    }
  }
}

TEST_CASE("truncated cache with full rank reproduces the full cache") {
  std::mt19937_64 rng(53);
  const auto U = oracle::random_memberships(3, 7, rng);
  const Eigen::MatrixXd K = rbf_matrix(U, {0.9, 1e-6});
  const auto full = spectral_decompose(K);
  const auto trunc = spectral_decompose(K, 7);
  REQUIRE((full.eigenvalues - trunc.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((full.V - trunc.V).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((full.D - trunc.D).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncation keeps the leading eigenpairs") {
  std::mt19937_64 rng(59);
  const auto U = oracle::random_memberships(2, 8, rng, 0.2);
  const Eigen::MatrixXd K = rbf_matrix(U, {1.0, 1e-6});
  const auto full = spectral_decompose(K);
  const auto trunc = spectral_decompose(K, 3);
  REQUIRE(trunc.rank() == 3);
  REQUIRE((trunc.eigenvalues - full.eigenvalues.head(3)).cwiseAbs().maxCoeff() <
          1e-12);
}
