#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "smgb/network.hpp"

using namespace smgb;

TEST_CASE("parse_edge_list handles the empty stream") {
  std::istringstream in("");
  const auto net = parse_edge_list(in, 3, true);
  REQUIRE(net.n == 3);
  REQUIRE(net.adjacency.isZero(0.0));
}

TEST_CASE("parse_edge_list mirrors undirected edges") {
  std::istringstream in("0 1\n");
  const auto net = parse_edge_list(in, 2, false);
  REQUIRE(net.adjacency(0, 1) == 1.0);
  REQUIRE(net.adjacency(1, 0) == 1.0);
}

TEST_CASE("parse_edge_list is idempotent on duplicates") {
  std::istringstream once("0 1\n");
  std::istringstream twice("0 1\n0 1\n");
  const auto a = parse_edge_list(once, 2, true);
  const auto b = parse_edge_list(twice, 2, true);
  REQUIRE(a.adjacency == b.adjacency);
}

TEST_CASE("parse_edge_list skips comments and blank lines") {
  std::istringstream in("# header\n\n0 1 # inline\n  \n2 0\n");
  const auto net = parse_edge_list(in, 3, true);
  REQUIRE(net.adjacency(0, 1) == 1.0);
  REQUIRE(net.adjacency(2, 0) == 1.0);
  REQUIRE(net.adjacency.sum() == 2.0);
}

TEST_CASE("parse_edge_list errors name the line") {
  std::istringstream bad_range("0 1\n0 9\n");
  REQUIRE_THROWS_MATCHES(parse_edge_list(bad_range, 3, true), InputError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 2")));
  std::istringstream bad_token("0 x\n");
  REQUIRE_THROWS_AS(parse_edge_list(bad_token, 3, true), InputError);
  std::istringstream trailing("0 1 junk\n");
  REQUIRE_THROWS_AS(parse_edge_list(trailing, 3, true), InputError);
}

TEST_CASE("edge list round-trips through serialization") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (bool directed : {true, false}) {
    ObservedNetwork net;
    net.n = 9;
    net.directed = directed;
    net.adjacency = Eigen::MatrixXd::Zero(9, 9);
    for (int i = 0; i < 9; ++i) {
      for (int j = i + 1; j < 9; ++j) {
        if (unif(rng) < 0.3) {
          net.adjacency(i, j) = 1.0;
          if (!directed && unif(rng) < 2.0) net.adjacency(j, i) = 1.0;
        }
        if (directed && unif(rng) < 0.3) net.adjacency(j, i) = 1.0;
      }
    }
    if (!directed) {
      net.adjacency =
          (net.adjacency + net.adjacency.transpose()).cwiseMin(1.0);
    }
    std::ostringstream out;
    write_edge_list(out, net);
    std::istringstream in(out.str());
    const auto back = parse_edge_list(in, 9, directed);
    REQUIRE(back.adjacency == net.adjacency);
  }
}

TEST_CASE("holdout_split matches the 720-of-900 count") {
  auto [net, truth] = synth_cliques(3, 10, 0.05, 5);
  REQUIRE(net.modeled_pairs().size() == 900);
  auto [train, test] = holdout_split(net, 0.8, 17);
  REQUIRE(train.size() == 720);
  REQUIRE(test.size() == 180);
}

TEST_CASE("holdout_split with fraction one leaves the test mask empty") {
  auto [net, truth] = synth_cliques(2, 3, 0.0, 1);
  auto [train, test] = holdout_split(net, 1.0, 3);
  REQUIRE(test.pairs.empty());
  REQUIRE(train.size() == net.modeled_pairs().size());
}

TEST_CASE("holdout_split is deterministic in the seed") {
  auto [net, truth] = synth_cliques(3, 4, 0.1, 2);
  auto [a_train, a_test] = holdout_split(net, 0.7, 42);
  auto [b_train, b_test] = holdout_split(net, 0.7, 42);
  REQUIRE(a_train.pairs == b_train.pairs);
  REQUIRE(a_test.pairs == b_test.pairs);
}

TEST_CASE("every modeled pair lands in exactly one mask") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    auto [net, truth] = synth_cliques(2 + rep % 3, 3, 0.2, rep);
    net.directed = rep % 2 == 0;
    if (!net.directed) {
      net.adjacency =
          (net.adjacency + net.adjacency.transpose()).cwiseMin(1.0);
    }
    const double frac = 0.3 + 0.1 * rep;
    auto [train, test] = holdout_split(net, frac, rng());
    std::set<IndexPair> seen;
    for (auto pr : train.pairs) REQUIRE(seen.insert(pr).second);
    for (auto pr : test.pairs) REQUIRE(seen.insert(pr).second);
    const auto modeled = net.modeled_pairs();
    REQUIRE(seen.size() == modeled.size());
    for (auto pr : modeled) REQUIRE(seen.count(pr) == 1);
  }
}

TEST_CASE("undirected splits stay on canonical pairs") {
  ObservedNetwork net;
  net.n = 6;
  net.directed = false;
  net.include_diagonal = false;
  net.adjacency = Eigen::MatrixXd::Zero(6, 6);
  auto [train, test] = holdout_split(net, 0.5, 9);
  for (auto [i, j] : train.pairs) REQUIRE(i < j);
  for (auto [i, j] : test.pairs) REQUIRE(i < j);
  const auto grid = dense_observation(train, net);
  for (auto [i, j] : train.pairs) {
    REQUIRE(grid(i, j));
    REQUIRE(grid(j, i));
  }
}

TEST_CASE("synth_cliques flips exactly the stated number of entries") {
  auto [noisy, truth] = synth_cliques(3, 10, 0.05, 13);
  auto [clean, truth2] = synth_cliques(3, 10, 0.0, 13);
  REQUIRE(noisy.n == 30);
  REQUIRE(truth.one_hot.rows() == 3);
  REQUIRE(truth.one_hot.cols() == 30);
  int diff = 0;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      if (noisy.adjacency(i, j) != clean.adjacency(i, j)) ++diff;
    }
  }
  REQUIRE(diff == 45);
  for (int i = 0; i < 30; ++i) {
    REQUIRE(truth.one_hot.col(i).sum() == 1.0);
  }
}

TEST_CASE("synth_cliques with zero noise is exactly block-diagonal") {
  auto [net, truth] = synth_cliques(2, 2, 0.0, 99);
  Eigen::MatrixXd expected(4, 4);
  expected << 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1;
  REQUIRE(net.adjacency == expected);
}

TEST_CASE("noise-free synthetic adjacency follows the assignments") {
  auto [net, truth] = synth_cliques(4, 3, 0.0, 21);
  for (int i = 0; i < net.n; ++i) {
    for (int j = 0; j < net.n; ++j) {
      const bool same = truth.assignments[i] == truth.assignments[j];
      REQUIRE(net.adjacency(i, j) == (same ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("synth_cliques is deterministic in the seed") {
  auto [a, ta] = synth_cliques(3, 10, 0.05, 77);
  auto [b, tb] = synth_cliques(3, 10, 0.05, 77);
  REQUIRE(a.adjacency == b.adjacency);
  REQUIRE(ta.assignments == tb.assignments);
}

TEST_CASE("side info with p = 0 yields a zero predictor") {
  const auto side = SideInfo::none(4);
  REQUIRE(side.empty());
  const Eigen::MatrixXd P = side.linear_predictor(Eigen::VectorXd());
  REQUIRE(P.isZero(0.0));
}
