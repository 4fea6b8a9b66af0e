#pragma once

// Binary network observations: edge-list ingestion, synthetic clique
// generators, and train/test hold-out splits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smgb/types.hpp"

namespace smgb {

// n x n binary adjacency Y. Undirected networks keep a symmetric matrix;
// when include_diagonal is false the self-pairs are never modeled.
struct ObservedNetwork {
  int n = 0;
  Eigen::MatrixXd adjacency;
  bool directed = true;
  bool include_diagonal = false;

  void validate() const {
    if (n <= 0 || adjacency.rows() != n || adjacency.cols() != n) {
      throw InputError("network: adjacency must be n x n with n > 0");
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double y = adjacency(i, j);
        if (y != 0.0 && y != 1.0) {
          throw InputError("network: adjacency entry (" + std::to_string(i) +
                           "," + std::to_string(j) + ") is not 0 or 1");
        }
      }
    }
    if (!directed && !adjacency.isApprox(adjacency.transpose())) {
      throw InputError("network: undirected adjacency must be symmetric");
    }
  }

  // Pairs the model is responsible for: all (i,j) when directed, canonical
  // i <= j pairs when undirected; diagonal only if include_diagonal.
  std::vector<IndexPair> modeled_pairs() const {
    std::vector<IndexPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      const int j0 = directed ? 0 : i;
      for (int j = j0; j < n; ++j) {
        if (i == j && !include_diagonal) continue;
        pairs.emplace_back(i, j);
      }
    }
    return pairs;
  }
};

// A set of observed index pairs. For undirected networks the pairs are
// canonical (i <= j); dense expansion mirrors them.
struct ObservationMask {
  std::vector<IndexPair> pairs;

  std::size_t size() const { return pairs.size(); }

  void validate(const ObservedNetwork& net) const {
    std::vector<IndexPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InputError("mask: duplicate index pair");
    }
    for (const auto& [i, j] : pairs) {
      if (i < 0 || i >= net.n || j < 0 || j >= net.n) {
        throw InputError("mask: index pair out of range");
      }
    }
  }
};

// Dense boolean view of a mask; undirected masks mark both orientations.
inline BoolGrid dense_observation(const ObservationMask& mask,
                                  const ObservedNetwork& net) {
  BoolGrid grid = BoolGrid::Constant(net.n, net.n, false);
  for (const auto& [i, j] : mask.pairs) {
    grid(i, j) = true;
    if (!net.directed) grid(j, i) = true;
  }
  return grid;
}

// Per-pair side information r_ij, stored as an (n*n) x p matrix with row
// i*n + j. p = 0 means no side information.
struct SideInfo {
  int n = 0;
  int p = 0;
  Eigen::MatrixXd features;  // (n*n) x p

  static SideInfo none(int n) { return SideInfo{n, 0, Eigen::MatrixXd()}; }

  bool empty() const { return p == 0; }

  Eigen::RowVectorXd r(int i, int j) const {
    return features.row(static_cast<Eigen::Index>(i) * n + j);
  }

  void validate() const {
    if (p < 0) throw InputError("side info: negative feature dimension");
    if (p > 0 && (features.rows() != static_cast<Eigen::Index>(n) * n ||
                  features.cols() != p)) {
      throw InputError("side info: features must be (n*n) x p");
    }
  }

  // P = {beta^T r_ij} as an n x n matrix; all zeros when p = 0 or beta
  // is empty.
  Eigen::MatrixXd linear_predictor(const Eigen::VectorXd& beta) const {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    if (p == 0 || beta.size() == 0) return P;
    if (beta.size() != p) {
      throw InputError("side info: beta length does not match p");
    }
    const Eigen::VectorXd flat = features * beta;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        P(i, j) = flat(static_cast<Eigen::Index>(i) * n + j);
      }
    }
    return P;
  }
};

// One-hot ground-truth group memberships of a synthetic network.
struct GroundTruthMembership {
  std::vector<int> assignments;  // group index per node, in [0, d)
  Eigen::MatrixXd one_hot;       // d x n, column i = e_{assignments[i]}

  static GroundTruthMembership from_assignments(const std::vector<int>& a,
                                                int d) {
    GroundTruthMembership truth;
    truth.assignments = a;
    truth.one_hot = Eigen::MatrixXd::Zero(d, static_cast<int>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0 || a[i] >= d) {
        throw InputError("ground truth: group index out of range");
      }
      truth.one_hot(a[i], static_cast<int>(i)) = 1.0;
    }
    return truth;
  }
};

// Reads whitespace-separated "i j" edge lines. '#' starts a comment,
// blank lines are skipped, duplicates are idempotent.
inline ObservedNetwork parse_edge_list(std::istream& in, int n,
                                       bool directed) {
  if (n <= 0) throw InputError("parse_edge_list: node count must be positive");
  ObservedNetwork net;
  net.n = n;
  net.adjacency = Eigen::MatrixXd::Zero(n, n);
  net.directed = directed;
  net.include_diagonal = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream fields(line);
    long long i = 0, j = 0;
    if (!(fields >> i)) continue;  // blank or comment-only line
    if (!(fields >> j)) {
      throw InputError("parse_edge_list: line " + std::to_string(line_no) +
                       ": expected two node indices");
    }
    std::string extra;
    if (fields >> extra) {
      throw InputError("parse_edge_list: line " + std::to_string(line_no) +
                       ": trailing token '" + extra + "'");
    }
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw InputError("parse_edge_list: line " + std::to_string(line_no) +
                       ": index out of range [0, " + std::to_string(n) + ")");
    }
    net.adjacency(static_cast<int>(i), static_cast<int>(j)) = 1.0;
    if (!directed) net.adjacency(static_cast<int>(j), static_cast<int>(i)) = 1.0;
  }
  return net;
}

// Canonical edge-list serialization; parse_edge_list on the output
// reconstructs the same adjacency.
inline void write_edge_list(std::ostream& out, const ObservedNetwork& net) {
  for (int i = 0; i < net.n; ++i) {
    const int j0 = net.directed ? 0 : i;
    for (int j = j0; j < net.n; ++j) {
      if (net.adjacency(i, j) == 1.0) {
        out << i << ' ' << j << '\n';
      }
    }
  }
}

// Uniformly random partition of the modeled pairs into train/test.
// |train| = round(train_fraction * total); the two masks are disjoint and
// together cover every modeled pair.
inline std::pair<ObservationMask, ObservationMask> holdout_split(
    const ObservedNetwork& net, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw InputError("holdout_split: train fraction must lie in (0, 1]");
  }
  std::vector<IndexPair> pairs = net.modeled_pairs();
  if (pairs.empty()) throw InputError("holdout_split: no modeled pairs");

  std::mt19937_64 rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);

  const auto total = static_cast<long long>(pairs.size());
  auto take = std::llround(train_fraction * static_cast<double>(total));
  take = std::clamp<long long>(take, 0, total);

  ObservationMask train, test;
  train.pairs.assign(pairs.begin(), pairs.begin() + take);
  test.pairs.assign(pairs.begin() + take, pairs.end());
  std::sort(train.pairs.begin(), train.pairs.end());
  std::sort(test.pairs.begin(), test.pairs.end());
  return {std::move(train), std::move(test)};
}

// Block-diagonal clique network with uniform random entry flips. The flip
// count is round(flip_rate * n^2), toggled without replacement over all
// entries including the diagonal; the result is treated as directed.
inline std::pair<ObservedNetwork, GroundTruthMembership> synth_cliques(
    int num_cliques, int clique_size, double flip_rate, std::uint64_t seed) {
  if (num_cliques < 1 || clique_size < 1) {
    throw InputError("synth_cliques: need at least one clique of size one");
  }
  if (flip_rate < 0.0 || flip_rate > 1.0) {
    throw InputError("synth_cliques: flip rate must lie in [0, 1]");
  }
  const int n = num_cliques * clique_size;

  ObservedNetwork net;
  net.n = n;
  net.directed = true;
  net.include_diagonal = true;
  net.adjacency = Eigen::MatrixXd::Zero(n, n);

  std::vector<int> assignments(n);
  for (int i = 0; i < n; ++i) assignments[i] = i / clique_size;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (assignments[i] == assignments[j]) net.adjacency(i, j) = 1.0;
    }
  }

  const auto flips =
      std::llround(flip_rate * static_cast<double>(n) * static_cast<double>(n));
  if (flips > 0) {
    std::vector<long long> cells(static_cast<std::size_t>(n) * n);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      cells[k] = static_cast<long long>(k);
    }
    std::mt19937_64 rng(seed);
    std::vector<long long> chosen;
    chosen.reserve(static_cast<std::size_t>(flips));
    std::sample(cells.begin(), cells.end(), std::back_inserter(chosen),
                static_cast<std::size_t>(flips), rng);
    for (long long cell : chosen) {
      const int i = static_cast<int>(cell / n);
      const int j = static_cast<int>(cell % n);
      net.adjacency(i, j) = 1.0 - net.adjacency(i, j);
    }
  }
  return {std::move(net),
          GroundTruthMembership::from_assignments(assignments, num_cliques)};
}

}  // namespace smgb
