#pragma once

// Rank-based link-prediction metrics and membership-recovery distances.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smgb/network.hpp"
#include "smgb/types.hpp"

namespace smgb {

// Mann-Whitney AUC with half credit for ties, computed by average ranks.
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InputError("auc: scores and labels differ in length");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++n_pos;
    } else if (y == 0) {
      ++n_neg;
    } else {
      throw InputError("auc: labels must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw InputError("auc: undefined, needs both a positive and a negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double rank_sum_pos = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t end = k;
    while (end + 1 < order.size() &&
           scores[order[end + 1]] == scores[order[k]]) {
      ++end;
    }
    const double avg_rank = 0.5 * (double(k + 1) + double(end + 1));
    for (std::size_t t = k; t <= end; ++t) {
      if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
    }
    k = end + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

// ROC curve sampled at every distinct score (score >= threshold is a
// predicted positive), from (0,0) to (1,1).
inline std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InputError("roc_points: scores and labels differ in length");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw InputError("roc_points: needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<RocPoint> points;
  points.push_back(
      {std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0, k = 0;
  while (k < order.size()) {
    const double thr = scores[order[k]];
    while (k < order.size() && scores[order[k]] == thr) {
      if (labels[order[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++k;
    }
    points.push_back({thr, double(fp) / double(n_neg),
                      double(tp) / double(n_pos)});
  }
  return points;
}

// Clips negatives to zero and rescales every column to sum one; an
// all-zero column becomes uniform.
inline MembershipMatrix normalize_memberships(const MembershipMatrix& U) {
  MembershipMatrix out = U;
  const int d = out.dims();
  for (int i = 0; i < out.nodes(); ++i) {
    Eigen::VectorXd col = out.values.col(i).cwiseMax(0.0);
    const double total = col.sum();
    if (total > 0.0) {
      col /= total;
    } else {
      col.setConstant(1.0 / double(d));
    }
    out.values.col(i) = col;
  }
  return out;
}

// Frobenius distance of the normalized memberships to the one-hot truth
// without any label alignment.
inline double membership_error_unaligned(const MembershipMatrix& U,
                                         const GroundTruthMembership& truth) {
  if (U.dims() != truth.one_hot.rows() || U.nodes() != truth.one_hot.cols()) {
    throw InputError("membership_error: dimension mismatch with truth");
  }
  const MembershipMatrix norm = normalize_memberships(U);
  return (norm.values - truth.one_hot).norm();
}

// Same distance minimized over all group-label permutations (exhaustive,
// d <= 8). Group labels are arbitrary, so the aligned distance is the
// meaningful one.
inline double membership_error(const MembershipMatrix& U,
                               const GroundTruthMembership& truth) {
  const int d = U.dims();
  if (U.dims() != truth.one_hot.rows() || U.nodes() != truth.one_hot.cols()) {
    throw InputError("membership_error: dimension mismatch with truth");
  }
  if (d > 8) {
    throw InputError(
        "membership_error: exhaustive alignment supports d <= 8 only");
  }
  const MembershipMatrix norm = normalize_memberships(U);
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sq = 0.0;
    for (int r = 0; r < d; ++r) {
      sq += (norm.values.row(perm[r]) - truth.one_hot.row(r)).squaredNorm();
    }
    best = std::min(best, sq);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

// Full-precision decimal, with a trailing ".0" for integral values so
// metric lines read as real numbers.
inline std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

// Per-seed metric values with mean / standard-error aggregates.
struct MetricReport {
  std::vector<double> auc_per_seed;
  std::vector<double> dist_aligned_per_seed;    // empty when no truth
  std::vector<double> dist_unaligned_per_seed;

  bool has_distance() const { return !dist_aligned_per_seed.empty(); }

  static double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  }
  // Sample standard deviation over sqrt(#seeds).
  static double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()));
  }

  std::string to_key_value() const {
    std::ostringstream out;
    if (auc_per_seed.size() == 1) {
      out << "auc = " << format_metric(auc_per_seed[0]) << '\n';
    } else if (!auc_per_seed.empty()) {
      out << "auc_mean = " << format_metric(mean(auc_per_seed)) << '\n';
      out << "auc_se = " << format_metric(standard_error(auc_per_seed))
          << '\n';
      out << "seeds = " << auc_per_seed.size() << '\n';
    }
    if (has_distance()) {
      if (dist_aligned_per_seed.size() == 1) {
        out << "membership_distance = "
            << format_metric(dist_aligned_per_seed[0]) << '\n';
        out << "membership_distance_unaligned = "
            << format_metric(dist_unaligned_per_seed[0]) << '\n';
      } else {
        out << "membership_distance_mean = "
            << format_metric(mean(dist_aligned_per_seed)) << '\n';
        out << "membership_distance_se = "
            << format_metric(standard_error(dist_aligned_per_seed)) << '\n';
        out << "membership_distance_unaligned_mean = "
            << format_metric(mean(dist_unaligned_per_seed)) << '\n';
      }
    }
    return out.str();
  }

  std::string per_seed_csv() const {
    std::ostringstream out;
    out << "seed,auc";
    if (has_distance()) out << ",membership_distance,membership_distance_unaligned";
    out << '\n';
    for (std::size_t k = 0; k < auc_per_seed.size(); ++k) {
      out << k << ',' << format_metric(auc_per_seed[k]);
      if (has_distance()) {
        out << ',' << format_metric(dist_aligned_per_seed[k]) << ','
            << format_metric(dist_unaligned_per_seed[k]);
      }
      out << '\n';
    }
    return out.str();
  }
};

}  // namespace smgb
