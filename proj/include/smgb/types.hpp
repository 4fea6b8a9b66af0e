#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace smgb {

// Caller-supplied data violated a precondition: bad indices, malformed
// files, inconsistent dimensions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed: factorization breakdown, non-finite
// intermediates.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using IndexPair = std::pair<int, int>;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// d x n matrix of latent membership vectors; column i is the membership
// vector of node i.
struct MembershipMatrix {
  Eigen::MatrixXd values;

  MembershipMatrix() = default;
  explicit MembershipMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

  int dims() const { return static_cast<int>(values.rows()); }
  int nodes() const { return static_cast<int>(values.cols()); }

  void require_finite(const char* where) const {
    if (!values.allFinite()) {
      throw NumericError(std::string(where) +
                         ": membership matrix has non-finite entries");
    }
  }
};

}  // namespace smgb
