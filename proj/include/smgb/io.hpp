#pragma once

// On-disk formats: dense 0/1 adjacency CSV, full-precision matrix and
// vector CSVs, per-node membership rows, pair scores, and side-info
// triplets. All numeric output uses round-trip decimal precision so
// reruns with identical seeds are byte-identical.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smgb/network.hpp"
#include "smgb/types.hpp"

namespace smgb {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open for reading: " + path.string());
  return in;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& token,
                           const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    while (used < token.size() &&
           std::isspace(static_cast<unsigned char>(token[used]))) {
      ++used;
    }
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError(where + ": cannot parse number '" + token + "'");
  }
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& mat) {
  auto out = open_output(path);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << format_full(mat(i, j));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(parse_double(
          f, path.string() + ": line " + std::to_string(line_no)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": empty matrix file");
  Eigen::MatrixXd mat(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return mat;
}

// Adjacency entries are written as bare "0"/"1".
inline void write_adjacency_csv(const std::filesystem::path& path,
                                const ObservedNetwork& net) {
  auto out = open_output(path);
  for (int i = 0; i < net.n; ++i) {
    for (int j = 0; j < net.n; ++j) {
      if (j) out << ',';
      out << (net.adjacency(i, j) == 1.0 ? '1' : '0');
    }
    out << '\n';
  }
}

inline ObservedNetwork read_adjacency_csv(const std::filesystem::path& path,
                                          bool directed,
                                          bool include_diagonal) {
  const Eigen::MatrixXd mat = read_matrix_csv(path);
  if (mat.rows() != mat.cols()) {
    throw InputError(path.string() + ": adjacency must be square");
  }
  ObservedNetwork net;
  net.n = static_cast<int>(mat.rows());
  net.adjacency = mat;
  net.directed = directed;
  net.include_diagonal = include_diagonal;
  net.validate();
  return net;
}

// One row per node: node id, then the d membership values.
inline void write_membership_csv(const std::filesystem::path& path,
                                 const MembershipMatrix& U) {
  auto out = open_output(path);
  for (int i = 0; i < U.nodes(); ++i) {
    out << i;
    for (int r = 0; r < U.dims(); ++r) {
      out << ',' << format_full(U.values(r, i));
    }
    out << '\n';
  }
}

inline MembershipMatrix read_membership_csv(
    const std::filesystem::path& path) {
  const Eigen::MatrixXd rows = read_matrix_csv(path);
  if (rows.cols() < 2) {
    throw InputError(path.string() + ": membership rows need node id + values");
  }
  const int n = static_cast<int>(rows.rows());
  const int d = static_cast<int>(rows.cols()) - 1;
  Eigen::MatrixXd U(d, n);
  for (int k = 0; k < n; ++k) {
    const int node = static_cast<int>(rows(k, 0));
    if (node < 0 || node >= n || rows(k, 0) != double(node)) {
      throw InputError(path.string() + ": bad node id in row " +
                       std::to_string(k + 1));
    }
    U.col(node) = rows.row(k).tail(d).transpose();
  }
  return MembershipMatrix(std::move(U));
}

inline GroundTruthMembership read_truth_csv(
    const std::filesystem::path& path) {
  const MembershipMatrix one_hot = read_membership_csv(path);
  std::vector<int> assignments(one_hot.nodes());
  for (int i = 0; i < one_hot.nodes(); ++i) {
    Eigen::Index best = 0;
    one_hot.values.col(i).maxCoeff(&best);
    assignments[i] = static_cast<int>(best);
  }
  auto truth =
      GroundTruthMembership::from_assignments(assignments, one_hot.dims());
  truth.one_hot = one_hot.values;
  return truth;
}

inline void write_vector_csv(const std::filesystem::path& path,
                             const Eigen::VectorXd& v) {
  auto out = open_output(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << format_full(v(i)) << '\n';
  }
}

inline Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> vals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    vals.push_back(parse_double(
        line, path.string() + ": line " + std::to_string(line_no)));
  }
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = vals[i];
  }
  return v;
}

// Held-out pair scores: i, j, score, probability, observed label.
inline void write_scores_csv(const std::filesystem::path& path,
                             const std::vector<IndexPair>& pairs,
                             const std::vector<double>& scores,
                             const std::vector<double>& probabilities,
                             const std::vector<int>& labels) {
  auto out = open_output(path);
  out << "i,j,score,probability,label\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << pairs[k].first << ',' << pairs[k].second << ','
        << format_full(scores[k]) << ',' << format_full(probabilities[k])
        << ',' << labels[k] << '\n';
  }
}

// Side-info rows "i,j,r_1,...,r_p"; unlisted pairs keep zero features.
inline SideInfo read_side_info_csv(const std::filesystem::path& path, int n) {
  auto in = open_input(path);
  std::string line;
  int line_no = 0;
  int p = -1;
  SideInfo side;
  side.n = n;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected i,j,features");
    }
    const std::string where =
        path.string() + ": line " + std::to_string(line_no);
    const int i = static_cast<int>(parse_double(fields[0], where));
    const int j = static_cast<int>(parse_double(fields[1], where));
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw InputError(where + ": pair index out of range");
    }
    const int row_p = static_cast<int>(fields.size()) - 2;
    if (p == -1) {
      p = row_p;
      side.p = p;
      side.features =
          Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * n, p);
    } else if (row_p != p) {
      throw InputError(where + ": inconsistent feature dimension");
    }
    for (int k = 0; k < p; ++k) {
      side.features(static_cast<Eigen::Index>(i) * n + j, k) =
          parse_double(fields[k + 2], where);
    }
  }
  if (p == -1) {
    throw InputError(path.string() + ": no side-information rows");
  }
  return side;
}

}  // namespace smgb
