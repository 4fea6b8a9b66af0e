#include <filesystem>
#include <fstream>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "smgb/io.hpp"

using namespace smgb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "smgb_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("matrix CSV round-trips bit-exactly") {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd mat = oracle::random_matrix(7, 5, rng, 3.7);
  mat(0, 0) = 1e-17;
  mat(1, 1) = -4.0 / 3.0;
  mat(2, 2) = 12345678.987654321;
  const auto path = scratch("roundtrip.csv");
  write_matrix_csv(path, mat);
  const Eigen::MatrixXd back = read_matrix_csv(path);
  REQUIRE(back.rows() == mat.rows());
  REQUIRE(back.cols() == mat.cols());
  REQUIRE(back == mat);
}

TEST_CASE("adjacency CSV round-trips and validates entries") {
  auto [net, truth] = synth_cliques(2, 4, 0.2, 5);
  const auto path = scratch("adjacency.csv");
  write_adjacency_csv(path, net);
  const auto back = read_adjacency_csv(path, true, true);
  REQUIRE(back.adjacency == net.adjacency);

  const auto bad = scratch("bad_adjacency.csv");
  {
    std::ofstream out(bad);
    out << "0,1\n1,2\n";
  }
  REQUIRE_THROWS_AS(read_adjacency_csv(bad, true, true), InputError);
}

TEST_CASE("membership CSV keeps node ids and values") {
  std::mt19937_64 rng(3);
  const auto U = oracle::random_memberships(3, 6, rng);
  const auto path = scratch("memberships.csv");
  write_membership_csv(path, U);
  const auto back = read_membership_csv(path);
  REQUIRE(back.values == U.values);
}

TEST_CASE("vector files round-trip including the empty one") {
  Eigen::VectorXd v(3);
  v << 0.1, -2.5e-9, 7.0;
  const auto path = scratch("vec.csv");
  write_vector_csv(path, v);
  REQUIRE(read_vector_csv(path) == v);

  const auto empty_path = scratch("empty_vec.csv");
  write_vector_csv(empty_path, Eigen::VectorXd());
  REQUIRE(read_vector_csv(empty_path).size() == 0);
}

TEST_CASE("side info rows parse with zero-filled gaps") {
  const auto path = scratch("side.csv");
  {
    std::ofstream out(path);
    out << "# i,j,features\n";
    out << "0,1,0.5,-1\n";
    out << "2,0,3,4\n";
  }
  const auto side = read_side_info_csv(path, 3);
  REQUIRE(side.p == 2);
  REQUIRE(side.r(0, 1) == Eigen::RowVector2d(0.5, -1.0));
  REQUIRE(side.r(2, 0) == Eigen::RowVector2d(3.0, 4.0));
  REQUIRE(side.r(1, 1).isZero(0.0));

  const auto ragged = scratch("side_ragged.csv");
  {
    std::ofstream out(ragged);
    out << "0,1,0.5,-1\n0,2,7\n";
  }
  REQUIRE_THROWS_AS(read_side_info_csv(ragged, 3), InputError);
}

TEST_CASE("malformed numbers name their location") {
  const auto path = scratch("malformed.csv");
  {
    std::ofstream out(path);
    out << "1,2\n3,oops\n";
  }
  REQUIRE_THROWS_MATCHES(read_matrix_csv(path), InputError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 2")));
  REQUIRE_THROWS_AS(read_matrix_csv(scratch("does_not_exist.csv")),
                    InputError);
}

TEST_CASE("ragged matrix rows are rejected") {
  const auto path = scratch("ragged.csv");
  {
    std::ofstream out(path);
    out << "1,2,3\n4,5\n";
  }
  REQUIRE_THROWS_AS(read_matrix_csv(path), InputError);
}
