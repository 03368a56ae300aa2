#include <doctest.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "kess/chain_io.hpp"
#include "kess/samplers.hpp"

using namespace kess;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("chain_io") {

TEST_CASE("reads a sphere chain with comments") {
  const auto path = temp_file("kess_io_sphere.csv");
  write_text(path,
             "#% manifold=sphere dims=3\n"
             "# a comment\n"
             "1,0,0\n"
             "0,1,0\n"
             "\n"
             "0,0,1\n");
  const Chain chain = read_chain(path);
  CHECK(chain.manifold() == Manifold::sphere);
  CHECK(chain.size() == 3);
  CHECK(chain.points()(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("round trip is bit identical") {
  Rng rng(1);
  Eigen::MatrixXd pts(25, 3);
  for (int i = 0; i < 25; ++i) pts.row(i) = sample_uniform_sphere(rng).coords().transpose();
  const Chain chain(Manifold::sphere, {3}, pts);
  const auto path = temp_file("kess_io_roundtrip.csv");
  write_chain(path, chain);
  const Chain back = read_chain(path);
  CHECK(back.points() == chain.points());

  // grassmann rows carry two dims in the directive
  Eigen::MatrixXd frame(1, 6);
  frame << 1, 0, 0, 1, 0, 0;  // e1, e2 as a 3x2 frame, row-major
  const Chain grass(Manifold::grassmann, {3, 2}, frame);
  const auto gpath = temp_file("kess_io_grassmann.csv");
  write_chain(gpath, grass);
  const Chain gback = read_chain(gpath);
  CHECK(gback.manifold() == Manifold::grassmann);
  CHECK(gback.dims() == std::vector<int>{3, 2});
  CHECK(gback.points() == grass.points());
}

TEST_CASE("off-sphere rows report the line number") {
  const auto path = temp_file("kess_io_badnorm.csv");
  write_text(path,
             "#% manifold=sphere dims=3\n"
             "1,0,0\n"
             "0.9,0,0\n");
  CHECK_THROWS_WITH_AS(read_chain(path), doctest::Contains(":3:"), ValidationError);
}

TEST_CASE("missing directive and malformed rows are rejected with lines") {
  const auto no_directive = temp_file("kess_io_nodir.csv");
  write_text(no_directive, "1,0,0\n");
  CHECK_THROWS_WITH_AS(read_chain(no_directive), doctest::Contains("directive"),
                       ValidationError);

  const auto ragged = temp_file("kess_io_ragged.csv");
  write_text(ragged,
             "#% manifold=sphere dims=3\n"
             "1,0,0\n"
             "0,1\n");
  CHECK_THROWS_WITH_AS(read_chain(ragged), doctest::Contains(":3:"), ValidationError);

  const auto bad_float = temp_file("kess_io_badfloat.csv");
  write_text(bad_float,
             "#% manifold=sphere dims=3\n"
             "1,zero,0\n");
  CHECK_THROWS_WITH_AS(read_chain(bad_float), doctest::Contains(":2:"), ValidationError);

  const auto empty = temp_file("kess_io_empty.csv");
  write_text(empty, "#% manifold=sphere dims=3\n");
  CHECK_THROWS_AS(read_chain(empty), ValidationError);

  CHECK_THROWS_AS(read_chain(temp_file("kess_io_does_not_exist.csv")), ValidationError);
}

TEST_CASE("spd chains read through the square-row layout") {
  const auto path = temp_file("kess_io_spd.csv");
  write_text(path,
             "#% manifold=spd dims=2\n"
             "2,0.5,0.5,1\n"
             "1,0,0,1\n");
  const Chain chain = read_chain(path);
  CHECK(chain.size() == 2);
  CHECK(chain.spd(0).entries()(0, 1) == doctest::Approx(0.5));

  const auto bad = temp_file("kess_io_spd_bad.csv");
  write_text(bad,
             "#% manifold=spd dims=2\n"
             "1,2,2,1\n");  // eigenvalues {3, -1}
  CHECK_THROWS_WITH_AS(read_chain(bad), doctest::Contains(":2:"), ValidationError);
}

}  // TEST_SUITE
