#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "deepkrein/errors.hpp"
#include "deepkrein/io.hpp"
#include "helpers.hpp"

using namespace deepkrein;

TEST_SUITE("io") {
  TEST_CASE("weights round-trip exactly") {
    const WeightSet w({testing::mat(2, 3, {0.1, 1.0 / 3.0, -2e-300, 1e300, -0.0, 7.0}), testing::mat(1, 2, {M_PI, -M_E})});
    std::stringstream ss;
    write_weights(ss, w);
    const WeightSet back = read_weights(ss);
    for (int q = 0; q < 2; ++q) CHECK(back.layer(q) == w.layer(q));
  }

  TEST_CASE("weight file errors") {
    std::stringstream trailing("1\n1 1\n0.5\nextra\n");
    CHECK_THROWS_AS(read_weights(trailing), ValidationError);
    std::stringstream short_file("1\n2 1\n0.5\n");
    CHECK_THROWS_AS(read_weights(short_file), ValidationError);
    std::stringstream nan_entry("1\n1 1\nnan\n");
    CHECK_THROWS_AS(read_weights(nan_entry), ValidationError);
  }

  TEST_CASE("datasets") {
    std::stringstream ok("x0,x1,y\n1,2,3\n\n-0.5, 0.25 ,1e-3\n");
    const Dataset d = read_dataset(ok, "mem");
    CHECK(d.size() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.x(1, 1) == 0.25);
    CHECK(d.y[1] == 1e-3);
    std::stringstream out;
    write_dataset(out, d);
    const Dataset back = read_dataset(out);
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);
  }

  TEST_CASE("dataset errors carry line numbers") {
    std::stringstream header("a,b,y\n1,2,3\n");
    CHECK_THROWS_WITH_AS(read_dataset(header, "f.csv"), doctest::Contains("f.csv:1"), ValidationError);
    std::stringstream cols("x0,y\n1,2\n1,2,3\n");
    CHECK_THROWS_WITH_AS(read_dataset(cols, "f.csv"), doctest::Contains("f.csv:3"), ValidationError);
    std::stringstream num("x0,y\n1,abc\n");
    CHECK_THROWS_WITH_AS(read_dataset(num, "f.csv"), doctest::Contains("f.csv:2"), ValidationError);
    std::stringstream empty("x0,y\n");
    CHECK_THROWS_AS(read_dataset(empty, "f.csv"), ValidationError);
  }

  TEST_CASE("atomic writes replace the target and leave no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "deepkrein_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "report.json";
    atomic_write(path, "first");
    atomic_write(path, "second");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "second");
    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
  }
}
