#include "bwgeo/matrix_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "test_support.hpp"

namespace {

namespace io = bwgeo::io;
using bwgeo::Matrix;
using bwtest::Rng;

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

TEST(FormatDouble, SeventeenDigitsRoundTripExactly) {
  const double values[] = {0.0,
                           -0.0,
                           1.0,
                           1.0 / 3.0,
                           std::sqrt(2.0),
                           3.141592653589793,
                           1e-300,
                           std::numeric_limits<double>::denorm_min(),
                           1.7976931348623157e308,
                           -123456.789e-12};
  for (const double v : values) {
    const std::string s = io::format_double(v);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(res.ec, std::errc()) << s;
    EXPECT_TRUE(same_bits(v, back) || v == back) << s;
  }
  EXPECT_EQ(io::format_double(std::sqrt(2.0)), "1.4142135623730951");
}

TEST(JsonFormat, RoundTripsRandomMatrices) {
  Rng rng(7101);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = rng.uniform_int(0, 6);
    const int cols = rows == 0 ? 0 : rng.uniform_int(1, 6);
    const Matrix m = rng.gaussian(rows, cols);
    const Matrix back = io::parse_json(io::to_json(m));
    ASSERT_EQ(back.rows(), rows);
    ASSERT_EQ(back.cols(), cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        EXPECT_TRUE(same_bits(m(i, j), back(i, j)));
      }
    }
  }
}

TEST(CsvFormat, RoundTripsRandomMatrices) {
  Rng rng(7202);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = rng.uniform_int(1, 6);
    const int cols = rng.uniform_int(1, 6);
    const Matrix m = rng.gaussian(rows, cols);
    const Matrix back = io::parse_csv(io::to_csv(m));
    ASSERT_EQ(back.rows(), rows);
    ASSERT_EQ(back.cols(), cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        EXPECT_TRUE(same_bits(m(i, j), back(i, j)));
      }
    }
  }
}

TEST(MatrixFiles, ExtensionSelectsTheFormat) {
  Rng rng(7303);
  const Matrix m = rng.gaussian(3, 4);
  const auto dir = std::filesystem::temp_directory_path() / "bwgeo_io_test";
  std::filesystem::create_directories(dir);

  const std::string json_path = (dir / "m.json").string();
  io::write_matrix_file(json_path, m);
  EXPECT_LE(bwgeo::max_abs(io::read_matrix_file(json_path) - m), 0.0);

  const std::string csv_path = (dir / "m.csv").string();
  io::write_matrix_file(csv_path, m);
  EXPECT_LE(bwgeo::max_abs(io::read_matrix_file(csv_path) - m), 0.0);

  EXPECT_THROW(io::read_matrix_file((dir / "missing.json").string()),
               bwgeo::ParseError);
  std::filesystem::remove_all(dir);
}

TEST(JsonFormat, RejectsMalformedInput) {
  EXPECT_THROW(io::parse_json("nonsense"), bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("[1,2,3]"), bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[2,2]}"), bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[2],\"rows\":[[1,0],[0,1]]}"),
               bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[2,2],\"rows\":[[1,0]]}"),
               bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[2,2],\"rows\":[[1,0],[0]]}"),
               bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[1,1],\"rows\":[[\"x\"]]}"),
               bwgeo::ParseError);
  EXPECT_THROW(io::parse_json("{\"shape\":[1,1],\"rows\":[[1e999]]}"),
               bwgeo::ParseError);
}

TEST(CsvFormat, RejectsMalformedInput) {
  EXPECT_THROW(io::parse_csv(""), bwgeo::ParseError);
  EXPECT_THROW(io::parse_csv("1,2\n3\n"), bwgeo::ParseError);
  EXPECT_THROW(io::parse_csv("1,abc\n"), bwgeo::ParseError);
  EXPECT_THROW(io::parse_csv("1,\n"), bwgeo::ParseError);
}

}  // namespace
