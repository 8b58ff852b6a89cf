#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lem/embeddings.hpp"
#include "lem/error.hpp"
#include "lem_test_support.hpp"

using namespace lem;

TEST_CASE("mean_pool skips special positions") {
  // 3 tokens x 2 dims; middle one is special
  const std::vector<float> v = {1, 2, 100, 100, 3, 4};
  const bool mask[] = {false, true, false};
  const auto pooled = mean_pool(v, 2, mask);
  REQUIRE(pooled.size() == 2);
  CHECK(pooled[0] == doctest::Approx(2.0));
  CHECK(pooled[1] == doctest::Approx(3.0));

  const bool all_special[] = {true, true, true};
  CHECK_THROWS_AS(mean_pool(v, 2, all_special), Error);
  const bool short_mask[] = {false};
  CHECK_THROWS_AS(mean_pool(v, 2, short_mask), Error);
}

TEST_CASE("l2_normalize") {
  EmbeddingMatrix m(2, 2, {3, 4, 0, 2}, {10, 11});
  const auto n = l2_normalize(m);
  CHECK(n.normalized());
  CHECK(n.row(0)[0] == doctest::Approx(0.6));
  CHECK(n.row(0)[1] == doctest::Approx(0.8));
  CHECK(n.row(1)[1] == doctest::Approx(1.0));
  CHECK(n.ids() == m.ids());

  EmbeddingMatrix zero(2, 2, {1, 0, 0, 0}, {1, 2});
  try {
    l2_normalize(zero);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1, 2, 3}, {1, 2}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 1, {1, 1}, {1, 1}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {1, 1}, {1}, true), FormatError);
  CHECK_NOTHROW(EmbeddingMatrix(1, 2, {0.6f, 0.8f}, {1}, true));
  CHECK(EmbeddingMatrix(0, 4, {}, {}).empty());
}

TEST_CASE("binary round trip including metadata") {
  auto m = l2_normalize(lem::testing::random_matrix(17, 5, 3, 1000));
  m.set_metadata(R"({"pooling":"mean","model":"toy"})");
  std::stringstream buf;
  write_embeddings(buf, m);
  const auto back = read_embeddings(buf);
  CHECK(back == m);

  std::stringstream plain;
  write_embeddings(plain, lem::testing::random_matrix(3, 2, 1));
  CHECK(read_embeddings(plain).metadata().empty());

  std::stringstream empty;
  write_embeddings(empty, EmbeddingMatrix(0, 8, {}, {}));
  const auto e = read_embeddings(empty);
  CHECK(e.rows() == 0);
  CHECK(e.dim() == 8);
}

TEST_CASE("header is little-endian and fixed") {
  std::stringstream buf;
  write_embeddings(buf, EmbeddingMatrix(1, 2, {0.6f, 0.8f}, {7}, true));
  const auto bytes = buf.str();
  REQUIRE(bytes.size() == 8 + 4 + 4 + 1 + 8 + 8);
  CHECK(bytes.substr(0, 8) == "LEMEMB01");
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);
  CHECK(static_cast<unsigned char>(bytes[16]) == 1);
  CHECK(static_cast<unsigned char>(bytes[25]) == 7);
}

TEST_CASE("malformed files are rejected") {
  std::stringstream good;
  write_embeddings(good, lem::testing::random_matrix(4, 3, 9));
  const auto bytes = good.str();

  auto read_bytes = [](const std::string& b) {
    std::stringstream s(b);
    return read_embeddings(s);
  };
  CHECK_THROWS_AS(read_bytes("XXXXXXXX" + bytes.substr(8)), FormatError);
  CHECK_THROWS_AS(read_bytes(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(read_bytes(bytes.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(read_bytes(bytes + "junk"), FormatError);
  auto bad_flag = bytes;
  bad_flag[16] = 2;
  CHECK_THROWS_AS(read_bytes(bad_flag), FormatError);
}

TEST_CASE("check_embeddings reports norm deviation") {
  const auto dir = std::filesystem::temp_directory_path() / "lem_emb_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.emb";
  write_embeddings(path, l2_normalize(lem::testing::random_matrix(10, 4, 2)));
  const auto c = check_embeddings(path);
  CHECK(c.rows == 10);
  CHECK(c.dim == 4);
  CHECK(c.normalized);
  CHECK(c.max_norm_deviation < 1e-6);
  CHECK(c.zero_rows == 0);

  write_embeddings(path, EmbeddingMatrix(2, 2, {0, 0, 1, 1}, {1, 2}));
  const auto u = check_embeddings(path);
  CHECK_FALSE(u.normalized);
  CHECK(u.zero_rows == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dot accumulates in double") {
  const std::vector<float> a = {1e8f, 1.0f, -1e8f};
  const std::vector<float> b = {1.0f, 1.0f, 1.0f};
  CHECK(dot(a, b) == 1.0);
}
