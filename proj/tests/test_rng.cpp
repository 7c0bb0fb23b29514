#include <cmath>
#include <vector>

#include "doctest.h"
#include "ioclqr/rng.hpp"

using namespace ioclqr;

TEST_CASE("streams are pure functions of seed and lanes") {
  rng::Stream a(42, 1, 2, 3), b(42, 1, 2, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  rng::Stream c(42, 1, 2, 4);
  rng::Stream d(42, 1, 2, 3);
  bool all_equal = true;
  for (int i = 0; i < 10; ++i) all_equal = all_equal && (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform01 stays in [0,1) and has a sane mean") {
  rng::Stream s(7);
  double sum = 0.0;
  const int k = 20000;
  for (int i = 0; i < k; ++i) {
    double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / k - 0.5) < 0.01);
}

TEST_CASE("gaussian has zero mean and unit variance approximately") {
  rng::Stream s(11);
  double sum = 0.0, sq = 0.0;
  const int k = 50000;
  for (int i = 0; i < k; ++i) {
    double g = s.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / k) < 0.02);
  CHECK(std::abs(sq / k - 1.0) < 0.03);
}

TEST_CASE("next_below respects its bound and covers it") {
  rng::Stream s(3);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    auto v = s.next_below(5);
    REQUIRE(v < 5);
    ++hits[static_cast<size_t>(v)];
  }
  for (int h : hits) CHECK(h > 800);
}
