#include "doctest.h"
#include "ioclqr/assignment.hpp"
#include "ioclqr/rng.hpp"
#include "oracles.hpp"

using namespace ioclqr;

TEST_CASE("assignment matches brute force on random instances") {
  rng::Stream s(31);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + static_cast<int>(s.next_below(5));  // up to 6
    Matrix cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = s.uniform(0, 10);
    auto fast = min_cost_assignment(cost);
    auto slow = testing::brute_force_assignment(cost);
    double cf = 0, cs = 0;
    for (int i = 0; i < n; ++i) {
      cf += cost(i, fast[static_cast<size_t>(i)]);
      cs += cost(i, slow[static_cast<size_t>(i)]);
    }
    CHECK(cf == doctest::Approx(cs).epsilon(1e-12));
  }
}

TEST_CASE("identity cost matrix assigns the diagonal") {
  Matrix cost = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
  auto a = min_cost_assignment(cost);
  for (int i = 0; i < 4; ++i) CHECK(a[static_cast<size_t>(i)] == i);
  CHECK_FALSE(assignment_is_ambiguous(cost, a, 1e-12));
}

TEST_CASE("duplicate rows are flagged ambiguous") {
  Matrix cost(3, 3);
  cost << 1, 2, 3,
          1, 2, 3,  // same as row 0: any swap of their targets is optimal
          5, 1, 9;
  auto a = min_cost_assignment(cost);
  CHECK(assignment_is_ambiguous(cost, a, 1e-12));
}
