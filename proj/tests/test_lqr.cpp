#include <cmath>

#include "doctest.h"
#include "ioclqr/analysis.hpp"
#include "ioclqr/lqr.hpp"
#include "ioclqr/rng.hpp"
#include "oracles.hpp"

using namespace ioclqr;

namespace {

SystemDynamics scalar_system() {
  return SystemDynamics::validated(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

CostMatrix scalar_cost() { return CostMatrix::psd(Matrix::Ones(1, 1)); }

}  // namespace

TEST_CASE("dynamics validation rejects bad pairs") {
  CHECK_THROWS_AS(SystemDynamics::validated(Matrix::Zero(2, 2), Matrix::Identity(2, 2)),
                  ValidationError);
  Matrix b = Matrix::Zero(2, 2);  // rank deficient
  b(0, 0) = 1.0;
  CHECK_THROWS_AS(SystemDynamics::validated(Matrix::Identity(2, 2), b), ValidationError);
  // B confined to an A-invariant subspace: uncontrollable.
  Matrix a = Matrix::Identity(2, 2);
  Matrix b1(2, 1);
  b1 << 1, 0;
  CHECK_THROWS_AS(SystemDynamics::validated(a, b1), ValidationError);
}

TEST_CASE("cost matrix validation") {
  CHECK_THROWS_AS(CostMatrix::psd(-Matrix::Identity(2, 2)), ValidationError);
  Matrix asym(2, 2);
  asym << 1, 0.5, -0.5, 1;  // symmetrizes to the identity
  CHECK(CostMatrix::psd(asym).Q.isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("scalar Riccati recursion: P = [1.5, 1.0]") {
  auto riccati = solve_dre(scalar_system(), scalar_cost(), 2);
  CHECK(riccati.at(2)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(riccati.at(1)(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("zero cost is a fixed point of the recursion") {
  rng::Stream s(100);
  auto dyn = testing::random_system(3, 2, s);
  auto riccati = solve_dre(dyn, CostMatrix::psd(Matrix::Zero(3, 3)), 7);
  for (const auto& p : riccati.P) CHECK(p.norm() == 0.0);
  auto gains = gains_from_riccati(dyn, riccati);
  for (const auto& k : gains.K) CHECK(k.norm() == 0.0);
  auto acl = closed_loop_matrices(dyn, gains);
  for (const auto& a : acl) CHECK(a.isApprox(dyn.A));
}

TEST_CASE("Riccati residual and symmetry invariants") {
  rng::Stream s(200);
  for (int trial = 0; trial < 10; ++trial) {
    auto dyn = testing::random_system(3, 1, s);
    auto q = CostMatrix::psd(testing::random_psd(3, s));
    auto riccati = solve_dre(dyn, q, 12);
    CHECK(riccati.at(12).isApprox(q.Q));
    for (int t = 1; t <= 11; ++t) {
      const Matrix& p = riccati.at(t);
      CHECK((p - p.transpose()).norm() == 0.0);
      CHECK(min_eigenvalue(p) >= -1e-9 * std::max(1.0, p.norm()));
      Matrix recomputed = dre_step(dyn, riccati.at(t + 1), q.Q);
      CHECK((p - recomputed).norm() <= 1e-10 * (1.0 + riccati.at(t + 1).norm()));
    }
  }
}

TEST_CASE("value matrices match the dense optimality-system oracle") {
  rng::Stream s(300);
  for (int trial = 0; trial < 5; ++trial) {
    auto dyn = testing::random_system(3, 1, s);
    auto q = CostMatrix::psd(testing::random_psd(3, s));
    const int N = 20;
    auto riccati = solve_dre(dyn, q, N);
    for (int t : {1, 7, 19, 20}) {
      Matrix oracle = testing::value_matrix_oracle(dyn, q, t, N);
      CHECK((riccati.at(t) - oracle).norm() <= 1e-7 * (1.0 + oracle.norm()));
    }
  }
}

TEST_CASE("scalar gain and closed loop: K_1 = -0.5, A_cl = 0.5") {
  auto dyn = scalar_system();
  auto riccati = solve_dre(dyn, scalar_cost(), 2);
  auto gains = gains_from_riccati(dyn, riccati);
  CHECK(gains.at(1)(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  auto acl = closed_loop_matrices(dyn, gains);
  CHECK(acl[0](0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("closed-loop product maps X_1 to X_N like the rollout") {
  // the planar kinematic system sampled at dt = 0.05
  auto dyn = discretize(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 0.05);
  rng::Stream s(400);
  auto q = CostMatrix::psd(testing::random_psd(2, s, 5.0));
  const int N = 20;
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, q, N));
  auto acl = closed_loop_matrices(dyn, gains);
  Matrix product = Matrix::Identity(2, 2);
  for (const auto& a : acl) product = a * product;
  Vector x1(2);
  x1 << 3.0, -4.0;
  auto traj = simulate_agent(dyn, gains, x1);
  CHECK((product * x1 - traj.x.back()).norm() <= 1e-10 * traj.x.back().norm());
}

TEST_CASE("scalar rollout: x = [2, 1], u = [-1]") {
  auto dyn = scalar_system();
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, scalar_cost(), 2));
  Vector x1(1);
  x1 << 2.0;
  auto traj = simulate_agent(dyn, gains, x1);
  CHECK(traj.x[0](0) == 2.0);
  CHECK(traj.x[1](0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(traj.u[0](0) == doctest::Approx(-1.0).epsilon(1e-14));

  auto zero = simulate_agent(dyn, gains, Vector::Zero(1));
  CHECK(zero.x[1](0) == 0.0);
  CHECK(zero.u[0](0) == 0.0);
}

TEST_CASE("optimal rollouts satisfy the stationarity conditions") {
  rng::Stream s(500);
  for (int trial = 0; trial < 5; ++trial) {
    auto dyn = testing::random_system(2, 2, s);
    auto q = CostMatrix::psd(testing::random_psd(2, s));
    auto gains = gains_from_riccati(dyn, solve_dre(dyn, q, 8));
    Vector x1(2);
    x1 << s.uniform(-5, 5), s.uniform(-5, 5);
    auto traj = simulate_agent(dyn, gains, x1);
    auto cert = pmp_check(dyn, q, traj);
    CHECK(cert.max_residual <= 1e-8 * std::max(1.0, x1.norm()));
  }
}

TEST_CASE("perturbing one input breaks stationarity by at least the step") {
  rng::Stream s(600);
  auto dyn = testing::random_system(2, 1, s);
  auto q = CostMatrix::psd(testing::random_psd(2, s));
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, q, 6));
  Vector x1(2);
  x1 << 1.0, -2.0;
  auto traj = simulate_agent(dyn, gains, x1);
  // bump the final input and re-propagate the final state
  traj.u.back()(0) += 1.0;
  traj.x.back() = dyn.A * traj.x[traj.x.size() - 2] + dyn.B * traj.u.back();
  auto cert = pmp_check(dyn, q, traj);
  CHECK(cert.max_residual >= 0.99);
}

TEST_CASE("zero cost, zero input: all adjoints vanish") {
  auto dyn = scalar_system();
  auto q = CostMatrix::psd(Matrix::Zero(1, 1));
  Trajectory traj;
  traj.x = {Vector::Ones(1), Vector::Ones(1)};
  traj.u = {Vector::Zero(1)};
  auto cert = pmp_check(dyn, q, traj);
  CHECK(cert.max_residual == 0.0);
}

TEST_CASE("scalar objective: cost = 6") {
  auto dyn = scalar_system();
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, scalar_cost(), 2));
  Vector x1(1);
  x1 << 2.0;
  auto traj = simulate_agent(dyn, gains, x1);
  CHECK(objective_value(scalar_cost(), traj) == doctest::Approx(6.0).epsilon(1e-14));

  Trajectory rest;
  rest.x = {Vector::Zero(1), Vector::Zero(1)};
  rest.u = {Vector::Zero(1)};
  CHECK(objective_value(CostMatrix::psd(Matrix::Zero(1, 1)), rest) == 0.0);
}

TEST_CASE("rollout cost beats random feasible input sequences") {
  rng::Stream s(700);
  auto dyn = testing::random_system(2, 1, s);
  auto q = CostMatrix::psd(testing::random_psd(2, s));
  const int N = 8;
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, q, N));
  Vector x1(2);
  x1 << 4.0, -1.0;
  auto optimal = simulate_agent(dyn, gains, x1);
  double best = objective_value(q, optimal);
  for (int k = 0; k < 100; ++k) {
    Trajectory candidate;
    candidate.x.push_back(x1);
    for (int t = 1; t <= N - 1; ++t) {
      Vector u(1);
      u << optimal.u[static_cast<size_t>(t - 1)](0) + s.uniform(-1.0, 1.0);
      candidate.x.push_back(dyn.A * candidate.x.back() + dyn.B * u);
      candidate.u.push_back(u);
    }
    CHECK(best <= objective_value(q, candidate) + 1e-9);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  auto dyn = scalar_system();
  CHECK_THROWS_AS(solve_dre(dyn, CostMatrix::psd(Matrix::Identity(2, 2)), 4), ValidationError);
  CHECK_THROWS_AS(solve_dre(dyn, scalar_cost(), 1), ValidationError);
  auto gains = gains_from_riccati(dyn, solve_dre(dyn, scalar_cost(), 3));
  CHECK_THROWS_AS(simulate_agent(dyn, gains, Vector::Zero(2)), ValidationError);
}
