#pragma once

// Test-only oracles, deliberately independent of the library code paths
// they are used to check.

#include <cstdint>
#include <vector>

#include "ioclqr/ensemble.hpp"
#include "ioclqr/lqr.hpp"
#include "ioclqr/rng.hpp"
#include "ioclqr/types.hpp"

namespace ioclqr::testing {

/// Scaled-and-squared truncated Taylor series for exp(M).
Matrix taylor_expm(const Matrix& m, int terms = 30);

/// Random symmetric PSD matrix G G^T with standard-normal G; when
/// norm_bound_sq > 0, redraws until ||Q||_F^2 <= norm_bound_sq.
Matrix random_psd(int n, rng::Stream& stream, double norm_bound_sq = 0.0);

/// Random controllable discretized system: continuous pair with N(0,1)
/// entries sampled at dt, redrawn until validation passes.
SystemDynamics random_system(int n, int m, rng::Stream& stream, double dt = 0.05);

/// Value matrix P_t of the horizon-N problem, recovered WITHOUT the Riccati
/// recursion: the optimal cost of the remaining-horizon problem is a
/// quadratic form in the start state, read off by polarization from the
/// dense optimality-system solve.
Matrix value_matrix_oracle(const SystemDynamics& dyn, const CostMatrix& q, int t, int N);

/// Random (Q, {P_t}) in the feasible set: exact backward recursion with
/// each step lowered by a random PSD amount, which keeps every constraint
/// block PSD by construction.
struct FeasiblePoint {
  Matrix q;
  std::vector<Matrix> p;  // P_1..P_N
};
FeasiblePoint sample_feasible_point(const SystemDynamics& dyn, const Matrix& q, int N,
                                    rng::Stream& stream);

/// Exhaustive minimum-cost assignment for small M.
std::vector<int> brute_force_assignment(const Matrix& cost);

}  // namespace ioclqr::testing
