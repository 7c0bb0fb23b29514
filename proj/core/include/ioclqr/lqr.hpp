#pragma once

#include <optional>
#include <vector>

#include "ioclqr/types.hpp"

namespace ioclqr {

/// Discrete-time pair (A, B). Construction through validated() enforces
/// invertibility of A, full column rank of B and controllability of (A, B),
/// the standing assumptions of the inverse problem.
struct SystemDynamics {
  Matrix A;  // n x n
  Matrix B;  // n x m
  int n = 0;
  int m = 0;

  /// Validates and wraps (A, B). `tol` is the relative singular-value /
  /// rank threshold (the model itself never fixes one).
  static SystemDynamics validated(Matrix A, Matrix B, double tol = 1e-10);

  /// [B, AB, ..., A^{k-1}B], n x km. Depth defaults to n.
  Matrix controllability_blocks(int depth) const;
};

/// Symmetric PSD cost matrix Q, optionally carrying a Frobenius-ball bound
/// ||Q||_F^2 <= phi.
struct CostMatrix {
  Matrix Q;
  std::optional<double> frobenius_bound;

  /// Symmetrizes and checks positive semidefiniteness
  /// (min eigenvalue >= -tol * max(||Q||_F, 1)).
  static CostMatrix psd(Matrix q, double tol = 1e-9);

  int size() const { return static_cast<int>(Q.rows()); }
};

/// Value matrices P_1..P_N of the backward Riccati recursion, P_N = Q.
struct RiccatiSolution {
  std::vector<Matrix> P;  // P[t-1] holds P_t

  int horizon() const { return static_cast<int>(P.size()); }
  const Matrix& at(int t) const { return P.at(static_cast<size_t>(t - 1)); }
};

/// Feedback gains K_1..K_{N-1}, u_t = K_t x_t.
struct GainSchedule {
  std::vector<Matrix> K;  // K[t-1] holds K_t

  int steps() const { return static_cast<int>(K.size()); }
  const Matrix& at(int t) const { return K.at(static_cast<size_t>(t - 1)); }
};

struct Trajectory {
  std::vector<Vector> x;  // x_1..x_N
  std::vector<Vector> u;  // u_1..u_{N-1}
  int agent_id = 0;

  int horizon() const { return static_cast<int>(x.size()); }
};

/// Adjoint states and stationarity residuals of the necessary/sufficient
/// optimality conditions. lambda[k] holds lambda_{k+2}, k = 0..N-2.
struct PmpCertificate {
  std::vector<Vector> lambda;
  std::vector<double> residuals;  // ||u_t + B^T lambda_{t+1}||, t = 1..N-1
  double max_residual = 0.0;
};

/// One backward Riccati step:
///   A^T P A + Q - A^T P B (B^T P B + I)^{-1} B^T P A,
/// symmetrized. Throws NumericalError if (B^T P B + I) is not SPD, which
/// cannot happen for PSD inputs.
Matrix dre_step(const SystemDynamics& dyn, const Matrix& p_next, const Matrix& q);

/// Solves the Riccati recursion backward from P_N = Q. N >= 2.
RiccatiSolution solve_dre(const SystemDynamics& dyn, const CostMatrix& q, int N);

/// K_t = -(B^T P_{t+1} B + I)^{-1} B^T P_{t+1} A for t = 1..N-1.
GainSchedule gains_from_riccati(const SystemDynamics& dyn, const RiccatiSolution& riccati);

/// A_cl(t) = A + B K_t. Each matrix is checked invertible; a singular
/// closed-loop matrix signals a non-PSD cost upstream.
std::vector<Matrix> closed_loop_matrices(const SystemDynamics& dyn,
                                         const GainSchedule& gains,
                                         double rcond_floor = 1e-13);

/// Closed-loop rollout from x1, recording u_t = K_t x_t.
Trajectory simulate_agent(const SystemDynamics& dyn, const GainSchedule& gains,
                          const Vector& x1, int agent_id = 0);

/// Builds adjoints backward (lambda_N = Q x_N, lambda_t = A^T lambda_{t+1} + Q x_t)
/// and reports the stationarity residuals u_t + B^T lambda_{t+1}. A large
/// residual is a report, not an error.
PmpCertificate pmp_check(const SystemDynamics& dyn, const CostMatrix& q,
                         const Trajectory& traj);

/// x_N^T Q x_N + sum_{t=1}^{N-1} (x_t^T Q x_t + ||u_t||^2); the cost with
/// terminal weight Q and unit input weight.
double objective_value(const CostMatrix& q, const Trajectory& traj);

}  // namespace ioclqr
