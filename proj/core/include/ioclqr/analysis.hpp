#pragma once

#include <tuple>
#include <vector>

#include "ioclqr/ioc.hpp"
#include "ioclqr/lqr.hpp"
#include "ioclqr/types.hpp"

namespace ioclqr {

/// Stacked operators of the adjoint-eliminated optimality system:
/// (I + F(Q)) x_{2:N} = A_tilde x_1, an algebraically independent
/// representation of the same closed-loop model.
struct PmpOperators {
  int n = 0, m = 0, N = 0;
  Matrix gamma;           // [A^{N-2}B, ..., AB, B]^T, m(N-1) x n
  Matrix input_to_state;  // block lower-triangular [A^{t-s}B], n(N-1) x m(N-1)
  Matrix a_tilde;         // [A; A^2; ...; A^{N-1}], n(N-1) x n

  /// The block-Toeplitz shift structure S = [S_2, ..., S_N] as one matrix,
  /// m(N-1) x m(N-1)^2; S(I (x) Gamma) equals input_to_state^T.
  Matrix shift_structure() const;

  /// F(Q) = input_to_state * input_to_state^T * (I (x) Q).
  Matrix f_of(const Matrix& q) const;
};

PmpOperators build_pmp_operators(const SystemDynamics& dyn, int N);

/// [A^{k-1}B, ..., AB, B]^T stacked to depth k, km x n.
Matrix controllability_matrix(const SystemDynamics& dyn, int k);

struct ConditionReport {
  double cond_controllability = 0.0;  // depth-n stack
  double cond_stacked = 0.0;          // depth-(N-1) stack
  double threshold = 0.0;
  bool well_conditioned = false;
};
ConditionReport condition_report(const SystemDynamics& dyn, int N, double threshold = 1e3);

/// Independent forward-problem oracle: builds F(Q) explicitly, solves the
/// dense linear system for the stacked states, and recovers the inputs by
/// the pseudo-inverse of B. Shares no code with the Riccati recursion.
Trajectory pmp_trajectory_oracle(const SystemDynamics& dyn, const CostMatrix& q,
                                 const Vector& x1, int N);

/// Numerical surrogate for the exact-arithmetic identifiability condition:
/// the smallest singular value of the (finite-difference) linearization of
/// DeltaQ -> (I + F(Q))^{-1} A_tilde around q_bar, over unit-Frobenius
/// symmetric perturbations.
struct KernelProbeReport {
  Matrix delta_q;            // unit-Frobenius minimizing direction
  double model_distance = 0.0;  // change of the stacked model per unit ||DeltaQ||
  double margin_relative = 0.0; // model_distance / largest singular value
  bool well_conditioned = false;
  bool psd_compatible = false;  // q_bar + delta_q stays PSD
};
KernelProbeReport near_kernel_probe(const SystemDynamics& dyn, const Matrix& q_bar, int N,
                                    double relative_threshold = 1e-6);

struct ErrorMetrics {
  double rel_q = 0.0;
  double rel_k_min = 0.0, rel_k_max = 0.0;
  double rel_acl_min = 0.0, rel_acl_max = 0.0;
  double objective_gap = 0.0;  // |H(estimate) - H(truth at its Riccati pair)|
  double h_truth = 0.0;
};

/// Relative Frobenius errors of the estimate against the ground truth and
/// its derived gains/closed-loop matrices; min and max over time steps.
ErrorMetrics error_metrics(const EstimateResult& estimate, const Matrix& q_true,
                           const SystemDynamics& dyn, const std::vector<Matrix>& grams);

/// Least-squares affine fit in log10-log10 space.
/// Returns (slope, intercept, rms residual). Requires >= 3 strictly
/// positive points.
std::tuple<double, double, double> fit_loglog_slope(
    const std::vector<std::pair<double, double>>& points);

}  // namespace ioclqr
