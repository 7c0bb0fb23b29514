#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ioclqr/ensemble.hpp"
#include "ioclqr/lqr.hpp"
#include "ioclqr/sdp.hpp"
#include "ioclqr/types.hpp"

namespace ioclqr {

enum class ObservationMode { Noiseless, Noisy };

/// The inverse problem: recover Q from per-timestep Gram matrices
/// G_t = Y_t Y_t^T, the permutation-invariant statistic of the snapshots.
struct IocSdpProblem {
  std::vector<Matrix> grams;  // G_1..G_N
  SystemDynamics dyn;
  ObservationMode mode = ObservationMode::Noiseless;
  std::optional<Matrix> sigma;  // noise covariance (Noisy)
  std::optional<double> phi;    // Frobenius bound ||Q||_F^2 <= phi (Noisy: required)
  int agent_count = 0;
  double scale = 1.0;  // objective pre-scaling

  static IocSdpProblem noiseless(std::vector<Matrix> grams, SystemDynamics dyn,
                                 std::optional<double> phi = std::nullopt,
                                 double scale = 1e-4);
  static IocSdpProblem noisy(std::vector<Matrix> grams, SystemDynamics dyn, Matrix sigma,
                             double phi, int agent_count, double scale = 1.0);

  int horizon() const { return static_cast<int>(grams.size()); }
  void validate() const;
};

struct PreconditionReport {
  bool horizon_ok = true;       // N >= n + 1
  bool excitation_ok = true;    // G_1 > 0
  double g1_min_eig = 0.0;
  std::vector<std::string> warnings;
};

struct EstimateResult {
  CostMatrix Q_est;
  std::vector<Matrix> P_est;  // P_1..P_N with P_N = Q_est (SDP variables)
  GainSchedule K_est;         // from P_est by the Riccati gain formula
  double objective = 0.0;     // H (noiseless) or H_E (noisy) at the estimate, unscaled
  sdp::SolverReport report;
  PreconditionReport preconditions;
};

/// H(Q, {P_t}) = -tr(P_1 G_1) + tr(P_N G_N) + sum_{t=1}^{N-1} tr(Q G_t).
/// `p` must hold P_1..P_N.
double evaluate_H(const Matrix& q, const std::vector<Matrix>& p,
                  const std::vector<Matrix>& grams);

/// The empirical noisy objective: H/M plus the covariance corrections
/// tr(P_1 Sigma) - tr(P_N Sigma) - (N-1) tr(Q Sigma).
double evaluate_H_empirical(const Matrix& q, const std::vector<Matrix>& p,
                            const std::vector<Matrix>& grams, const Matrix& sigma,
                            int agent_count);

/// Margins of every constraint defining the feasible set: min eigenvalue of
/// each F_t, of Q and each P_t, the equality residual ||P_N - Q||_F, and the
/// ball margin when a bound is given. Pure diagnostic.
struct FeasibilityReport {
  std::vector<double> lmi_min_eigs;  // F_1..F_{N-1}
  std::vector<double> var_min_eigs;  // Q, then P_1..P_N
  double equality_residual = 0.0;
  std::optional<double> ball_margin;

  double min_margin() const;
};
FeasibilityReport check_feasibility(const Matrix& q, const std::vector<Matrix>& p,
                                    const SystemDynamics& dyn,
                                    std::optional<double> phi = std::nullopt);

/// Assembles the block-LMI SDP: variables Q, P_1..P_{N-1} (P_N eliminated
/// as Q), PSD cones on all variables, the relaxed-Riccati blocks F_t, and
/// the optional Frobenius ball on Q.
sdp::SdpProblem build_sdp(const IocSdpProblem& problem);

/// Strictly feasible start: Q0 = c I, then the backward Riccati recursion
/// with every step shifted down by delta I, which puts each F_t at Schur
/// margin exactly delta. Throws NumericalError if the constructed point is
/// not strictly interior (phase-1 failure; cannot happen for valid inputs).
std::vector<Matrix> find_initial_point(const IocSdpProblem& problem);

EstimateResult estimate(const IocSdpProblem& problem, const sdp::SolverOptions& options = {},
                        const sdp::IterateCallback& callback = {});

/// Solves min H over the PSD/LMI domain (optionally ball-bounded).
EstimateResult estimate_noiseless(const std::vector<Matrix>& grams, const SystemDynamics& dyn,
                                  const sdp::SolverOptions& options = {},
                                  std::optional<double> phi = std::nullopt,
                                  double scale = 1e-4);

/// Solves min H_E over the compact domain (ball required).
EstimateResult estimate_noisy(const std::vector<Matrix>& grams, const SystemDynamics& dyn,
                              const Matrix& sigma, double phi, int agent_count,
                              const sdp::SolverOptions& options = {}, double scale = 1.0);

/// Re-identifies the per-timestep permutations: each agent is rolled out
/// from its first observed state under the gains implied by q_est, and each
/// snapshot is matched to the predictions by exact min-cost assignment on
/// squared Euclidean distances. Sets *ambiguous when two observed columns
/// are (numerically) interchangeable; ties break toward the lowest index.
PermutationSchedule recover_permutations(const Matrix& q_est, const SystemDynamics& dyn,
                                         const std::vector<Matrix>& observations,
                                         const Matrix& x1, bool* ambiguous = nullptr,
                                         double tie_tol = 1e-9);

/// log of the recursive norm bound on ||P_t||_F valid on the ball-bounded
/// feasible set, computed from ||A||_F, ||B||_F and phi. Returned in log
/// space because the recursion grows doubly exponentially backward in time.
std::vector<double> riccati_norm_log_bounds(const SystemDynamics& dyn, double phi, int N);

}  // namespace ioclqr
