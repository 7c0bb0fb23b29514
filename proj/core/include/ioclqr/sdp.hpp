#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ioclqr/types.hpp"

namespace ioclqr::sdp {

/// Dimension of the packed representation of a side x side symmetric matrix.
int svec_dim(int side);

/// Packs a symmetric matrix column-major over the lower triangle with
/// sqrt(2)-scaled off-diagonals, so that tr(XY) = svec(X).svec(Y) and
/// ||X||_F = |svec(X)|.
Vector svec(const Matrix& x);
Matrix unsvec(const Vector& v, int side);

/// Symmetric basis matrix E_k with svec(E_k) = e_k.
Matrix svec_basis(int side, int k);

/// Names and sides of the symmetric matrix variables, in packing order.
struct VariableLayout {
  struct Block {
    std::string name;
    int side = 0;
  };
  std::vector<Block> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }
  int block_dim(int b) const { return svec_dim(blocks[static_cast<size_t>(b)].side); }
  int offset(int b) const;
  int dim() const;

  Vector pack(const std::vector<Matrix>& vars) const;
  std::vector<Matrix> unpack(const Vector& x) const;
};

/// One affine contribution coeff * L^T X_block L to an LMI block.
struct LmiTerm {
  int block = 0;
  double coeff = 1.0;
  Matrix L;  // side(block) x lmi side
};

/// Affine symmetric-matrix-valued constraint F(x) = constant + sum of terms,
/// required positive semidefinite.
struct LmiBlock {
  std::string name;
  int side = 0;
  Matrix constant;
  std::vector<LmiTerm> terms;

  Matrix evaluate(const std::vector<Matrix>& vars) const;
};

/// ||X_block||_F^2 <= radius_sq, handled by its own log-barrier term.
struct FrobeniusBall {
  int block = 0;
  double radius_sq = 0.0;
};

struct SolverOptions {
  double t0 = 0.0;         // initial barrier weight; 0 = derive from the start point
  double mu = 10.0;        // barrier growth factor
  double newton_tol = 1e-7;  // centering stops when the Newton decrement drops below
  double gap_tol = 1e-9;   // target duality-gap estimate (scaled problem units)
  int max_newton = 4000;   // total Newton iterations across the whole path
  int max_outer = 64;
  double feas_eps = 0.0;   // extra margin demanded by the feasibility line search
  std::string trace_path;  // per-iterate CSV trace when non-empty
};

enum class SolveStatus { Optimal, MaxIter, NumericalFailure };

struct SolverReport {
  double objective = 0.0;  // c.x at the returned point
  int newton_iterations = 0;
  int outer_iterations = 0;
  double gap_estimate = std::numeric_limits<double>::infinity();
  std::vector<double> block_min_eigs;  // per constraint block, at the returned point
  double wall_seconds = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
};

/// Snapshot of one accepted Newton iterate, for traces and audits.
struct IterateInfo {
  int iteration = 0;
  int outer = 0;
  double barrier_t = 0.0;
  double decrement = 0.0;
  double objective = 0.0;
  double min_block_eig = 0.0;
  std::vector<double> var_norms;  // Frobenius norm of each variable block
};
using IterateCallback = std::function<void(const IterateInfo&)>;

struct SdpProblem {
  VariableLayout layout;
  Vector objective;  // svec-packed linear coefficients
  std::vector<LmiBlock> constraints;
  std::optional<FrobeniusBall> ball;

  /// Total barrier parameter: sum of block sides, plus one for the ball.
  double barrier_parameter() const;
  void validate() const;
};

/// PSD constraint on one variable block, as a single-term LMI.
LmiBlock psd_block(const VariableLayout& layout, int block, std::string name);

/// Log-barrier of the constraint set; +infinity outside the strict interior.
double barrier_value(const SdpProblem& problem, const Vector& x);
bool strictly_feasible(const SdpProblem& problem, const Vector& x, double eps = 0.0);
Vector barrier_gradient(const SdpProblem& problem, const Vector& x);
Matrix barrier_hessian(const SdpProblem& problem, const Vector& x);

/// Newton direction and decrement of t*c.x + barrier at a strictly feasible x.
std::pair<Vector, double> newton_step(const SdpProblem& problem, const Vector& x, double t);

/// Minimizes objective.x over the constraint set by log-barrier path
/// following from the given strictly feasible start. Throws NumericalError
/// if the start is not strictly in the interior.
std::pair<std::vector<Matrix>, SolverReport> solve(const SdpProblem& problem,
                                                   const std::vector<Matrix>& initial_point,
                                                   const SolverOptions& options = {},
                                                   const IterateCallback& callback = {});

}  // namespace ioclqr::sdp
