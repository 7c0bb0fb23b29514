#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ioclqr/lqr.hpp"
#include "ioclqr/types.hpp"

namespace ioclqr {

/// One permutation per time step, each a bijection on {0..M-1};
/// the first one is the identity (the ordering of initial states is
/// meaningless, so it can be fixed).
struct PermutationSchedule {
  std::vector<std::vector<int>> perms;  // perms[t-1] for t = 1..N

  int horizon() const { return static_cast<int>(perms.size()); }
};

struct NoiseModel {
  Matrix sigma;        // symmetric PSD n x n covariance
  std::uint64_t seed = 0;
};

struct EnsembleMeta {
  std::uint64_t seed = 0;
  double snr_db = std::numeric_limits<double>::infinity();
  PermutationSchedule schedule;  // ground truth, retained for testing only
};

/// Per-timestep snapshot matrices Y_t (columns are agents in shuffled
/// order) together with their Gram matrices G_t = Y_t Y_t^T. The
/// estimator consumes only {G_t}.
struct EnsembleObservations {
  std::vector<Matrix> Y;
  std::vector<Matrix> G;
  int agent_count = 0;
  EnsembleMeta meta;

  int horizon() const { return static_cast<int>(Y.size()); }
};

/// Axis-aligned box for initial-state sampling.
struct Box {
  Vector lo;
  Vector hi;

  static Box cube(int n, double lo, double hi);
};

/// Samples (A, B) from a continuous-time pair: A = exp(Ahat dt),
/// B = (int_0^dt exp(Ahat s) ds) Bhat, both read off one augmented matrix
/// exponential. The result is validated (A invertible by construction).
SystemDynamics discretize(const Matrix& a_hat, const Matrix& b_hat, double dt);

/// n x M matrix whose columns are i.i.d. uniform on the box, a pure
/// function of (seed, column index).
Matrix sample_initial_states(const Box& box, int M, std::uint64_t seed);

/// Gram matrix of the columns of `snapshot` accumulated in canonical
/// order (columns sorted lexicographically before summation), so the
/// result is bit-identical under any column permutation of the input.
Matrix gram(const Matrix& snapshot);

/// Streaming rank-one accumulator: O(n^2) state, columns in given order.
class GramAccumulator {
 public:
  explicit GramAccumulator(int n) : g_(Matrix::Zero(n, n)) {}
  void add(const Vector& column);
  const Matrix& value() const { return g_; }
  std::int64_t count() const { return count_; }

 private:
  Matrix g_;
  std::int64_t count_ = 0;
};

/// Shuffles each snapshot's columns by an independent uniform permutation
/// (t = 1 stays the identity) and packages the observations with their
/// canonical Gram matrices and the true schedule.
std::pair<EnsembleObservations, PermutationSchedule> shuffle(
    const std::vector<Matrix>& states, std::uint64_t seed);

/// Adds one independent N(0, sigma) draw per column, every time step
/// including the first. A zero covariance returns the input unchanged.
/// Returns the perturbed snapshots and the noise realizations.
std::pair<std::vector<Matrix>, std::vector<Matrix>> add_noise(
    const std::vector<Matrix>& states, const NoiseModel& noise);

/// sigma = scale * G G^T with G an n x degrees standard-normal matrix.
Matrix sample_wishart_covariance(int n, double scale, int degrees, std::uint64_t seed);

/// Mean over trajectories of (total state energy / total noise energy),
/// in dB. Zero noise energy yields +infinity.
double snr_db(const std::vector<Matrix>& clean_states,
              const std::vector<Matrix>& noise_realizations);

}  // namespace ioclqr
