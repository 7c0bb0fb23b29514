#include "ioclqr/ensemble.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ioclqr/rng.hpp"

namespace ioclqr {

namespace {

// Lane tags keeping the per-purpose random streams disjoint.
enum StreamTag : std::uint64_t {
  kInitTag = 1,
  kPermTag = 2,
  kNoiseTag = 3,
  kWishartTag = 4,
};

}  // namespace

Box Box::cube(int n, double lo, double hi) {
  Box b;
  b.lo = Vector::Constant(n, lo);
  b.hi = Vector::Constant(n, hi);
  return b;
}

SystemDynamics discretize(const Matrix& a_hat, const Matrix& b_hat, double dt) {
  if (dt <= 0.0) throw ValidationError("sample period must be positive");
  if (a_hat.rows() != a_hat.cols() || b_hat.rows() != a_hat.rows())
    throw ValidationError("continuous-time pair has inconsistent dimensions");
  const int n = static_cast<int>(a_hat.rows());
  const int m = static_cast<int>(b_hat.cols());
  // exp([[Ahat, Bhat],[0,0]] dt) carries exp(Ahat dt) in the top-left block
  // and (int_0^dt exp(Ahat s) ds) Bhat in the top-right block.
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a_hat * dt;
  aug.topRightCorner(n, m) = b_hat * dt;
  Matrix e = aug.exp();
  if (!e.allFinite())
    throw NumericalError("matrix exponential did not converge; continuous pair is pathological");
  return SystemDynamics::validated(e.topLeftCorner(n, n), e.topRightCorner(n, m));
}

Matrix sample_initial_states(const Box& box, int M, std::uint64_t seed) {
  if (M < 1) throw ValidationError("agent count must be at least 1");
  const int n = static_cast<int>(box.lo.size());
  if (box.hi.size() != n || n == 0) throw ValidationError("box bounds dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(box.lo(i)) || !std::isfinite(box.hi(i)) || box.lo(i) > box.hi(i))
      throw ValidationError("box bounds must be finite with lo <= hi");
  }
  Matrix x(n, M);
  for (int i = 0; i < M; ++i) {
    rng::Stream s(seed, kInitTag, static_cast<std::uint64_t>(i));
    for (int r = 0; r < n; ++r) x(r, i) = s.uniform(box.lo(r), box.hi(r));
  }
  return x;
}

Matrix gram(const Matrix& snapshot) {
  const int M = static_cast<int>(snapshot.cols());
  std::vector<int> order(static_cast<size_t>(M));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index r = 0; r < snapshot.rows(); ++r) {
      if (snapshot(r, a) < snapshot(r, b)) return true;
      if (snapshot(r, a) > snapshot(r, b)) return false;
    }
    return false;
  });
  Matrix g = Matrix::Zero(snapshot.rows(), snapshot.rows());
  for (int idx : order) g += snapshot.col(idx) * snapshot.col(idx).transpose();
  return g;
}

void GramAccumulator::add(const Vector& column) {
  if (column.size() != g_.rows()) throw ValidationError("column dimension mismatch");
  g_ += column * column.transpose();
  ++count_;
}

std::pair<EnsembleObservations, PermutationSchedule> shuffle(
    const std::vector<Matrix>& states, std::uint64_t seed) {
  if (states.empty()) throw ValidationError("no snapshots given");
  const int M = static_cast<int>(states.front().cols());
  for (const auto& x : states)
    if (x.rows() != states.front().rows() || x.cols() != M)
      throw ValidationError("snapshots must all have identical shape");

  const int N = static_cast<int>(states.size());
  PermutationSchedule schedule;
  schedule.perms.resize(static_cast<size_t>(N));
  EnsembleObservations obs;
  obs.agent_count = M;
  obs.Y.resize(static_cast<size_t>(N));
  obs.G.resize(static_cast<size_t>(N));

  for (int t = 1; t <= N; ++t) {
    auto& perm = schedule.perms[static_cast<size_t>(t - 1)];
    perm.resize(static_cast<size_t>(M));
    std::iota(perm.begin(), perm.end(), 0);
    if (t >= 2) {
      rng::Stream s(seed, kPermTag, static_cast<std::uint64_t>(t));
      for (int i = M - 1; i > 0; --i)
        std::swap(perm[static_cast<size_t>(i)],
                  perm[s.next_below(static_cast<std::uint64_t>(i + 1))]);
    }
    const Matrix& x = states[static_cast<size_t>(t - 1)];
    Matrix y(x.rows(), M);
    for (int i = 0; i < M; ++i) y.col(i) = x.col(perm[static_cast<size_t>(i)]);
    obs.G[static_cast<size_t>(t - 1)] = gram(y);
    obs.Y[static_cast<size_t>(t - 1)] = std::move(y);
  }
  obs.meta.seed = seed;
  obs.meta.schedule = schedule;
  return {std::move(obs), std::move(schedule)};
}

std::pair<std::vector<Matrix>, std::vector<Matrix>> add_noise(
    const std::vector<Matrix>& states, const NoiseModel& noise) {
  if (states.empty()) throw ValidationError("no snapshots given");
  const int n = static_cast<int>(states.front().rows());
  if (noise.sigma.rows() != n || noise.sigma.cols() != n)
    throw ValidationError("covariance dimension mismatch");

  std::vector<Matrix> noisy = states;
  std::vector<Matrix> draws(states.size());
  if (noise.sigma.isZero(0.0)) {
    for (size_t t = 0; t < states.size(); ++t)
      draws[t] = Matrix::Zero(n, states[t].cols());
    return {std::move(noisy), std::move(draws)};
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(noise.sigma));
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the noise covariance failed");
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < -1e-10 * std::max(1.0, noise.sigma.norm()))
    throw ValidationError("noise covariance is not positive semidefinite");
  Matrix root = es.eigenvectors() *
                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();

  for (size_t t = 0; t < states.size(); ++t) {
    const int M = static_cast<int>(states[t].cols());
    Matrix v(n, M);
    for (int i = 0; i < M; ++i) {
      rng::Stream s(noise.seed, kNoiseTag, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(t + 1));
      Vector z(n);
      for (int r = 0; r < n; ++r) z(r) = s.gaussian();
      v.col(i) = root * z;
    }
    noisy[t] += v;
    draws[t] = std::move(v);
  }
  return {std::move(noisy), std::move(draws)};
}

Matrix sample_wishart_covariance(int n, double scale, int degrees, std::uint64_t seed) {
  if (degrees < n) throw ValidationError("Wishart degrees must be at least the dimension");
  rng::Stream s(seed, kWishartTag);
  Matrix g(n, degrees);
  for (int c = 0; c < degrees; ++c)
    for (int r = 0; r < n; ++r) g(r, c) = s.gaussian();
  return scale * (g * g.transpose());
}

double snr_db(const std::vector<Matrix>& clean_states,
              const std::vector<Matrix>& noise_realizations) {
  if (clean_states.size() != noise_realizations.size() || clean_states.empty())
    throw ValidationError("state and noise sequences must have equal nonzero length");
  const int M = static_cast<int>(clean_states.front().cols());
  double mean_ratio = 0.0;
  for (int i = 0; i < M; ++i) {
    double sx = 0.0, sv = 0.0;
    for (size_t t = 0; t < clean_states.size(); ++t) {
      if (clean_states[t].cols() != M || noise_realizations[t].cols() != M)
        throw ValidationError("snapshot shapes do not match");
      sx += clean_states[t].col(i).squaredNorm();
      sv += noise_realizations[t].col(i).squaredNorm();
    }
    if (sv == 0.0) return std::numeric_limits<double>::infinity();
    mean_ratio += sx / sv;
  }
  mean_ratio /= M;
  return 10.0 * std::log10(mean_ratio);
}

}  // namespace ioclqr
