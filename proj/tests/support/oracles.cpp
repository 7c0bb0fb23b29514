#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ioclqr/analysis.hpp"

namespace ioclqr::testing {

Matrix taylor_expm(const Matrix& m, int terms) {
  const int n = static_cast<int>(m.rows());
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Matrix scaled = m / std::pow(2.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= terms; ++k) {
    term = (term * scaled) / k;
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Matrix random_psd(int n, rng::Stream& stream, double norm_bound_sq) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Matrix g(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) g(r, c) = stream.gaussian();
    Matrix q = g * g.transpose();
    if (norm_bound_sq <= 0.0 || q.squaredNorm() <= norm_bound_sq) return q;
  }
  throw std::runtime_error("random_psd: rejection bound never satisfied");
}

SystemDynamics random_system(int n, int m, rng::Stream& stream, double dt) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix a_hat(n, n), b_hat(n, m);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) a_hat(r, c) = stream.gaussian();
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < n; ++r) b_hat(r, c) = stream.gaussian();
    try {
      return discretize(a_hat, b_hat, dt);
    } catch (const ValidationError&) {
      continue;
    }
  }
  throw std::runtime_error("random_system: could not draw a controllable pair");
}

Matrix value_matrix_oracle(const SystemDynamics& dyn, const CostMatrix& q, int t, int N) {
  const int horizon = N - t + 1;
  const int n = dyn.n;
  if (horizon == 1) return q.Q;

  auto cost_from = [&](const Vector& x1) {
    Trajectory traj = pmp_trajectory_oracle(dyn, q, x1, horizon);
    return objective_value(q, traj);
  };

  Matrix p(n, n);
  std::vector<double> diag(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    diag[static_cast<size_t>(i)] = cost_from(Vector::Unit(n, i));
    p(i, i) = diag[static_cast<size_t>(i)];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double both = cost_from(Vector::Unit(n, i) + Vector::Unit(n, j));
      double off = 0.5 * (both - diag[static_cast<size_t>(i)] - diag[static_cast<size_t>(j)]);
      p(i, j) = off;
      p(j, i) = off;
    }
  }
  return p;
}

FeasiblePoint sample_feasible_point(const SystemDynamics& dyn, const Matrix& q, int N,
                                    rng::Stream& stream) {
  const int n = dyn.n;
  FeasiblePoint point;
  point.q = q;
  point.p.assign(static_cast<size_t>(N), Matrix());
  point.p[static_cast<size_t>(N - 1)] = q;
  for (int t = N - 1; t >= 1; --t) {
    Matrix base = dre_step(dyn, point.p[static_cast<size_t>(t)], q);
    double lmin = min_eigenvalue(base);
    Matrix shift = Matrix::Zero(n, n);
    if (lmin > 0.0) {
      Matrix w = random_psd(n, stream);
      Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
      double wmax = es.eigenvalues().maxCoeff();
      if (wmax > 0.0) shift = (stream.uniform01() * 0.9 * lmin / wmax) * w;
    }
    point.p[static_cast<size_t>(t - 1)] = base - shift;
  }
  return point;
}

std::vector<int> brute_force_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<size_t>(i)]);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace ioclqr::testing
