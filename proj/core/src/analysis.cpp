#include "ioclqr/analysis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "ioclqr/sdp.hpp"

namespace ioclqr {

PmpOperators build_pmp_operators(const SystemDynamics& dyn, int N) {
  if (N < 2) throw ValidationError("horizon must be at least 2");
  PmpOperators ops;
  ops.n = dyn.n;
  ops.m = dyn.m;
  ops.N = N;

  const int n = dyn.n, m = dyn.m;
  const int rows = m * (N - 1);

  // gamma block row j (j = 1..N-1) is B^T (A^T)^{N-1-j}.
  ops.gamma.resize(rows, n);
  {
    Matrix power = Matrix::Identity(n, n);  // A^k
    for (int k = 0; k <= N - 2; ++k) {
      int j = N - 1 - k;
      ops.gamma.middleRows(static_cast<Eigen::Index>(j - 1) * m, m) =
          (power * dyn.B).transpose();
      if (k < N - 2) power = dyn.A * power;
    }
  }

  // input_to_state block (t, s), t >= s, is A^{t-s} B.
  ops.input_to_state = Matrix::Zero(static_cast<Eigen::Index>(n) * (N - 1), rows);
  {
    std::vector<Matrix> akb(static_cast<size_t>(N - 1));
    akb[0] = dyn.B;
    for (int k = 1; k <= N - 2; ++k) akb[static_cast<size_t>(k)] = dyn.A * akb[static_cast<size_t>(k - 1)];
    for (int t = 1; t <= N - 1; ++t)
      for (int s = 1; s <= t; ++s)
        ops.input_to_state.block(static_cast<Eigen::Index>(t - 1) * n,
                                 static_cast<Eigen::Index>(s - 1) * m, n, m) =
            akb[static_cast<size_t>(t - s)];
  }

  ops.a_tilde.resize(static_cast<Eigen::Index>(n) * (N - 1), n);
  {
    Matrix power = dyn.A;
    for (int t = 1; t <= N - 1; ++t) {
      ops.a_tilde.middleRows(static_cast<Eigen::Index>(t - 1) * n, n) = power;
      if (t < N - 1) power = dyn.A * power;
    }
  }
  return ops;
}

Matrix PmpOperators::shift_structure() const {
  const int rows = m * (N - 1);
  Matrix s = Matrix::Zero(rows, static_cast<Eigen::Index>(rows) * (N - 1));
  // S_{t+1} (t = 1..N-1) places m x m identities at block (r, N-1-t+r),
  // r = 1..t; S_N is the identity.
  for (int t = 1; t <= N - 1; ++t) {
    Eigen::Index col0 = static_cast<Eigen::Index>(t - 1) * rows;
    for (int r = 1; r <= t; ++r) {
      int c = (N - 1 - t) + r;
      s.block(static_cast<Eigen::Index>(r - 1) * m, col0 + static_cast<Eigen::Index>(c - 1) * m,
              m, m) = Matrix::Identity(m, m);
    }
  }
  return s;
}

Matrix PmpOperators::f_of(const Matrix& q) const {
  if (q.rows() != n || q.cols() != n) throw ValidationError("Q dimension mismatch");
  Matrix iq = Matrix::Zero(static_cast<Eigen::Index>(n) * (N - 1),
                           static_cast<Eigen::Index>(n) * (N - 1));
  for (int t = 0; t < N - 1; ++t)
    iq.block(static_cast<Eigen::Index>(t) * n, static_cast<Eigen::Index>(t) * n, n, n) = q;
  return input_to_state * input_to_state.transpose() * iq;
}

Matrix controllability_matrix(const SystemDynamics& dyn, int k) {
  if (k < 1) throw ValidationError("depth must be at least 1");
  // blocks are [A^{k-1}B, ..., AB, B] transposed into a km x n stack.
  Matrix stacked(static_cast<Eigen::Index>(k) * dyn.m, dyn.n);
  Matrix power = dyn.B;
  for (int j = k; j >= 1; --j) {
    stacked.middleRows(static_cast<Eigen::Index>(j - 1) * dyn.m, dyn.m) = power.transpose();
    if (j > 1) power = dyn.A * power;
  }
  return stacked;
}

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

ConditionReport condition_report(const SystemDynamics& dyn, int N, double threshold) {
  ConditionReport rep;
  rep.threshold = threshold;
  rep.cond_controllability = condition_number(controllability_matrix(dyn, dyn.n));
  rep.cond_stacked = condition_number(controllability_matrix(dyn, std::max(1, N - 1)));
  rep.well_conditioned = rep.cond_controllability < threshold;
  return rep;
}

Trajectory pmp_trajectory_oracle(const SystemDynamics& dyn, const CostMatrix& q,
                                 const Vector& x1, int N) {
  if (x1.size() != dyn.n) throw ValidationError("initial state dimension mismatch");
  auto ops = build_pmp_operators(dyn, N);
  const int n = dyn.n;
  Matrix system = Matrix::Identity(static_cast<Eigen::Index>(n) * (N - 1),
                                   static_cast<Eigen::Index>(n) * (N - 1)) +
                  ops.f_of(q.Q);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible())
    throw NumericalError("(I + F(Q)) is singular; the optimality system is corrupted");
  Vector stacked = lu.solve(ops.a_tilde * x1);

  Trajectory traj;
  traj.x.reserve(static_cast<size_t>(N));
  traj.u.reserve(static_cast<size_t>(N - 1));
  traj.x.push_back(x1);
  for (int t = 2; t <= N; ++t)
    traj.x.push_back(stacked.segment(static_cast<Eigen::Index>(t - 2) * n, n));
  // Inputs recovered via the left inverse of B (full column rank).
  Eigen::ColPivHouseholderQR<Matrix> qr(dyn.B);
  for (int t = 1; t <= N - 1; ++t)
    traj.u.push_back(qr.solve(traj.x[static_cast<size_t>(t)] -
                              dyn.A * traj.x[static_cast<size_t>(t - 1)]));
  return traj;
}

KernelProbeReport near_kernel_probe(const SystemDynamics& dyn, const Matrix& q_bar, int N,
                                    double relative_threshold) {
  const int n = dyn.n;
  if (q_bar.rows() != n || q_bar.cols() != n) throw ValidationError("Q dimension mismatch");
  auto ops = build_pmp_operators(dyn, N);
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * (N - 1);
  auto model_of = [&](const Matrix& q) -> Matrix {
    Matrix system = Matrix::Identity(rows, rows) + ops.f_of(q);
    return system.partialPivLu().solve(ops.a_tilde);
  };

  const int d = sdp::svec_dim(n);
  const double h = 1e-5 * std::max(q_bar.norm(), 1e-12);
  Matrix jac(rows * n, d);
  for (int k = 0; k < d; ++k) {
    Matrix dir = sdp::svec_basis(n, k);
    Matrix plus = model_of(q_bar + h * dir);
    Matrix minus = model_of(q_bar - h * dir);
    Matrix diff = (plus - minus) / (2.0 * h);
    jac.col(k) = Eigen::Map<const Vector>(diff.data(), diff.size());
  }

  Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  KernelProbeReport rep;
  rep.model_distance = sv(sv.size() - 1);
  rep.margin_relative = sv(0) > 0.0 ? rep.model_distance / sv(0) : 0.0;
  rep.well_conditioned = rep.margin_relative > relative_threshold;
  Matrix delta = sdp::unsvec(svd.matrixV().col(sv.size() - 1), n);
  // Prefer the sign that keeps q_bar + delta_q inside the PSD cone.
  if (min_eigenvalue(symmetrized(q_bar + delta)) <
      min_eigenvalue(symmetrized(q_bar - delta)))
    delta = -delta;
  rep.psd_compatible = min_eigenvalue(symmetrized(q_bar + delta)) >= -1e-9;
  rep.delta_q = std::move(delta);
  return rep;
}

namespace {

double rel_error(const Matrix& estimate, const Matrix& truth, double floor = 1e-12) {
  return (estimate - truth).norm() / std::max(truth.norm(), floor);
}

}  // namespace

ErrorMetrics error_metrics(const EstimateResult& estimate, const Matrix& q_true,
                           const SystemDynamics& dyn, const std::vector<Matrix>& grams) {
  const int N = static_cast<int>(estimate.P_est.size());
  auto truth_cost = CostMatrix::psd(q_true, 1e-8);
  auto riccati = solve_dre(dyn, truth_cost, N);
  auto gains_true = gains_from_riccati(dyn, riccati);
  auto acl_true = closed_loop_matrices(dyn, gains_true);
  auto acl_est = closed_loop_matrices(dyn, estimate.K_est);

  ErrorMetrics metrics;
  metrics.rel_q = rel_error(estimate.Q_est.Q, q_true);
  metrics.rel_k_min = std::numeric_limits<double>::infinity();
  metrics.rel_acl_min = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= N - 1; ++t) {
    double rk = rel_error(estimate.K_est.at(t), gains_true.at(t));
    double ra = rel_error(acl_est[static_cast<size_t>(t - 1)], acl_true[static_cast<size_t>(t - 1)]);
    metrics.rel_k_min = std::min(metrics.rel_k_min, rk);
    metrics.rel_k_max = std::max(metrics.rel_k_max, rk);
    metrics.rel_acl_min = std::min(metrics.rel_acl_min, ra);
    metrics.rel_acl_max = std::max(metrics.rel_acl_max, ra);
  }
  metrics.h_truth = evaluate_H(q_true, riccati.P, grams);
  metrics.objective_gap =
      std::abs(evaluate_H(estimate.Q_est.Q, estimate.P_est, grams) - metrics.h_truth);
  return metrics;
}

std::tuple<double, double, double> fit_loglog_slope(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ValidationError("need at least 3 points for a slope fit");
  const int k = static_cast<int>(points.size());
  Matrix a(k, 2);
  Vector b(k);
  for (int i = 0; i < k; ++i) {
    auto [x, y] = points[static_cast<size_t>(i)];
    if (!(x > 0.0) || !(y > 0.0))
      throw ValidationError("log-log fit requires strictly positive values");
    a(i, 0) = std::log10(x);
    a(i, 1) = 1.0;
    b(i) = std::log10(y);
  }
  Vector coef = a.colPivHouseholderQr().solve(b);
  double rms = std::sqrt((a * coef - b).squaredNorm() / k);
  return {coef(0), coef(1), rms};
}

}  // namespace ioclqr
