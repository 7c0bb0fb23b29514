#include "ioclqr/lqr.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ioclqr {

namespace {

double smallest_singular_ratio(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  double smax = svd.singularValues()(0);
  if (smax == 0.0) return 0.0;
  return svd.singularValues()(svd.singularValues().size() - 1) / smax;
}

}  // namespace

SystemDynamics SystemDynamics::validated(Matrix A, Matrix B, double tol) {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw ValidationError("A must be square and non-empty");
  if (B.rows() != A.rows() || B.cols() == 0)
    throw ValidationError("B must have as many rows as A and at least one column");
  SystemDynamics dyn;
  dyn.n = static_cast<int>(A.rows());
  dyn.m = static_cast<int>(B.cols());
  dyn.A = std::move(A);
  dyn.B = std::move(B);

  if (smallest_singular_ratio(dyn.A) <= tol)
    throw ValidationError("A is singular (or nearly so) at the configured tolerance");

  Eigen::JacobiSVD<Matrix> svd_b(dyn.B);
  double bmax = svd_b.singularValues()(0);
  if (bmax == 0.0 || svd_b.singularValues().minCoeff() <= tol * bmax)
    throw ValidationError("B does not have full column rank");

  Matrix ctrb = dyn.controllability_blocks(dyn.n);
  Eigen::JacobiSVD<Matrix> svd_c(ctrb);
  const auto& sv = svd_c.singularValues();
  if (sv(std::min<Eigen::Index>(dyn.n, sv.size()) - 1) <= tol * sv(0))
    throw ValidationError("(A, B) is not controllable at the configured tolerance");
  return dyn;
}

Matrix SystemDynamics::controllability_blocks(int depth) const {
  Matrix out(n, static_cast<Eigen::Index>(depth) * m);
  Matrix power = B;
  for (int k = 0; k < depth; ++k) {
    out.middleCols(static_cast<Eigen::Index>(k) * m, m) = power;
    if (k + 1 < depth) power = A * power;
  }
  return out;
}

CostMatrix CostMatrix::psd(Matrix q, double tol) {
  if (q.rows() != q.cols()) throw ValidationError("cost matrix must be square");
  Matrix sym = symmetrized(q);
  double norm = sym.norm();
  double floor = -tol * std::max(norm, 1.0);
  if (min_eigenvalue(sym) < floor)
    throw ValidationError("cost matrix is not positive semidefinite");
  CostMatrix c;
  c.Q = std::move(sym);
  return c;
}

Matrix dre_step(const SystemDynamics& dyn, const Matrix& p_next, const Matrix& q) {
  Matrix w = dyn.B.transpose() * p_next * dyn.B + Matrix::Identity(dyn.m, dyn.m);
  Eigen::LLT<Matrix> llt(w);
  if (llt.info() != Eigen::Success)
    throw NumericalError("(B^T P B + I) is not SPD; the recursion received a non-PSD matrix");
  Matrix btpa = dyn.B.transpose() * p_next * dyn.A;
  Matrix next = dyn.A.transpose() * p_next * dyn.A + q - btpa.transpose() * llt.solve(btpa);
  return symmetrized(next);
}

RiccatiSolution solve_dre(const SystemDynamics& dyn, const CostMatrix& q, int N) {
  if (N < 2) throw ValidationError("horizon must be at least 2");
  if (q.size() != dyn.n) throw ValidationError("cost matrix dimension mismatch");
  RiccatiSolution out;
  out.P.resize(static_cast<size_t>(N));
  out.P[static_cast<size_t>(N - 1)] = q.Q;
  for (int t = N - 1; t >= 1; --t)
    out.P[static_cast<size_t>(t - 1)] = dre_step(dyn, out.P[static_cast<size_t>(t)], q.Q);
  return out;
}

GainSchedule gains_from_riccati(const SystemDynamics& dyn, const RiccatiSolution& riccati) {
  int N = riccati.horizon();
  if (N < 2) throw ValidationError("Riccati solution too short");
  for (const auto& p : riccati.P)
    if (p.rows() != dyn.n || p.cols() != dyn.n)
      throw ValidationError("Riccati solution dimension mismatch");
  GainSchedule gains;
  gains.K.resize(static_cast<size_t>(N - 1));
  for (int t = 1; t <= N - 1; ++t) {
    const Matrix& pn = riccati.at(t + 1);
    Matrix w = dyn.B.transpose() * pn * dyn.B + Matrix::Identity(dyn.m, dyn.m);
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success)
      throw NumericalError("(B^T P B + I) is not SPD in gain computation");
    gains.K[static_cast<size_t>(t - 1)] = -llt.solve(dyn.B.transpose() * pn * dyn.A);
  }
  return gains;
}

std::vector<Matrix> closed_loop_matrices(const SystemDynamics& dyn,
                                         const GainSchedule& gains,
                                         double rcond_floor) {
  std::vector<Matrix> out;
  out.reserve(gains.K.size());
  for (const auto& k : gains.K) {
    if (k.rows() != dyn.m || k.cols() != dyn.n)
      throw ValidationError("gain dimension mismatch");
    Matrix acl = dyn.A + dyn.B * k;
    if (smallest_singular_ratio(acl) <= rcond_floor)
      throw NumericalError(
          "closed-loop matrix is numerically singular; upstream cost was likely not PSD");
    out.push_back(std::move(acl));
  }
  return out;
}

Trajectory simulate_agent(const SystemDynamics& dyn, const GainSchedule& gains,
                          const Vector& x1, int agent_id) {
  if (x1.size() != dyn.n) throw ValidationError("initial state dimension mismatch");
  if (!x1.allFinite()) throw ValidationError("initial state must be finite");
  int N = gains.steps() + 1;
  Trajectory traj;
  traj.agent_id = agent_id;
  traj.x.reserve(static_cast<size_t>(N));
  traj.u.reserve(static_cast<size_t>(N - 1));
  traj.x.push_back(x1);
  for (int t = 1; t <= N - 1; ++t) {
    Vector u = gains.at(t) * traj.x.back();
    traj.x.push_back(dyn.A * traj.x.back() + dyn.B * u);
    traj.u.push_back(std::move(u));
  }
  return traj;
}

PmpCertificate pmp_check(const SystemDynamics& dyn, const CostMatrix& q,
                         const Trajectory& traj) {
  int N = traj.horizon();
  if (N < 2 || static_cast<int>(traj.u.size()) != N - 1)
    throw ValidationError("trajectory must have N states and N-1 inputs");
  PmpCertificate cert;
  cert.lambda.assign(static_cast<size_t>(N - 1), Vector());
  // lambda[k] holds lambda_{k+2}; build backward from lambda_N = Q x_N.
  cert.lambda[static_cast<size_t>(N - 2)] = q.Q * traj.x[static_cast<size_t>(N - 1)];
  for (int t = N - 1; t >= 2; --t)
    cert.lambda[static_cast<size_t>(t - 2)] =
        dyn.A.transpose() * cert.lambda[static_cast<size_t>(t - 1)] +
        q.Q * traj.x[static_cast<size_t>(t - 1)];
  cert.residuals.resize(static_cast<size_t>(N - 1));
  for (int t = 1; t <= N - 1; ++t) {
    Vector r = traj.u[static_cast<size_t>(t - 1)] +
               dyn.B.transpose() * cert.lambda[static_cast<size_t>(t - 1)];
    cert.residuals[static_cast<size_t>(t - 1)] = r.norm();
  }
  cert.max_residual = 0.0;
  for (double r : cert.residuals) cert.max_residual = std::max(cert.max_residual, r);
  return cert;
}

double objective_value(const CostMatrix& q, const Trajectory& traj) {
  int N = traj.horizon();
  double cost = traj.x[static_cast<size_t>(N - 1)].dot(q.Q * traj.x[static_cast<size_t>(N - 1)]);
  for (int t = 1; t <= N - 1; ++t) {
    const Vector& x = traj.x[static_cast<size_t>(t - 1)];
    const Vector& u = traj.u[static_cast<size_t>(t - 1)];
    cost += x.dot(q.Q * x) + u.squaredNorm();
  }
  return cost;
}

}  // namespace ioclqr
