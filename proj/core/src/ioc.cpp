#include "ioclqr/ioc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ioclqr/assignment.hpp"

namespace ioclqr {

namespace {

double trace_product(const Matrix& a, const Matrix& b) {
  // Both arguments symmetric here, so tr(AB) = <A, B>.
  return a.cwiseProduct(b).sum();
}

// log(exp(a) + exp(b) + exp(c)) without overflow.
double log_sum_exp3(double a, double b, double c) {
  double m = std::max({a, b, c});
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

}  // namespace

IocSdpProblem IocSdpProblem::noiseless(std::vector<Matrix> grams, SystemDynamics dyn,
                                       std::optional<double> phi, double scale) {
  IocSdpProblem p;
  p.grams = std::move(grams);
  p.dyn = std::move(dyn);
  p.mode = ObservationMode::Noiseless;
  p.phi = phi;
  p.scale = scale;
  p.validate();
  return p;
}

IocSdpProblem IocSdpProblem::noisy(std::vector<Matrix> grams, SystemDynamics dyn, Matrix sigma,
                                   double phi, int agent_count, double scale) {
  IocSdpProblem p;
  p.grams = std::move(grams);
  p.dyn = std::move(dyn);
  p.mode = ObservationMode::Noisy;
  p.sigma = std::move(sigma);
  p.phi = phi;
  p.agent_count = agent_count;
  p.scale = scale;
  p.validate();
  return p;
}

void IocSdpProblem::validate() const {
  if (horizon() < 2) throw ValidationError("need Gram matrices for at least two time steps");
  for (const auto& g : grams) {
    if (g.rows() != dyn.n || g.cols() != dyn.n)
      throw ValidationError("Gram matrix dimension mismatch");
    if (min_eigenvalue(symmetrized(g)) < -1e-9 * std::max(1.0, g.norm()))
      throw ValidationError("Gram matrix is not positive semidefinite");
  }
  if (scale <= 0.0) throw ValidationError("objective scale must be positive");
  if (mode == ObservationMode::Noisy) {
    if (!sigma) throw ValidationError("noisy mode requires the noise covariance");
    if (!phi) throw ValidationError("noisy mode requires the Frobenius bound phi");
    if (sigma->rows() != dyn.n || sigma->cols() != dyn.n)
      throw ValidationError("noise covariance dimension mismatch");
    if (agent_count < 1) throw ValidationError("noisy mode requires the agent count");
  }
  if (phi && *phi < 0.0) throw ValidationError("phi must be nonnegative");
}

double evaluate_H(const Matrix& q, const std::vector<Matrix>& p,
                  const std::vector<Matrix>& grams) {
  const int N = static_cast<int>(grams.size());
  if (static_cast<int>(p.size()) != N) throw ValidationError("need P_1..P_N");
  double h = -trace_product(p.front(), grams.front()) + trace_product(p.back(), grams.back());
  for (int t = 1; t <= N - 1; ++t) h += trace_product(q, grams[static_cast<size_t>(t - 1)]);
  return h;
}

double evaluate_H_empirical(const Matrix& q, const std::vector<Matrix>& p,
                            const std::vector<Matrix>& grams, const Matrix& sigma,
                            int agent_count) {
  const int N = static_cast<int>(grams.size());
  double h = evaluate_H(q, p, grams) / agent_count;
  h += trace_product(p.front(), sigma) - trace_product(p.back(), sigma) -
       (N - 1) * trace_product(q, sigma);
  return h;
}

double FeasibilityReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (double e : lmi_min_eigs) m = std::min(m, e);
  for (double e : var_min_eigs) m = std::min(m, e);
  if (ball_margin) m = std::min(m, *ball_margin);
  return m;
}

FeasibilityReport check_feasibility(const Matrix& q, const std::vector<Matrix>& p,
                                    const SystemDynamics& dyn, std::optional<double> phi) {
  const int N = static_cast<int>(p.size());
  if (N < 2) throw ValidationError("need P_1..P_N");
  FeasibilityReport rep;
  rep.var_min_eigs.push_back(min_eigenvalue(symmetrized(q)));
  for (const auto& pt : p) rep.var_min_eigs.push_back(min_eigenvalue(symmetrized(pt)));
  for (int t = 1; t <= N - 1; ++t) {
    const Matrix& pn = p[static_cast<size_t>(t)];
    Matrix f(dyn.m + dyn.n, dyn.m + dyn.n);
    f.topLeftCorner(dyn.m, dyn.m) =
        dyn.B.transpose() * pn * dyn.B + Matrix::Identity(dyn.m, dyn.m);
    f.topRightCorner(dyn.m, dyn.n) = dyn.B.transpose() * pn * dyn.A;
    f.bottomLeftCorner(dyn.n, dyn.m) = dyn.A.transpose() * pn * dyn.B;
    f.bottomRightCorner(dyn.n, dyn.n) =
        dyn.A.transpose() * pn * dyn.A + q - p[static_cast<size_t>(t - 1)];
    rep.lmi_min_eigs.push_back(min_eigenvalue(symmetrized(f)));
  }
  rep.equality_residual = (p.back() - q).norm();
  if (phi) rep.ball_margin = *phi - q.squaredNorm();
  return rep;
}

sdp::SdpProblem build_sdp(const IocSdpProblem& problem) {
  problem.validate();
  const int n = problem.dyn.n;
  const int m = problem.dyn.m;
  const int N = problem.horizon();

  sdp::SdpProblem sp;
  sp.layout.blocks.push_back({"Q", n});
  for (int t = 1; t <= N - 1; ++t) sp.layout.blocks.push_back({"P" + std::to_string(t), n});

  for (int b = 0; b < sp.layout.block_count(); ++b)
    sp.constraints.push_back(
        sdp::psd_block(sp.layout, b, sp.layout.blocks[static_cast<size_t>(b)].name + ">=0"));

  // F_t = [B A]^T P_{t+1} [B A] + embed(Q - P_t) + diag(I, 0), t = 1..N-1,
  // with P_N identified with Q.
  Matrix composite(n, m + n);  // [B A]
  composite.leftCols(m) = problem.dyn.B;
  composite.rightCols(n) = problem.dyn.A;
  Matrix selector = Matrix::Zero(n, m + n);  // picks the trailing n coordinates
  selector.rightCols(n) = Matrix::Identity(n, n);
  for (int t = 1; t <= N - 1; ++t) {
    sdp::LmiBlock f;
    f.name = "F" + std::to_string(t);
    f.side = m + n;
    f.constant = Matrix::Zero(m + n, m + n);
    f.constant.topLeftCorner(m, m) = Matrix::Identity(m, m);
    const int p_next_block = (t + 1 <= N - 1) ? t + 1 : 0;  // P_N -> Q
    f.terms.push_back({p_next_block, 1.0, composite});
    f.terms.push_back({0, 1.0, selector});
    f.terms.push_back({t, -1.0, selector});
    sp.constraints.push_back(std::move(f));
  }

  if (problem.phi) sp.ball = sdp::FrobeniusBall{0, *problem.phi};

  // Linear objective coefficients; tr(XG) = svec(X).svec(G).
  Matrix q_coeff = Matrix::Zero(n, n);
  Matrix p1_coeff = Matrix::Zero(n, n);
  if (problem.mode == ObservationMode::Noiseless) {
    q_coeff = problem.grams.back();
    for (int t = 1; t <= N - 1; ++t) q_coeff += problem.grams[static_cast<size_t>(t - 1)];
    p1_coeff = -problem.grams.front();
  } else {
    const double inv_m = 1.0 / problem.agent_count;
    q_coeff = inv_m * problem.grams.back();
    for (int t = 1; t <= N - 1; ++t)
      q_coeff += inv_m * problem.grams[static_cast<size_t>(t - 1)];
    q_coeff -= static_cast<double>(N) * (*problem.sigma);
    p1_coeff = -inv_m * problem.grams.front() + *problem.sigma;
  }
  sp.objective = Vector::Zero(sp.layout.dim());
  sp.objective.segment(sp.layout.offset(0), sp.layout.block_dim(0)) =
      problem.scale * sdp::svec(symmetrized(q_coeff));
  if (N - 1 >= 1)
    sp.objective.segment(sp.layout.offset(1), sp.layout.block_dim(1)) =
        problem.scale * sdp::svec(symmetrized(p1_coeff));
  sp.validate();
  return sp;
}

std::vector<Matrix> find_initial_point(const IocSdpProblem& problem) {
  const int n = problem.dyn.n;
  const int N = problem.horizon();
  double q0 = 0.1;
  if (problem.phi) q0 = std::min(q0, 0.5 * std::sqrt(*problem.phi / n));
  if (!(q0 > 0.0))
    throw NumericalError("phase-1 failure: the Frobenius ball admits no interior point");
  const double delta = 0.5 * q0;

  Matrix q_init = q0 * Matrix::Identity(n, n);
  std::vector<Matrix> p(static_cast<size_t>(N));
  p[static_cast<size_t>(N - 1)] = q_init;
  for (int t = N - 1; t >= 1; --t)
    p[static_cast<size_t>(t - 1)] =
        dre_step(problem.dyn, p[static_cast<size_t>(t)], q_init) -
        delta * Matrix::Identity(n, n);

  std::vector<Matrix> vars;
  vars.reserve(static_cast<size_t>(N));
  vars.push_back(std::move(q_init));
  for (int t = 1; t <= N - 1; ++t) vars.push_back(p[static_cast<size_t>(t - 1)]);

  auto sp = build_sdp(problem);
  if (!sdp::strictly_feasible(sp, sp.layout.pack(vars)))
    throw NumericalError("phase-1 failure: constructed start is not strictly feasible");
  return vars;
}

EstimateResult estimate(const IocSdpProblem& problem, const sdp::SolverOptions& options,
                        const sdp::IterateCallback& callback) {
  problem.validate();
  const int N = problem.horizon();

  EstimateResult result;
  result.preconditions.horizon_ok = N >= problem.dyn.n + 1;
  if (!result.preconditions.horizon_ok)
    result.preconditions.warnings.push_back(
        "horizon N < n + 1: uniqueness of the optimum is not guaranteed");
  const Matrix& g1 = problem.grams.front();
  result.preconditions.g1_min_eig = min_eigenvalue(symmetrized(g1));
  result.preconditions.excitation_ok =
      result.preconditions.g1_min_eig > 1e-10 * std::max(1.0, g1.norm());
  if (!result.preconditions.excitation_ok)
    result.preconditions.warnings.push_back(
        "G_1 is not strictly positive definite: persistent excitation fails");

  auto sp = build_sdp(problem);
  auto x0 = find_initial_point(problem);
  auto [vars, report] = sdp::solve(sp, x0, options, callback);
  if (report.status == sdp::SolveStatus::NumericalFailure)
    throw NumericalError("SDP solve failed numerically");
  if (report.status == sdp::SolveStatus::MaxIter)
    result.preconditions.warnings.push_back(
        "solver stopped before reaching the target gap; estimate may be coarse");

  result.Q_est = CostMatrix::psd(vars[0], 1e-6);
  if (problem.phi) result.Q_est.frobenius_bound = problem.phi;
  result.P_est.assign(vars.begin() + 1, vars.end());
  result.P_est.push_back(result.Q_est.Q);
  RiccatiSolution shaped;
  shaped.P = result.P_est;
  result.K_est = gains_from_riccati(problem.dyn, shaped);
  result.objective =
      problem.mode == ObservationMode::Noiseless
          ? evaluate_H(result.Q_est.Q, result.P_est, problem.grams)
          : evaluate_H_empirical(result.Q_est.Q, result.P_est, problem.grams, *problem.sigma,
                                 problem.agent_count);
  result.report = report;
  return result;
}

EstimateResult estimate_noiseless(const std::vector<Matrix>& grams, const SystemDynamics& dyn,
                                  const sdp::SolverOptions& options, std::optional<double> phi,
                                  double scale) {
  return estimate(IocSdpProblem::noiseless(grams, dyn, phi, scale), options);
}

EstimateResult estimate_noisy(const std::vector<Matrix>& grams, const SystemDynamics& dyn,
                              const Matrix& sigma, double phi, int agent_count,
                              const sdp::SolverOptions& options, double scale) {
  return estimate(IocSdpProblem::noisy(grams, dyn, sigma, phi, agent_count, scale), options);
}

PermutationSchedule recover_permutations(const Matrix& q_est, const SystemDynamics& dyn,
                                         const std::vector<Matrix>& observations,
                                         const Matrix& x1, bool* ambiguous, double tie_tol) {
  const int N = static_cast<int>(observations.size());
  const int M = static_cast<int>(x1.cols());
  if (N < 1) throw ValidationError("no observations");
  if (ambiguous) *ambiguous = false;

  PermutationSchedule schedule;
  schedule.perms.resize(static_cast<size_t>(N));
  std::vector<int> identity(static_cast<size_t>(M));
  for (int i = 0; i < M; ++i) identity[static_cast<size_t>(i)] = i;
  schedule.perms[0] = identity;
  if (N == 1) return schedule;

  // Clamp tiny negative eigenvalues so slightly-off-cone estimates still
  // produce a usable rollout.
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(q_est));
  Matrix q_psd = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                 es.eigenvectors().transpose();
  auto riccati = solve_dre(dyn, CostMatrix::psd(q_psd, 1e-6), N);
  auto gains = gains_from_riccati(dyn, riccati);

  Matrix predicted = x1;
  for (int t = 2; t <= N; ++t) {
    predicted = (dyn.A + dyn.B * gains.at(t - 1)) * predicted;
    if (M == 1) {
      schedule.perms[static_cast<size_t>(t - 1)] = identity;
      continue;
    }
    const Matrix& observed = observations[static_cast<size_t>(t - 1)];
    Matrix cost(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        cost(i, j) = (observed.col(i) - predicted.col(j)).squaredNorm();
    auto assignment = min_cost_assignment(cost);
    if (ambiguous &&
        assignment_is_ambiguous(cost, assignment, tie_tol * std::max(1.0, cost.mean())))
      *ambiguous = true;
    schedule.perms[static_cast<size_t>(t - 1)] = std::move(assignment);
  }
  return schedule;
}

std::vector<double> riccati_norm_log_bounds(const SystemDynamics& dyn, double phi, int N) {
  if (N < 2) throw ValidationError("horizon must be at least 2");
  if (phi <= 0.0) throw ValidationError("phi must be positive");
  const double log_a_sq = 2.0 * std::log(dyn.A.norm());
  const double log_b_sq = 2.0 * std::log(dyn.B.norm());
  const double log_sqrt_phi = 0.5 * std::log(phi);
  const double log_sqrt_n = 0.5 * std::log(static_cast<double>(dyn.n));

  std::vector<double> log_beta(static_cast<size_t>(N));
  log_beta[static_cast<size_t>(N - 1)] = log_sqrt_phi;
  for (int t = N - 1; t >= 1; --t) {
    double lb_next = log_beta[static_cast<size_t>(t)];
    log_beta[static_cast<size_t>(t - 1)] =
        log_sum_exp3(log_a_sq + lb_next, log_sqrt_phi,
                     log_a_sq + log_b_sq + log_sqrt_n + 2.0 * lb_next);
  }
  return log_beta;
}

}  // namespace ioclqr
