#include "ioclqr/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "ioclqr/matrix_io.hpp"

namespace ioclqr::sdp {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

int svec_dim(int side) { return side * (side + 1) / 2; }

Vector svec(const Matrix& x) {
  const int s = static_cast<int>(x.rows());
  Vector v(svec_dim(s));
  int k = 0;
  for (int j = 0; j < s; ++j) {
    v(k++) = x(j, j);
    for (int i = j + 1; i < s; ++i) v(k++) = kSqrt2 * x(i, j);
  }
  return v;
}

Matrix unsvec(const Vector& v, int side) {
  Matrix x(side, side);
  int k = 0;
  for (int j = 0; j < side; ++j) {
    x(j, j) = v(k++);
    for (int i = j + 1; i < side; ++i) {
      x(i, j) = v(k) / kSqrt2;
      x(j, i) = v(k) / kSqrt2;
      ++k;
    }
  }
  return x;
}

Matrix svec_basis(int side, int k) {
  Vector e = Vector::Zero(svec_dim(side));
  e(k) = 1.0;
  return unsvec(e, side);
}

int VariableLayout::offset(int b) const {
  int off = 0;
  for (int i = 0; i < b; ++i) off += block_dim(i);
  return off;
}

int VariableLayout::dim() const { return offset(block_count()); }

Vector VariableLayout::pack(const std::vector<Matrix>& vars) const {
  if (static_cast<int>(vars.size()) != block_count())
    throw ValidationError("variable count does not match layout");
  Vector x(dim());
  int off = 0;
  for (int b = 0; b < block_count(); ++b) {
    if (vars[static_cast<size_t>(b)].rows() != blocks[static_cast<size_t>(b)].side)
      throw ValidationError("variable block side mismatch");
    x.segment(off, block_dim(b)) = svec(vars[static_cast<size_t>(b)]);
    off += block_dim(b);
  }
  return x;
}

std::vector<Matrix> VariableLayout::unpack(const Vector& x) const {
  if (x.size() != dim()) throw ValidationError("packed vector length mismatch");
  std::vector<Matrix> vars(static_cast<size_t>(block_count()));
  int off = 0;
  for (int b = 0; b < block_count(); ++b) {
    vars[static_cast<size_t>(b)] =
        unsvec(x.segment(off, block_dim(b)), blocks[static_cast<size_t>(b)].side);
    off += block_dim(b);
  }
  return vars;
}

Matrix LmiBlock::evaluate(const std::vector<Matrix>& vars) const {
  Matrix f = constant;
  for (const auto& term : terms)
    f += term.coeff * term.L.transpose() * vars[static_cast<size_t>(term.block)] * term.L;
  return f;
}

double SdpProblem::barrier_parameter() const {
  double nu = 0.0;
  for (const auto& c : constraints) nu += c.side;
  if (ball) nu += 1.0;
  return nu;
}

void SdpProblem::validate() const {
  if (objective.size() != layout.dim())
    throw ValidationError("objective length does not match layout");
  for (const auto& c : constraints) {
    if (c.constant.rows() != c.side || c.constant.cols() != c.side)
      throw ValidationError("LMI constant side mismatch in block " + c.name);
    for (const auto& t : c.terms) {
      if (t.block < 0 || t.block >= layout.block_count())
        throw ValidationError("LMI term references unknown variable block");
      if (t.L.rows() != layout.blocks[static_cast<size_t>(t.block)].side ||
          t.L.cols() != c.side)
        throw ValidationError("LMI term map has wrong shape in block " + c.name);
    }
  }
  if (ball) {
    if (ball->block < 0 || ball->block >= layout.block_count())
      throw ValidationError("ball references unknown variable block");
    if (ball->radius_sq < 0.0) throw ValidationError("ball radius must be nonnegative");
  }
}

LmiBlock psd_block(const VariableLayout& layout, int block, std::string name) {
  const int side = layout.blocks[static_cast<size_t>(block)].side;
  LmiBlock b;
  b.name = std::move(name);
  b.side = side;
  b.constant = Matrix::Zero(side, side);
  b.terms.push_back({block, 1.0, Matrix::Identity(side, side)});
  return b;
}

namespace {

// Precomputed derivative structure of one LMI block: for every variable
// block it touches, the matrices dF/d(svec coordinate).
struct BlockWork {
  const LmiBlock* def = nullptr;
  std::vector<int> var_blocks;
  std::vector<int> var_offsets;              // offsets into the packed vector
  std::vector<std::vector<Matrix>> dF;       // dF[vi][k]
};

struct Workspace {
  const SdpProblem* problem = nullptr;
  std::vector<BlockWork> blocks;
  int ball_offset = -1;
  int ball_dim = 0;

  explicit Workspace(const SdpProblem& p) : problem(&p) {
    p.validate();
    blocks.reserve(p.constraints.size());
    for (const auto& c : p.constraints) {
      BlockWork w;
      w.def = &c;
      for (const auto& t : c.terms) {
        bool seen = false;
        for (int b : w.var_blocks) seen = seen || (b == t.block);
        if (!seen) w.var_blocks.push_back(t.block);
      }
      for (int b : w.var_blocks) w.var_offsets.push_back(p.layout.offset(b));
      w.dF.resize(w.var_blocks.size());
      for (size_t vi = 0; vi < w.var_blocks.size(); ++vi) {
        const int vb = w.var_blocks[vi];
        const int side = p.layout.blocks[static_cast<size_t>(vb)].side;
        const int d = svec_dim(side);
        w.dF[vi].reserve(static_cast<size_t>(d));
        for (int k = 0; k < d; ++k) {
          Matrix e = svec_basis(side, k);
          Matrix df = Matrix::Zero(c.side, c.side);
          for (const auto& t : c.terms)
            if (t.block == vb) df += t.coeff * t.L.transpose() * e * t.L;
          w.dF[vi].push_back(std::move(df));
        }
      }
      blocks.push_back(std::move(w));
    }
    if (p.ball) {
      ball_offset = p.layout.offset(p.ball->block);
      ball_dim = p.layout.block_dim(p.ball->block);
    }
  }

  double ball_slack(const Vector& x) const {
    return problem->ball->radius_sq - x.segment(ball_offset, ball_dim).squaredNorm();
  }

  // Barrier value; +inf when not strictly feasible (eps-strictly for eps > 0).
  double barrier(const Vector& x, double eps = 0.0) const {
    const auto vars = problem->layout.unpack(x);
    double phi = 0.0;
    for (const auto& w : blocks) {
      Matrix f = w.def->evaluate(vars);
      if (eps > 0.0) f -= eps * Matrix::Identity(f.rows(), f.cols());
      Eigen::LLT<Matrix> llt(f);
      if (llt.info() != Eigen::Success) return kInf;
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < f.rows(); ++i) {
        double d = llt.matrixLLT()(i, i);
        if (!(d > 0.0)) return kInf;
        logdet += std::log(d);
      }
      phi -= 2.0 * logdet;
    }
    if (problem->ball) {
      double slack = ball_slack(x);
      if (!(slack > eps)) return kInf;
      phi -= std::log(slack);
    }
    return phi;
  }

  // Gradient and (optionally) Hessian of the barrier at a strictly feasible x.
  void derivatives(const Vector& x, Vector& grad, Matrix* hess) const {
    const auto vars = problem->layout.unpack(x);
    const int d = problem->layout.dim();
    grad = Vector::Zero(d);
    if (hess) *hess = Matrix::Zero(d, d);

    std::vector<Matrix> whitened;  // M_k = L^-1 dF_k L^-T per local coordinate
    std::vector<int> global_index;
    for (const auto& w : blocks) {
      Matrix f = w.def->evaluate(vars);
      Eigen::LLT<Matrix> llt(f);
      if (llt.info() != Eigen::Success)
        throw NumericalError("barrier derivatives requested outside the interior");
      auto lower = llt.matrixL();
      whitened.clear();
      global_index.clear();
      for (size_t vi = 0; vi < w.var_blocks.size(); ++vi) {
        for (size_t k = 0; k < w.dF[vi].size(); ++k) {
          Matrix t1 = lower.solve(w.dF[vi][k]);
          Matrix mk = lower.solve(t1.transpose()).transpose();
          int gi = w.var_offsets[vi] + static_cast<int>(k);
          grad(gi) -= mk.trace();
          whitened.push_back(std::move(mk));
          global_index.push_back(gi);
        }
      }
      if (hess) {
        for (size_t a = 0; a < whitened.size(); ++a)
          for (size_t b = a; b < whitened.size(); ++b) {
            double h = whitened[a].cwiseProduct(whitened[b]).sum();
            (*hess)(global_index[a], global_index[b]) += h;
            if (a != b) (*hess)(global_index[b], global_index[a]) += h;
          }
      }
    }
    if (problem->ball) {
      double slack = ball_slack(x);
      if (!(slack > 0.0))
        throw NumericalError("barrier derivatives requested outside the ball");
      auto q = x.segment(ball_offset, ball_dim);
      grad.segment(ball_offset, ball_dim) += (2.0 / slack) * q;
      if (hess) {
        hess->block(ball_offset, ball_offset, ball_dim, ball_dim) +=
            (2.0 / slack) * Matrix::Identity(ball_dim, ball_dim) +
            (4.0 / (slack * slack)) * (q * q.transpose());
      }
    }
  }

  std::vector<double> block_min_eigs(const Vector& x) const {
    const auto vars = problem->layout.unpack(x);
    std::vector<double> eigs;
    eigs.reserve(blocks.size());
    for (const auto& w : blocks) eigs.push_back(min_eigenvalue(w.def->evaluate(vars)));
    return eigs;
  }

  std::vector<double> var_norms(const Vector& x) const {
    std::vector<double> norms;
    norms.reserve(static_cast<size_t>(problem->layout.block_count()));
    for (int b = 0; b < problem->layout.block_count(); ++b)
      norms.push_back(x.segment(problem->layout.offset(b), problem->layout.block_dim(b)).norm());
    return norms;
  }
};

// Newton direction for t*c.x + barrier; returns (direction, decrement).
std::pair<Vector, double> newton_direction(const Workspace& ws, const Vector& x, double t) {
  Vector grad;
  Matrix hess;
  ws.derivatives(x, grad, &hess);
  grad += t * ws.problem->objective;

  const int d = static_cast<int>(hess.rows());
  double diag_scale = std::max(hess.diagonal().maxCoeff(), 1.0);
  double ridge = 0.0;
  for (int attempt = 0; attempt < 9; ++attempt) {
    Matrix h = hess;
    if (ridge > 0.0) h += ridge * Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() == Eigen::Success) {
      Vector dx = -llt.solve(grad);
      double dec_sq = -grad.dot(dx);
      if (std::isfinite(dec_sq) && dec_sq >= 0.0)
        return {std::move(dx), std::sqrt(dec_sq)};
    }
    ridge = (ridge == 0.0) ? 1e-14 * diag_scale : ridge * 100.0;
  }
  throw NumericalError("Newton system remained indefinite after regularization");
}

}  // namespace

double barrier_value(const SdpProblem& problem, const Vector& x) {
  return Workspace(problem).barrier(x);
}

bool strictly_feasible(const SdpProblem& problem, const Vector& x, double eps) {
  return std::isfinite(Workspace(problem).barrier(x, eps));
}

Vector barrier_gradient(const SdpProblem& problem, const Vector& x) {
  Vector g;
  Workspace(problem).derivatives(x, g, nullptr);
  return g;
}

Matrix barrier_hessian(const SdpProblem& problem, const Vector& x) {
  Vector g;
  Matrix h;
  Workspace(problem).derivatives(x, g, &h);
  return h;
}

std::pair<Vector, double> newton_step(const SdpProblem& problem, const Vector& x, double t) {
  Workspace ws(problem);
  if (!std::isfinite(ws.barrier(x)))
    throw NumericalError("newton_step requires a strictly feasible point");
  return newton_direction(ws, x, t);
}

std::pair<std::vector<Matrix>, SolverReport> solve(const SdpProblem& problem,
                                                   const std::vector<Matrix>& initial_point,
                                                   const SolverOptions& options,
                                                   const IterateCallback& callback) {
  const auto start_time = std::chrono::steady_clock::now();
  Workspace ws(problem);
  Vector x = problem.layout.pack(initial_point);

  if (!std::isfinite(ws.barrier(x, options.feas_eps)))
    throw NumericalError("initial point is not strictly feasible");

  const double nu = problem.barrier_parameter();
  const Vector& c = problem.objective;

  double t = options.t0;
  if (t <= 0.0) {
    // Keep the first centering's gap estimate at or below 10% of the
    // starting objective magnitude.
    t = nu / std::max(0.1 * std::abs(c.dot(x)), 1e-2);
  }

  std::ofstream trace;
  if (!options.trace_path.empty()) {
    trace.open(options.trace_path);
    if (!trace) throw IoError("cannot open trace file: " + options.trace_path);
    trace << "iteration,outer,barrier_t,decrement,objective,min_block_eig\n";
  }

  SolverReport report;
  report.status = SolveStatus::MaxIter;
  int total_newton = 0;
  int outer = 0;
  double certified_gap = kInf;
  bool stalled = false;

  while (outer < options.max_outer) {
    ++outer;
    // Centering at the current barrier weight.
    while (true) {
      if (total_newton >= options.max_newton) {
        stalled = true;
        break;
      }
      Vector dx;
      double dec;
      try {
        std::tie(dx, dec) = newton_direction(ws, x, t);
      } catch (const NumericalError&) {
        report.status = SolveStatus::NumericalFailure;
        stalled = true;
        break;
      }
      if (dec <= options.newton_tol) break;

      double psi0 = t * c.dot(x) + ws.barrier(x);
      double slope = -dec * dec;
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-14) {
        Vector xn = x + alpha * dx;
        double phin = ws.barrier(xn, options.feas_eps);
        if (std::isfinite(phin) && t * c.dot(xn) + phin <= psi0 + 0.25 * alpha * slope) {
          x = std::move(xn);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        stalled = true;  // progress exhausted at this barrier weight
        break;
      }
      ++total_newton;
      if (callback || trace.is_open()) {
        IterateInfo info;
        info.iteration = total_newton;
        info.outer = outer;
        info.barrier_t = t;
        info.decrement = dec;
        info.objective = c.dot(x);
        auto eigs = ws.block_min_eigs(x);
        info.min_block_eig = eigs.empty() ? 0.0 : *std::min_element(eigs.begin(), eigs.end());
        info.var_norms = ws.var_norms(x);
        if (callback) callback(info);
        if (trace.is_open())
          trace << info.iteration << ',' << info.outer << ',' << format_double(info.barrier_t)
                << ',' << format_double(info.decrement) << ',' << format_double(info.objective)
                << ',' << format_double(info.min_block_eig) << '\n';
      }
    }
    if (stalled) break;
    certified_gap = nu / t;
    if (certified_gap <= options.gap_tol) {
      report.status = SolveStatus::Optimal;
      break;
    }
    t *= options.mu;
  }

  report.objective = c.dot(x);
  report.newton_iterations = total_newton;
  report.outer_iterations = outer;
  report.gap_estimate = certified_gap;
  report.block_min_eigs = ws.block_min_eigs(x);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  if (report.status != SolveStatus::NumericalFailure && certified_gap <= options.gap_tol)
    report.status = SolveStatus::Optimal;
  return {problem.layout.unpack(x), report};
}

}  // namespace ioclqr::sdp
