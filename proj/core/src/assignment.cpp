#include "ioclqr/assignment.hpp"

#include <cmath>
#include <limits>

namespace ioclqr {

std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n == 0) throw ValidationError("cost matrix must be square");
  if (!cost.allFinite()) throw ValidationError("cost matrix must be finite");

  const double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays with a virtual row/column 0, the classical potentials form.
  std::vector<double> u(static_cast<size_t>(n + 1), 0.0);
  std::vector<double> v(static_cast<size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<size_t>(n + 1), 0);  // match[col] = row
  std::vector<int> way(static_cast<size_t>(n + 1), 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n + 1), kInf);
    std::vector<char> used(static_cast<size_t>(n + 1), 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = match[static_cast<size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assignment(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    assignment[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;
  return assignment;
}

bool assignment_is_ambiguous(const Matrix& cost, const std::vector<int>& assignment,
                             double tol) {
  const int n = static_cast<int>(cost.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int ai = assignment[static_cast<size_t>(i)];
      int aj = assignment[static_cast<size_t>(j)];
      double current = cost(i, ai) + cost(j, aj);
      double swapped = cost(i, aj) + cost(j, ai);
      if (std::abs(current - swapped) <= tol) return true;
    }
  }
  return false;
}

}  // namespace ioclqr
