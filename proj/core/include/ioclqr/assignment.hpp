#pragma once

#include <vector>

#include "ioclqr/types.hpp"

namespace ioclqr {

/// Exact minimum-cost bipartite assignment (Jonker-Volgenant shortest
/// augmenting paths, O(M^3)). Returns a[r] = column assigned to row r.
std::vector<int> min_cost_assignment(const Matrix& cost);

/// True when the optimal assignment is not unique up to `tol`: some pair
/// swap leaves the total cost unchanged.
bool assignment_is_ambiguous(const Matrix& cost, const std::vector<int>& assignment,
                             double tol);

}  // namespace ioclqr
