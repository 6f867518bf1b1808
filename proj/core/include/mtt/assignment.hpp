#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mtt {

struct Assignment {
    /// row -> column, or -1 for an unassigned row
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost assignment of a rectangular cost matrix (Hungarian method
/// with potentials). Exactly min(rows, cols) pairs are assigned.
[[nodiscard]] Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace mtt
