#pragma once

#include <Eigen/Dense>

namespace resilnet {

/// Euclidean projection of v onto {b >= 0, 1^T b = budget} (sort-based,
/// O(m log m)). budget must be positive.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double budget = 1.0);

}  // namespace resilnet
