#pragma once

#include <vector>

#include <Eigen/Dense>

#include "resilnet/graph.hpp"

namespace resilnet {

/// Path usage of each tree edge. For edge l splitting the tree into parts
/// of sizes s and n - s:
///   pairs[l]     = number of node pairs whose path uses l = s (n - s)
///   from_node[l] = number of nodes j whose path from k uses l
///                = size of the part not containing k.
struct PathUsageCounts {
  std::vector<long> pairs;
  std::vector<long> from_node;
};

/// Verdict of the sufficient optimality condition
///   dM_k/db_l + M_k(b) >= 0 for every edge l
/// for the single-node problem on the unit simplex. A pass proves b is a
/// minimizer; a failure does not prove the opposite.
struct CertificateResult {
  Eigen::VectorXd residuals;
  double min_residual = 0.0;
  bool optimal = false;
};

inline constexpr double kDefaultCertificateTol = 1e-8;

/// Weights for K_n (edge order of complete_graph()): 1/(n-1) on every edge
/// incident to k, zero elsewhere. Resulting M_k = ((n-1)/n)^2.
Eigen::VectorXd complete_graph_optimum(int n, int k);

/// Throws InputError unless the topology is a spanning tree.
PathUsageCounts path_usage_counts(const WeightedGraph& tree, int k);

/// Tree optimum b_l = sqrt(n a^k_l - a_l) / sum_s sqrt(n a^k_s - a_s).
Eigen::VectorXd tree_optimum(const WeightedGraph& tree, int k);

/// Requires a connected graph with unit total weight.
CertificateResult optimality_certificate(const WeightedGraph& g, int k,
                                         double tol = kDefaultCertificateTol);

}  // namespace resilnet
