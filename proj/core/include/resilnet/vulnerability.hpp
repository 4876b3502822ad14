#pragma once

#include <span>

#include <Eigen/Dense>

#include "resilnet/graph.hpp"

namespace resilnet {

/// Small-angle vulnerability of node k together with its edge-weight
/// gradient and the spectral lower bound.
///
/// Measures are in units normalized by the noise constant, so only
/// comparisons between designs are meaningful.
struct VulnerabilityReport {
  int node = 0;
  double measure = 0.0;
  Eigen::VectorXd gradient;
  double lower_bound = 0.0;
};

/// M_k(b) = L+_kk = e_k^T (L + 11^T/n)^-1 e_k - 1/n. Requires a connected
/// graph (DisconnectedError otherwise).
double vulnerability_measure(const WeightedGraph& g, int k);
double vulnerability_measure(const SpectralBundle& s, int k);

/// Same quantity through the resistance sums
/// n^-1 sum_j Omega_jk - n^-2 sum_{i<j} Omega_ij.
double vulnerability_measure_from_resistances(const SpectralBundle& s, int k);

/// dM_k/db_l = -(u_i - u_j)^2 for edge l = (i, j), u = (L + 11^T/n)^-1 e_k.
Eigen::VectorXd vulnerability_gradient(const WeightedGraph& g, int k);
Eigen::VectorXd vulnerability_gradient(const WeightedGraph& g, const SpectralBundle& s, int k);

VulnerabilityReport vulnerability_report(const WeightedGraph& g, int k);

struct WorstCase {
  int node = 0;
  double measure = 0.0;
};

/// Node of `nodes` with the largest measure; ties go to the smallest label.
WorstCase worst_case(const WeightedGraph& g, std::span<const int> nodes);
WorstCase worst_case(const SpectralBundle& s, std::span<const int> nodes);

/// (1/lambda2) (1 - 1/n)^2, a lower bound on every node's measure. The
/// bound is invariant under rescaling b, so it holds for any budget.
double lower_bound(const WeightedGraph& g);
double lower_bound(const SpectralBundle& s);

/// Commute-time split of node k's measure:
///   (n-1) * sum_from_k - sum_pairs_excl_k = 2 n^2 (1^T b) M_k.
struct CommuteDecomposition {
  /// sum_j C_jk
  double sum_from_k = 0.0;
  /// sum over pairs i<j with i, j != k of C_ij
  double sum_pairs_excl_k = 0.0;
};

CommuteDecomposition commute_decomposition(const WeightedGraph& g, int k);

}  // namespace resilnet
