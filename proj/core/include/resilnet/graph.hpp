#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace resilnet {

/// Unordered node pair with 1-based labels, stored with i < j.
struct NodePair {
  int i = 0;
  int j = 0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

/// Undirected graph on nodes 1..n with a nonnegative weight per edge.
///
/// Node labels are 1-based everywhere in the public API. Edges keep the
/// order they were given in; that order defines the edge index
/// l = 0..m-1 used by weight vectors, gradients, path counts and the SDP
/// layout. Instances are immutable.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Validates and builds the graph. Pairs may be given in either
  /// orientation; they are stored with i < j. Throws InputError naming
  /// the offending edge index on self-loops, duplicates, out-of-range
  /// labels, negative or non-finite weights, or a length mismatch.
  WeightedGraph(int n, std::vector<NodePair> edges, Eigen::VectorXd weights);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<NodePair>& edges() const { return edges_; }
  const NodePair& edge(int l) const { return edges_[static_cast<std::size_t>(l)]; }
  const Eigen::VectorXd& weights() const { return b_; }
  double total_weight() const { return b_.sum(); }

  /// Same topology, new weight vector (validated).
  WeightedGraph with_weights(Eigen::VectorXd weights) const;

  /// Index of edge {i, j}, if present.
  std::optional<int> find_edge(int i, int j) const;

  /// Weighted Laplacian L(b).
  Eigen::MatrixXd laplacian() const;

  /// Weighted adjacency matrix B.
  Eigen::MatrixXd adjacency() const;

 private:
  int n_ = 0;
  std::vector<NodePair> edges_;
  Eigen::VectorXd b_;
};

/// Spectral data of one graph, computed once and shared read-only.
struct SpectralBundle {
  Eigen::MatrixXd laplacian;
  /// (L + 11^T/n)^-1; empty when the graph is disconnected.
  Eigen::MatrixXd reg_inverse;
  /// Moore-Penrose pseudoinverse L^+.
  Eigen::MatrixXd pseudoinverse;
  /// Laplacian eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues;
  /// Orthonormal eigenvectors, column a pairs with eigenvalues(a).
  Eigen::MatrixXd eigenvectors;
  bool connected = false;
  double total_weight = 0.0;

  int num_nodes() const { return static_cast<int>(laplacian.rows()); }

  /// Second-smallest eigenvalue, or 0 when it falls below the relative
  /// zero threshold.
  double lambda2() const;
};

/// Relative threshold below which Laplacian eigenvalues count as zero.
inline constexpr double kZeroEigenvalueRelTol = 1e-9;

/// Builds L, its eigen-decomposition, and L^+. For connected graphs L^+ is
/// (L + 11^T/n)^-1 - 11^T/n; for disconnected graphs the truncated
/// eigen-inverse is used and reg_inverse stays empty.
SpectralBundle spectral_bundle(const WeightedGraph& g);

/// L^+ through truncated eigen-inversion. Kept as an independent route
/// for cross-checks.
Eigen::MatrixXd pseudoinverse_by_eigen(const SpectralBundle& s);

double algebraic_connectivity(const WeightedGraph& g);

/// True iff lambda2 > tol.
bool is_connected(const WeightedGraph& g, double tol);

/// Connectivity of the subgraph made of edges with weight > tol, by
/// breadth-first traversal.
bool is_connected_by_traversal(const WeightedGraph& g, double tol);

/// Omega_ij = L+_ii + L+_jj - 2 L+_ij. Throws DisconnectedError.
double effective_resistance(const WeightedGraph& g, int i, int j);
double effective_resistance(const SpectralBundle& s, int i, int j);

/// All pairwise effective resistances (n x n, zero diagonal).
Eigen::MatrixXd resistance_matrix(const SpectralBundle& s);

/// Expected commute time 2 (1^T b) Omega_ij of the weight-proportional
/// random walk.
double commute_time(const WeightedGraph& g, int i, int j);
double commute_time(const SpectralBundle& s, int i, int j);

/// Random-walk transition matrix P = D^-1 B. Throws InputError when a
/// node has zero weighted degree.
Eigen::MatrixXd transition_matrix(const WeightedGraph& g);

}  // namespace resilnet
