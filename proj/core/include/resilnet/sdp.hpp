#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilnet/graph.hpp"
#include "resilnet/optimizer.hpp"

namespace resilnet {

/// One nonzero of a symmetric matrix on the global index space, stored in
/// the upper triangle (row <= col, 0-based). An off-diagonal entry stands
/// for both (row, col) and (col, row).
struct SdpEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Tr(A Z) = rhs.
struct SdpConstraint {
  std::vector<SdpEntry> entries;
  double rhs = 0.0;
};

struct SdpBlock {
  enum class Kind { schur, weights, floor };
  Kind kind = Kind::schur;
  /// Perturbed node for schur blocks (1-based), 0 otherwise.
  int node = 0;
  int offset = 0;  // 0-based start on the global diagonal
  int size = 0;
};

/// Standard form  min Tr(W Z)  s.t.  Tr(A_i Z) = c_i,  Z psd, with
///   Z = diag(S_1, ..., S_|V'|, b_1, ..., b_m, E),
///   S_k = [[L(b) + 11^T/n, e_k], [e_k^T, t]],  E = L(b) + 11^T/n - eps I.
/// constraints[0] is the budget row Tr(A Z) = 1; the rest tie every entry
/// of every S_k and of E to the b blocks and the shared t.
struct SdpData {
  int num_nodes = 0;
  std::vector<NodePair> edges;
  std::vector<int> perturbed_nodes;
  /// Floor relative to the unit budget.
  double epsilon = 0.0;
  int dimension = 0;
  std::vector<SdpBlock> blocks;  // schur blocks, then weights (m scalars), then floor
  std::vector<SdpEntry> objective;
  std::vector<SdpConstraint> constraints;

  int num_edges() const { return static_cast<int>(edges.size()); }
  const SdpBlock& schur_block(std::size_t c) const { return blocks[c]; }
  const SdpBlock& weight_block() const { return blocks[blocks.size() - 2]; }
  const SdpBlock& floor_block() const { return blocks.back(); }
  /// Global 0-based index of the scalar block holding b_l.
  int weight_index(int l) const { return weight_block().offset + l; }
  /// Global 0-based index of t (corner of S_1).
  int slack_index() const { return blocks.front().offset + num_nodes; }
};

/// Builds the standard form for problem (budget normalized to 1, floor
/// eps / budget).
SdpData assemble_sdp(const DesignProblem& problem);

/// Tr(M Z) for a symmetric M given by its upper-triangle entries.
double trace_product(const std::vector<SdpEntry>& m, const Eigen::MatrixXd& z);

/// Z for a point (b, t); b on the unit simplex.
Eigen::MatrixXd encode_sdp_point(const SdpData& sdp, const Eigen::VectorXd& b, double t);

struct SdpPoint {
  Eigen::VectorXd b;
  double t = 0.0;
};

SdpPoint decode_sdp_point(const SdpData& sdp, const Eigen::MatrixXd& z);

/// max_i |Tr(A_i Z) - c_i|.
double constraint_residual(const SdpData& sdp, const Eigen::MatrixXd& z);

/// Smallest eigenvalue over the diagonal blocks of Z.
double min_block_eigenvalue(const SdpData& sdp, const Eigen::MatrixXd& z);

/// Writes the SDPA sparse format. SDPA's dual form max Tr(F0 Y) s.t.
/// Tr(F_i Y) = c_i, Y psd is used with F0 = -W, F_i = A_i. The weight
/// scalars form one diagonal block, so SDPA sees |V'| + 2 blocks.
void write_sdpa(const SdpData& sdp, std::ostream& out);
void write_sdpa(const SdpData& sdp, const std::string& path);

}  // namespace resilnet
