#include "resilnet/sdp.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "resilnet/errors.hpp"

namespace resilnet {

namespace {

/// Coefficient of b_l in entry (p, q) of L(b), 0-based nodes.
std::vector<std::pair<int, double>> laplacian_terms(const std::vector<NodePair>& edges, int p,
                                                    int q) {
  std::vector<std::pair<int, double>> terms;
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const int i = edges[l].i - 1;
    const int j = edges[l].j - 1;
    if (p == q && (i == p || j == p)) terms.emplace_back(static_cast<int>(l), 1.0);
    if (p != q && ((i == p && j == q) || (i == q && j == p))) terms.emplace_back(static_cast<int>(l), -1.0);
  }
  return terms;
}

/// Z(off+p, off+q) - sum_l L_pq,l b_l = rhs
SdpConstraint tie_to_weights(const SdpData& sdp, int off, int p, int q, double rhs) {
  SdpConstraint c;
  c.entries.push_back({off + p, off + q, p == q ? 1.0 : 0.5});
  for (const auto& [l, coef] : laplacian_terms(sdp.edges, p, q)) {
    const int w = sdp.weight_index(l);
    c.entries.push_back({w, w, -coef});
  }
  c.rhs = rhs;
  return c;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SdpData assemble_sdp(const DesignProblem& problem) {
  problem.validate();
  if (problem.perturbed_nodes.empty()) throw InputError("assemble_sdp: perturbed node set is empty");

  SdpData sdp;
  sdp.num_nodes = problem.num_nodes;
  sdp.edges = problem.edges;
  sdp.perturbed_nodes = problem.perturbed_nodes;
  sdp.epsilon = problem.spectral_floor() / problem.budget;
  const int n = sdp.num_nodes;
  const int m = sdp.num_edges();

  int offset = 0;
  for (int k : sdp.perturbed_nodes) {
    sdp.blocks.push_back({SdpBlock::Kind::schur, k, offset, n + 1});
    offset += n + 1;
  }
  sdp.blocks.push_back({SdpBlock::Kind::weights, 0, offset, m});
  offset += m;
  sdp.blocks.push_back({SdpBlock::Kind::floor, 0, offset, n});
  offset += n;
  sdp.dimension = offset;

  sdp.objective.push_back({sdp.slack_index(), sdp.slack_index(), 1.0});

  SdpConstraint budget;
  for (int l = 0; l < m; ++l) budget.entries.push_back({sdp.weight_index(l), sdp.weight_index(l), 1.0});
  budget.rhs = 1.0;
  sdp.constraints.push_back(std::move(budget));

  const double inv_n = 1.0 / n;
  for (std::size_t c = 0; c < sdp.perturbed_nodes.size(); ++c) {
    const SdpBlock& blk = sdp.blocks[c];
    const int k0 = blk.node - 1;
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) sdp.constraints.push_back(tie_to_weights(sdp, blk.offset, p, q, inv_n));
    for (int p = 0; p < n; ++p) {
      SdpConstraint e;
      e.entries.push_back({blk.offset + p, blk.offset + n, 0.5});
      e.rhs = p == k0 ? 1.0 : 0.0;
      sdp.constraints.push_back(std::move(e));
    }
    if (c > 0) {
      SdpConstraint shared;
      shared.entries.push_back({blk.offset + n, blk.offset + n, 1.0});
      shared.entries.push_back({sdp.slack_index(), sdp.slack_index(), -1.0});
      sdp.constraints.push_back(std::move(shared));
    }
  }
  const SdpBlock& fl = sdp.floor_block();
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q)
      sdp.constraints.push_back(tie_to_weights(sdp, fl.offset, p, q, inv_n - (p == q ? sdp.epsilon : 0.0)));
  return sdp;
}

double trace_product(const std::vector<SdpEntry>& m, const Eigen::MatrixXd& z) {
  double acc = 0.0;
  for (const auto& e : m) acc += (e.row == e.col ? 1.0 : 2.0) * e.value * z(e.row, e.col);
  return acc;
}

Eigen::MatrixXd encode_sdp_point(const SdpData& sdp, const Eigen::VectorXd& b, double t) {
  if (b.size() != sdp.num_edges()) throw InputError("encode_sdp_point: weight vector length mismatch");
  const int n = sdp.num_nodes;
  const WeightedGraph g(n, sdp.edges, b);
  const Eigen::MatrixXd Y =
      g.laplacian() + Eigen::MatrixXd::Constant(n, n, 1.0 / n);

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(sdp.dimension, sdp.dimension);
  for (std::size_t c = 0; c < sdp.perturbed_nodes.size(); ++c) {
    const SdpBlock& blk = sdp.blocks[c];
    z.block(blk.offset, blk.offset, n, n) = Y;
    z(blk.offset + blk.node - 1, blk.offset + n) = 1.0;
    z(blk.offset + n, blk.offset + blk.node - 1) = 1.0;
    z(blk.offset + n, blk.offset + n) = t;
  }
  for (int l = 0; l < sdp.num_edges(); ++l) z(sdp.weight_index(l), sdp.weight_index(l)) = b[l];
  const SdpBlock& fl = sdp.floor_block();
  z.block(fl.offset, fl.offset, n, n) = Y - sdp.epsilon * Eigen::MatrixXd::Identity(n, n);
  return z;
}

SdpPoint decode_sdp_point(const SdpData& sdp, const Eigen::MatrixXd& z) {
  if (z.rows() != sdp.dimension || z.cols() != sdp.dimension) {
    throw InputError("decode_sdp_point: matrix dimension does not match the layout");
  }
  SdpPoint p;
  p.b.resize(sdp.num_edges());
  for (int l = 0; l < sdp.num_edges(); ++l) p.b[l] = z(sdp.weight_index(l), sdp.weight_index(l));
  p.t = z(sdp.slack_index(), sdp.slack_index());
  return p;
}

double constraint_residual(const SdpData& sdp, const Eigen::MatrixXd& z) {
  double worst = 0.0;
  for (const auto& c : sdp.constraints) worst = std::max(worst, std::abs(trace_product(c.entries, z) - c.rhs));
  return worst;
}

double min_block_eigenvalue(const SdpData& sdp, const Eigen::MatrixXd& z) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& blk : sdp.blocks) {
    const Eigen::MatrixXd sub = z.block(blk.offset, blk.offset, blk.size, blk.size);
    if (blk.kind == SdpBlock::Kind::weights) {
      lo = std::min(lo, sub.diagonal().minCoeff());
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues()[0]);
  }
  return lo;
}

void write_sdpa(const SdpData& sdp, std::ostream& out) {
  const int n = sdp.num_nodes;
  const int m = sdp.num_edges();
  const auto kcount = static_cast<int>(sdp.perturbed_nodes.size());

  out << "* resilnet edge-weight design, SDPA sparse format\n";
  out << "* max Tr(F0 Y) s.t. Tr(Fi Y) = ci, Y psd; F0 = -W so the optimum is -t\n";
  out << "* nodes " << n << ", edges " << m << ", perturbed " << kcount
      << ", epsilon " << fmt17(sdp.epsilon) << ", dimension d = " << sdp.dimension << "\n";
  out << "* blocks 1.." << kcount << ": S_k = [[L(b) + 11^T/n, e_k], [e_k^T, t]], size " << n + 1
      << ", for k in";
  for (int k : sdp.perturbed_nodes) out << ' ' << k;
  out << "\n* block " << kcount + 1 << ": diag(b_1..b_m), size " << m << " (diagonal)\n";
  out << "* block " << kcount + 2 << ": E = L(b) + 11^T/n - epsilon I, size " << n << "\n";
  out << "* edges (l: i j):";
  for (int l = 0; l < m; ++l) out << ' ' << l + 1 << ':' << sdp.edges[static_cast<std::size_t>(l)].i << ' '
                                  << sdp.edges[static_cast<std::size_t>(l)].j;
  out << "\n* constraint 1: sum_l b_l = 1\n";
  out << "* per S_k: entry (p,q), p<=q<=n, minus the Laplacian in b equals 1/n;"
         " entry (p,n+1) equals [p == k]; corner t_k - t_1 = 0 for k after the first\n";
  out << "* E: entry (p,q) minus the Laplacian in b equals 1/n - epsilon [p == q]\n";
  out << "* entry lines: constraint block row col value (constraint 0 is F0)\n";

  out << sdp.constraints.size() << '\n' << kcount + 2 << '\n';
  for (int c = 0; c < kcount; ++c) out << n + 1 << ' ';
  out << -m << ' ' << n << '\n';
  for (std::size_t i = 0; i < sdp.constraints.size(); ++i) {
    if (i) out << ' ';
    out << fmt17(sdp.constraints[i].rhs);
  }
  out << '\n';

  // Global index -> (block, local index), 1-based for SDPA.
  auto locate = [&](int global) {
    for (std::size_t bi = 0; bi < sdp.blocks.size(); ++bi) {
      const SdpBlock& blk = sdp.blocks[bi];
      if (global >= blk.offset && global < blk.offset + blk.size) {
        return std::pair{static_cast<int>(bi) + 1, global - blk.offset + 1};
      }
    }
    throw Error("write_sdpa: index outside the layout");
  };
  auto emit = [&](std::size_t matno, const SdpEntry& e, double scale) {
    const auto [blk, r] = locate(e.row);
    const auto [blk2, c] = locate(e.col);
    if (blk != blk2) throw Error("write_sdpa: entry crosses blocks");
    out << matno << ' ' << blk << ' ' << r << ' ' << c << ' ' << fmt17(scale * e.value) << '\n';
  };
  for (const auto& e : sdp.objective) emit(0, e, -1.0);
  for (std::size_t i = 0; i < sdp.constraints.size(); ++i)
    for (const auto& e : sdp.constraints[i].entries) emit(i + 1, e, 1.0);
}

void write_sdpa(const SdpData& sdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_sdpa(sdp, out);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace resilnet
