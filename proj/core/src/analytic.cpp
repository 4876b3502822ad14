#include "resilnet/analytic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "resilnet/errors.hpp"
#include "resilnet/topologies.hpp"
#include "resilnet/vulnerability.hpp"

namespace resilnet {

Eigen::VectorXd complete_graph_optimum(int n, int k) {
  if (n < 2) throw InputError("complete_graph_optimum: need n >= 2");
  if (k < 1 || k > n) throw InputError("complete_graph_optimum: node " + std::to_string(k) +
                                       " outside 1.." + std::to_string(n));
  const WeightedGraph kn = complete_graph(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(kn.num_edges());
  for (int l = 0; l < kn.num_edges(); ++l) {
    const auto& e = kn.edge(l);
    if (e.i == k || e.j == k) b[l] = 1.0 / (n - 1);
  }
  return b;
}

PathUsageCounts path_usage_counts(const WeightedGraph& tree, int k) {
  const int n = tree.num_nodes();
  if (k < 1 || k > n) throw InputError("path_usage_counts: node out of range");
  if (tree.num_edges() != n - 1 ||
      !is_connected_by_traversal(tree, -std::numeric_limits<double>::infinity())) {
    throw InputError("path_usage_counts: topology is not a spanning tree");
  }

  // Root at k. `order` lists parents before children, so a reverse sweep
  // accumulates subtree sizes.
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
  for (int l = 0; l < tree.num_edges(); ++l) {
    const auto& e = tree.edge(l);
    adj[static_cast<std::size_t>(e.i - 1)].push_back({e.j - 1, l});
    adj[static_cast<std::size_t>(e.j - 1)].push_back({e.i - 1, l});
  }
  std::vector<int> parent_edge(static_cast<std::size_t>(n), -1);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<int> order;
  std::vector<int> stack{k - 1};
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  seen[static_cast<std::size_t>(k - 1)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    order.push_back(u);
    for (auto [v, l] : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = true;
      parent[static_cast<std::size_t>(v)] = u;
      parent_edge[static_cast<std::size_t>(v)] = l;
      stack.push_back(v);
    }
  }

  std::vector<long> subtree(static_cast<std::size_t>(n), 1);
  PathUsageCounts counts;
  counts.pairs.assign(static_cast<std::size_t>(tree.num_edges()), 0);
  counts.from_node.assign(static_cast<std::size_t>(tree.num_edges()), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    const int l = parent_edge[static_cast<std::size_t>(v)];
    if (l < 0) continue;
    const long s = subtree[static_cast<std::size_t>(v)];
    counts.from_node[static_cast<std::size_t>(l)] = s;
    counts.pairs[static_cast<std::size_t>(l)] = s * (n - s);
    subtree[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] += s;
  }
  return counts;
}

Eigen::VectorXd tree_optimum(const WeightedGraph& tree, int k) {
  const PathUsageCounts c = path_usage_counts(tree, k);
  const long n = tree.num_nodes();
  Eigen::VectorXd b(tree.num_edges());
  for (int l = 0; l < tree.num_edges(); ++l) {
    const long coeff = n * c.from_node[static_cast<std::size_t>(l)] - c.pairs[static_cast<std::size_t>(l)];
    b[l] = std::sqrt(static_cast<double>(coeff));
  }
  return b / b.sum();
}

CertificateResult optimality_certificate(const WeightedGraph& g, int k, double tol) {
  if (std::abs(g.total_weight() - 1.0) > 1e-9) {
    throw InputError("optimality_certificate: weights must sum to 1");
  }
  const SpectralBundle s = spectral_bundle(g);
  const double m = vulnerability_measure(s, k);
  CertificateResult r;
  r.residuals = vulnerability_gradient(g, s, k).array() + m;
  r.min_residual = r.residuals.size() > 0 ? r.residuals.minCoeff() : 0.0;
  r.optimal = r.min_residual >= -tol;
  return r;
}

}  // namespace resilnet
