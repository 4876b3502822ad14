#include "resilnet/topologies.hpp"

#include <algorithm>

#include "resilnet/errors.hpp"

namespace resilnet {

WeightedGraph uniform_weights(int n, std::vector<NodePair> edges, double budget) {
  const auto m = static_cast<Eigen::Index>(edges.size());
  Eigen::VectorXd b = Eigen::VectorXd::Constant(m, m > 0 ? budget / static_cast<double>(m) : 0.0);
  return WeightedGraph(n, std::move(edges), std::move(b));
}

WeightedGraph complete_graph(int n, double budget) {
  std::vector<NodePair> edges;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) edges.push_back({i, j});
  return uniform_weights(n, std::move(edges), budget);
}

WeightedGraph path_graph(int n, double budget) {
  std::vector<NodePair> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
  return uniform_weights(n, std::move(edges), budget);
}

WeightedGraph star_graph(int n, int center, double budget) {
  if (center < 1 || center > n) throw InputError("star_graph: center out of range");
  std::vector<NodePair> edges;
  for (int v = 1; v <= n; ++v)
    if (v != center) edges.push_back({std::min(v, center), std::max(v, center)});
  return uniform_weights(n, std::move(edges), budget);
}

WeightedGraph random_tree(int n, std::mt19937_64& rng, double budget) {
  std::vector<NodePair> edges;
  for (int v = 2; v <= n; ++v) {
    std::uniform_int_distribution<int> parent(1, v - 1);
    edges.push_back({parent(rng), v});
  }
  return uniform_weights(n, std::move(edges), budget);
}

Eigen::VectorXd random_simplex_weights(int m, std::mt19937_64& rng, double floor, double budget) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  Eigen::VectorXd b(m);
  for (int l = 0; l < m; ++l) b[l] = u(rng);
  return b * (budget / b.sum());
}

WeightedGraph random_connected_graph(int n, double extra_edge_prob, std::mt19937_64& rng,
                                     double budget) {
  const WeightedGraph tree = random_tree(n, rng);
  std::vector<NodePair> edges = tree.edges();
  std::bernoulli_distribution coin(extra_edge_prob);
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (tree.find_edge(i, j)) continue;
      if (coin(rng)) edges.push_back({i, j});
    }
  }
  const int m = static_cast<int>(edges.size());
  return WeightedGraph(n, std::move(edges), random_simplex_weights(m, rng, 0.05, budget));
}

}  // namespace resilnet
