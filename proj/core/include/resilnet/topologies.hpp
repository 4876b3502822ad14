#pragma once

#include <random>
#include <vector>

#include "resilnet/graph.hpp"

namespace resilnet {

/// K_n with edges in lexicographic order (1,2),(1,3),...,(n-1,n) and
/// uniform weights summing to `budget`.
WeightedGraph complete_graph(int n, double budget = 1.0);

/// Path 1-2-...-n, uniform weights summing to `budget`.
WeightedGraph path_graph(int n, double budget = 1.0);

/// Star with center `center` and n-1 leaves, uniform weights summing to
/// `budget`. Edges are ordered by leaf label.
WeightedGraph star_graph(int n, int center = 1, double budget = 1.0);

/// Uniform weights budget/m on a fixed topology.
WeightedGraph uniform_weights(int n, std::vector<NodePair> edges, double budget = 1.0);

/// Random labelled tree (random attachment: node v joins a uniformly
/// chosen earlier node), uniform weights.
WeightedGraph random_tree(int n, std::mt19937_64& rng, double budget = 1.0);

/// Random connected graph: a random tree plus every other pair with
/// probability `extra_edge_prob`. Weights are uniform(0.05, 1) and then
/// rescaled to sum to `budget`.
WeightedGraph random_connected_graph(int n, double extra_edge_prob, std::mt19937_64& rng,
                                     double budget = 1.0);

/// Random weight vector on the simplex scaled to `budget`, entries bounded
/// away from zero by `floor` before normalization.
Eigen::VectorXd random_simplex_weights(int m, std::mt19937_64& rng, double floor = 0.05,
                                       double budget = 1.0);

}  // namespace resilnet
