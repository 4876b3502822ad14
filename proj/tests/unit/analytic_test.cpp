#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "resilnet/analytic.hpp"
#include "resilnet/errors.hpp"
#include "resilnet/topologies.hpp"
#include "resilnet/vulnerability.hpp"

using namespace resilnet;

namespace {

// Edge indices on the unique tree path between a and b (depth-first search).
std::vector<int> tree_path(const WeightedGraph& t, int a, int b) {
  std::vector<int> path;
  std::vector<bool> seen(static_cast<std::size_t>(t.num_nodes() + 1), false);
  auto dfs = [&](auto&& self, int u) -> bool {
    if (u == b) return true;
    seen[static_cast<std::size_t>(u)] = true;
    for (int l = 0; l < t.num_edges(); ++l) {
      const auto& e = t.edge(l);
      const int v = e.i == u ? e.j : e.j == u ? e.i : 0;
      if (v == 0 || seen[static_cast<std::size_t>(v)]) continue;
      path.push_back(l);
      if (self(self, v)) return true;
      path.pop_back();
    }
    return false;
  };
  dfs(dfs, a);
  return path;
}

// Strictly positive points of the simplex grid with the given number of
// steps, m <= 3.
std::vector<Eigen::VectorXd> interior_grid(int m, int steps) {
  std::vector<Eigen::VectorXd> out;
  const double h = 1.0 / steps;
  if (m == 1) out.push_back(Eigen::VectorXd::Ones(1));
  if (m == 2)
    for (int a = 1; a < steps; ++a) out.push_back(Eigen::Vector2d(a * h, (steps - a) * h));
  if (m == 3)
    for (int a = 1; a < steps; ++a)
      for (int c = 1; a + c < steps; ++c) out.push_back(Eigen::Vector3d(a * h, c * h, (steps - a - c) * h));
  return out;
}

}  // namespace

TEST(CompleteGraphOptimum, StarOnK) {
  const Eigen::VectorXd b = complete_graph_optimum(5, 1);
  const WeightedGraph k5 = complete_graph(5);
  for (int l = 0; l < k5.num_edges(); ++l)
    EXPECT_DOUBLE_EQ(b[l], k5.edge(l).i == 1 ? 0.25 : 0.0);
  EXPECT_NEAR(vulnerability_measure(k5.with_weights(b), 1), 0.64, 1e-12);
  EXPECT_DOUBLE_EQ(complete_graph_optimum(2, 2)[0], 1.0);
  EXPECT_THROW(complete_graph_optimum(5, 6), InputError);
  EXPECT_THROW(complete_graph_optimum(1, 1), InputError);
}

TEST(CompleteGraphOptimum, ClosedFormAndBeatsRandomPoints) {
  std::mt19937_64 rng(21);
  for (int n = 3; n <= 6; ++n) {
    const WeightedGraph kn = complete_graph(n);
    for (int k = 1; k <= n; ++k) {
      const double best = vulnerability_measure(kn.with_weights(complete_graph_optimum(n, k)), k);
      EXPECT_NEAR(best, std::pow((n - 1.0) / n, 2), 1e-10);
    }
    const double best = std::pow((n - 1.0) / n, 2);
    for (int t = 0; t < 1000; ++t) {
      const Eigen::VectorXd b = random_simplex_weights(kn.num_edges(), rng, 0.0);
      EXPECT_GE(vulnerability_measure(kn.with_weights(b), 1), best - 1e-12);
    }
  }
}

TEST(PathUsage, ReferenceExamples) {
  const PathUsageCounts p1 = path_usage_counts(path_graph(3), 1);
  EXPECT_EQ(p1.pairs, (std::vector<long>{2, 2}));
  EXPECT_EQ(p1.from_node, (std::vector<long>{2, 1}));
  EXPECT_EQ(path_usage_counts(path_graph(3), 2).from_node, (std::vector<long>{1, 1}));
  const PathUsageCounts s = path_usage_counts(star_graph(5, 1), 1);
  EXPECT_EQ(s.pairs, (std::vector<long>(4, 4)));
  EXPECT_EQ(s.from_node, (std::vector<long>(4, 1)));
}

TEST(PathUsage, MatchesExhaustivePathEnumeration) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 60; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 9)(rng);
    const WeightedGraph tree = random_tree(n, rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    std::vector<long> pairs(static_cast<std::size_t>(n - 1), 0), from_k(pairs);
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        for (int l : tree_path(tree, i, j)) ++pairs[static_cast<std::size_t>(l)];
    for (int j = 1; j <= n; ++j)
      if (j != k)
        for (int l : tree_path(tree, k, j)) ++from_k[static_cast<std::size_t>(l)];
    const PathUsageCounts c = path_usage_counts(tree, k);
    EXPECT_EQ(c.pairs, pairs);
    EXPECT_EQ(c.from_node, from_k);
    for (std::size_t l = 0; l < pairs.size(); ++l) {
      EXPECT_GE(c.from_node[l], 1);
      EXPECT_LE(c.from_node[l], c.pairs[l]);
    }
  }
}

TEST(PathUsage, RejectsNonTrees) {
  EXPECT_THROW(path_usage_counts(complete_graph(3), 1), InputError);
  const WeightedGraph tree(4, {{1, 2}, {3, 4}, {1, 3}}, Eigen::Vector3d(1, 1, 1));
  EXPECT_NO_THROW(path_usage_counts(tree, 1));
  const WeightedGraph split(4, {{1, 2}, {3, 4}}, Eigen::Vector2d(1, 1));
  EXPECT_THROW(path_usage_counts(split, 1), InputError);
  EXPECT_THROW(path_usage_counts(path_graph(3), 4), InputError);
}

TEST(TreeOptimum, ReferenceExamples) {
  const Eigen::VectorXd p1 = tree_optimum(path_graph(3), 1);
  EXPECT_NEAR(p1[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p1[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(vulnerability_measure(path_graph(3).with_weights(p1), 1), 1.0, 1e-13);
  const Eigen::VectorXd p2 = tree_optimum(path_graph(3), 2);
  EXPECT_NEAR(p2[0], 0.5, 1e-15);
  const Eigen::VectorXd s = tree_optimum(star_graph(5, 1), 1);
  EXPECT_LT((s.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(TreeOptimum, MatchesGridOnSmallTrees) {
  // Every tree on up to four nodes: P2, P3, P4, S3.
  const std::vector<WeightedGraph> trees = {path_graph(2), path_graph(3), path_graph(4), star_graph(4, 1)};
  const int steps = 50;
  for (const auto& tree : trees) {
    const int m = tree.num_edges();
    for (int k = 1; k <= tree.num_nodes(); ++k) {
      const WeightedGraph opt = tree.with_weights(tree_optimum(tree, k));
      const double closed = vulnerability_measure(opt, k);
      double grid = std::numeric_limits<double>::infinity();
      for (const Eigen::VectorXd& b : interior_grid(m, steps))
        grid = std::min(grid, vulnerability_measure(tree.with_weights(b), k));
      EXPECT_LE(closed, grid + 1e-12);
      const Eigen::VectorXd grad = vulnerability_gradient(opt, k);
      EXPECT_LE(grid - closed, m * grad.cwiseAbs().maxCoeff() / steps);
    }
  }
}

TEST(Certificate, ReferenceExamples) {
  const WeightedGraph k5 = complete_graph(5);
  EXPECT_TRUE(optimality_certificate(k5.with_weights(complete_graph_optimum(5, 1)), 1).optimal);
  const CertificateResult star3 = optimality_certificate(k5.with_weights(complete_graph_optimum(5, 3)), 3);
  EXPECT_TRUE(star3.optimal);
  EXPECT_GE(star3.min_residual, -1e-12);
  const CertificateResult uniform = optimality_certificate(k5, 1);
  EXPECT_FALSE(uniform.optimal);
  EXPECT_LT(uniform.min_residual, 0.0);
  const WeightedGraph p3 = path_graph(3);
  const CertificateResult tree = optimality_certificate(p3.with_weights(tree_optimum(p3, 1)), 1);
  EXPECT_TRUE(tree.optimal);
  EXPECT_LT(tree.residuals.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Certificate, DiscriminatesPerturbedTreeOptima) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(3, 10)(rng);
    const WeightedGraph tree = random_tree(n, rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const Eigen::VectorXd b = tree_optimum(tree, k);
    EXPECT_TRUE(optimality_certificate(tree.with_weights(b), k).optimal);
    Eigen::VectorXd p = b.array() * (1.0 + Eigen::ArrayXd::NullaryExpr(b.size(), [&] { return noise(rng); }));
    p /= p.sum();
    EXPECT_FALSE(optimality_certificate(tree.with_weights(p), k).optimal);
  }
}

TEST(Certificate, Errors) {
  EXPECT_THROW(optimality_certificate(complete_graph(4, 2.0), 1), InputError);
  const WeightedGraph split(4, {{1, 2}, {3, 4}}, Eigen::Vector2d(0.5, 0.5));
  EXPECT_THROW(optimality_certificate(split, 1), DisconnectedError);
}
