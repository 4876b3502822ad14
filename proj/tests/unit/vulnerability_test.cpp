#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "resilnet/errors.hpp"
#include "resilnet/topologies.hpp"
#include "resilnet/vulnerability.hpp"

using namespace resilnet;

TEST(Measure, IsPseudoinverseDiagonal) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const WeightedGraph g = random_connected_graph(n, 0.3, rng);
    const Eigen::MatrixXd ref = oracle::pinv(g);
    const SpectralBundle s = spectral_bundle(g);
    for (int k = 1; k <= n; ++k) {
      EXPECT_NEAR(vulnerability_measure(s, k), ref(k - 1, k - 1), 1e-9 * ref(k - 1, k - 1));
      EXPECT_NEAR(vulnerability_measure_from_resistances(s, k), vulnerability_measure(s, k),
                  1e-9 * ref(k - 1, k - 1));
    }
  }
}

TEST(Measure, ClosedForms) {
  EXPECT_NEAR(vulnerability_measure(complete_graph(5), 3), 1.6, 1e-13);
  EXPECT_NEAR(vulnerability_measure(path_graph(2), 1), 0.25, 1e-14);
  const WeightedGraph p3 = path_graph(3);
  EXPECT_NEAR(vulnerability_measure(p3, 1), 10.0 / 9.0, 1e-13);
  EXPECT_NEAR(vulnerability_measure(p3, 2), 4.0 / 9.0, 1e-13);
}

TEST(Measure, Errors) {
  const WeightedGraph split(4, {{1, 2}, {3, 4}}, Eigen::Vector2d(0.5, 0.5));
  EXPECT_THROW(vulnerability_measure(split, 1), DisconnectedError);
  EXPECT_THROW(vulnerability_gradient(split, 1), DisconnectedError);
  EXPECT_THROW(vulnerability_measure(path_graph(3), 4), InputError);
  EXPECT_THROW(vulnerability_measure(path_graph(3), 0), InputError);
}

TEST(Measure, Homogeneity) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const WeightedGraph g = random_connected_graph(8, 0.3, rng);
    for (double c : {0.5, 2.0, 10.0}) {
      const WeightedGraph gc = g.with_weights(c * g.weights());
      for (int k = 1; k <= 8; ++k)
        EXPECT_NEAR(c * vulnerability_measure(gc, k), vulnerability_measure(g, k), 1e-10);
    }
  }
}

TEST(Measure, ConvexAlongSegments) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const WeightedGraph g1 = random_connected_graph(7, 0.3, rng);
    const WeightedGraph g2 = g1.with_weights(random_simplex_weights(g1.num_edges(), rng));
    const double sig = unit(rng);
    const WeightedGraph mix = g1.with_weights(sig * g1.weights() + (1 - sig) * g2.weights());
    for (int k = 1; k <= 7; ++k) {
      EXPECT_LE(vulnerability_measure(mix, k),
                sig * vulnerability_measure(g1, k) + (1 - sig) * vulnerability_measure(g2, k) + 1e-9);
    }
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 40; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 10)(rng);
    const WeightedGraph g = random_connected_graph(n, 0.3, rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const Eigen::VectorXd grad = vulnerability_gradient(g, k);
    EXPECT_LE(grad.maxCoeff(), 0.0);
    for (int l = 0; l < g.num_edges(); ++l) {
      const double h = 1e-5 * g.weights()[l];
      Eigen::VectorXd up = g.weights(), down = g.weights();
      up[l] += h;
      down[l] -= h;
      const double fd =
          (vulnerability_measure(g.with_weights(up), k) - vulnerability_measure(g.with_weights(down), k)) / (2 * h);
      EXPECT_NEAR(grad[l], fd, 1e-6 * grad.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Gradient, EulerIdentity) {
  // Degree -1 homogeneity: b . grad M = -M.
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const WeightedGraph g = random_connected_graph(9, 0.3, rng, 4.0);
    for (int k = 1; k <= 9; ++k) {
      const double m = vulnerability_measure(g, k);
      EXPECT_NEAR(g.weights().dot(vulnerability_gradient(g, k)), -m, 1e-10 * m);
    }
  }
}

TEST(LowerBound, ReferenceValues) {
  EXPECT_NEAR(lower_bound(complete_graph(5)), 1.28, 1e-12);
  EXPECT_NEAR(lower_bound(path_graph(2)), 0.125, 1e-14);
  EXPECT_NEAR(lower_bound(path_graph(3)), 8.0 / 9.0, 1e-12);
  const WeightedGraph split(4, {{1, 2}, {3, 4}}, Eigen::Vector2d(0.5, 0.5));
  EXPECT_THROW(lower_bound(split), DisconnectedError);
}

TEST(LowerBound, HoldsOnCompleteGraphsButNotEveryNode) {
  for (int n = 2; n <= 8; ++n) {
    const WeightedGraph g = complete_graph(n);
    EXPECT_LE(lower_bound(g), vulnerability_measure(g, 1) + 1e-12);
  }
  // The path centre sits below the spectral bound: 4/9 < 8/9.
  EXPECT_LT(vulnerability_measure(path_graph(3), 2), lower_bound(path_graph(3)));
}

TEST(LowerBound, DegreeBoundHolds) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 200; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const WeightedGraph g = random_connected_graph(n, 0.3, rng);
    const SpectralBundle s = spectral_bundle(g);
    const double r = 1.0 - 1.0 / n;
    for (int k = 1; k <= n; ++k)
      EXPECT_GE(vulnerability_measure(s, k), r * r / s.laplacian(k - 1, k - 1) - 1e-12);
  }
}

TEST(WorstCase, TieBreakAndOrdering) {
  std::vector<int> all{5, 4, 3, 2, 1};
  const WorstCase k5 = worst_case(complete_graph(5), all);
  EXPECT_EQ(k5.node, 1);
  EXPECT_NEAR(k5.measure, 1.6, 1e-12);
  std::vector<int> pair{2, 1};
  EXPECT_EQ(worst_case(path_graph(3), pair).node, 1);
  std::vector<int> one{2};
  EXPECT_NEAR(worst_case(path_graph(3), one).measure, 4.0 / 9.0, 1e-12);
  EXPECT_THROW(worst_case(path_graph(3), std::vector<int>{}), InputError);
}

TEST(CommuteDecomposition, ReferenceValues) {
  const auto p3 = commute_decomposition(path_graph(3), 2);
  EXPECT_NEAR(p3.sum_from_k, 8.0, 1e-12);
  EXPECT_NEAR(p3.sum_pairs_excl_k, 8.0, 1e-12);
  const auto k2 = commute_decomposition(path_graph(2), 1);
  EXPECT_NEAR(k2.sum_from_k, 2.0, 1e-12);
  EXPECT_EQ(k2.sum_pairs_excl_k, 0.0);
}

TEST(CommuteDecomposition, IdentityOnRandomGraphs) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const WeightedGraph g = random_connected_graph(n, 0.3, rng);
    for (int k = 1; k <= n; ++k) {
      const auto d = commute_decomposition(g, k);
      EXPECT_NEAR((n - 1) * d.sum_from_k - d.sum_pairs_excl_k, 2.0 * n * n * vulnerability_measure(g, k), 1e-8);
    }
  }
}

TEST(Report, BundlesMeasureGradientAndBound) {
  const WeightedGraph g = complete_graph(4);
  const VulnerabilityReport r = vulnerability_report(g, 2);
  EXPECT_EQ(r.node, 2);
  EXPECT_DOUBLE_EQ(r.measure, vulnerability_measure(g, 2));
  EXPECT_EQ(r.gradient.size(), 6);
  EXPECT_DOUBLE_EQ(r.lower_bound, lower_bound(g));
}
