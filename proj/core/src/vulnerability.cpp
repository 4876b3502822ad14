#include "resilnet/vulnerability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resilnet/errors.hpp"

namespace resilnet {

namespace {

void check_node(const SpectralBundle& s, int k) {
  if (k < 1 || k > s.num_nodes()) {
    throw InputError("node " + std::to_string(k) + " outside 1.." + std::to_string(s.num_nodes()));
  }
}

void check_connected(const SpectralBundle& s) {
  if (!s.connected) throw DisconnectedError("vulnerability is undefined on a disconnected graph");
}

}  // namespace

double vulnerability_measure(const SpectralBundle& s, int k) {
  check_node(s, k);
  check_connected(s);
  return s.reg_inverse(k - 1, k - 1) - 1.0 / s.num_nodes();
}

double vulnerability_measure(const WeightedGraph& g, int k) {
  return vulnerability_measure(spectral_bundle(g), k);
}

double vulnerability_measure_from_resistances(const SpectralBundle& s, int k) {
  check_node(s, k);
  const Eigen::MatrixXd R = resistance_matrix(s);
  const double n = s.num_nodes();
  const double from_k = R.col(k - 1).sum();
  // R is symmetric with zero diagonal, so the i<j sum is half the total.
  const double all_pairs = 0.5 * R.sum();
  return from_k / n - all_pairs / (n * n);
}

Eigen::VectorXd vulnerability_gradient(const WeightedGraph& g, const SpectralBundle& s, int k) {
  check_node(s, k);
  check_connected(s);
  const auto u = s.reg_inverse.col(k - 1);
  Eigen::VectorXd grad(g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& e = g.edge(l);
    const double d = u[e.i - 1] - u[e.j - 1];
    grad[l] = -d * d;
  }
  return grad;
}

Eigen::VectorXd vulnerability_gradient(const WeightedGraph& g, int k) {
  return vulnerability_gradient(g, spectral_bundle(g), k);
}

VulnerabilityReport vulnerability_report(const WeightedGraph& g, int k) {
  const SpectralBundle s = spectral_bundle(g);
  return {k, vulnerability_measure(s, k), vulnerability_gradient(g, s, k), lower_bound(s)};
}

WorstCase worst_case(const SpectralBundle& s, std::span<const int> nodes) {
  if (nodes.empty()) throw InputError("worst_case: node set is empty");
  WorstCase best{0, -1.0};
  for (int k : nodes) {
    const double m = vulnerability_measure(s, k);
    const double tie_tol = 1e-12 * std::max(1.0, std::abs(best.measure));
    if (best.node == 0 || m > best.measure + tie_tol ||
        (std::abs(m - best.measure) <= tie_tol && k < best.node)) {
      best = {k, m};
    }
  }
  return best;
}

WorstCase worst_case(const WeightedGraph& g, std::span<const int> nodes) {
  return worst_case(spectral_bundle(g), nodes);
}

double lower_bound(const SpectralBundle& s) {
  check_connected(s);
  const double n = s.num_nodes();
  const double r = 1.0 - 1.0 / n;
  return r * r / s.lambda2();
}

double lower_bound(const WeightedGraph& g) { return lower_bound(spectral_bundle(g)); }

CommuteDecomposition commute_decomposition(const WeightedGraph& g, int k) {
  const SpectralBundle s = spectral_bundle(g);
  check_node(s, k);
  const Eigen::MatrixXd C = 2.0 * s.total_weight * resistance_matrix(s);
  const int n = s.num_nodes();
  CommuteDecomposition d;
  d.sum_from_k = C.col(k - 1).sum();
  for (int i = 0; i < n; ++i) {
    if (i == k - 1) continue;
    for (int j = i + 1; j < n; ++j) {
      if (j == k - 1) continue;
      d.sum_pairs_excl_k += C(i, j);
    }
  }
  return d;
}

}  // namespace resilnet
