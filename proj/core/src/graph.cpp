#include "resilnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>

#include "resilnet/errors.hpp"

namespace resilnet {

namespace {

void require_node(int n, int v, const char* what) {
  if (v < 1 || v > n) {
    throw InputError(std::string(what) + ": node " + std::to_string(v) +
                     " outside 1.." + std::to_string(n));
  }
}

void require_connected(const SpectralBundle& s) {
  if (!s.connected) {
    throw DisconnectedError("graph is disconnected; effective resistance is infinite");
  }
}

}  // namespace

WeightedGraph::WeightedGraph(int n, std::vector<NodePair> edges, Eigen::VectorXd weights)
    : n_(n), edges_(std::move(edges)), b_(std::move(weights)) {
  if (n_ < 1) throw InputError("graph needs at least one node");
  if (static_cast<std::size_t>(b_.size()) != edges_.size()) {
    throw InputError("weight vector has length " + std::to_string(b_.size()) + " but there are " +
                     std::to_string(edges_.size()) + " edges");
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    auto& e = edges_[l];
    const std::string where = "edge " + std::to_string(l);
    if (e.i < 1 || e.i > n_ || e.j < 1 || e.j > n_) {
      throw InputError(where + ": endpoint outside 1.." + std::to_string(n_));
    }
    if (e.i == e.j) throw InputError(where + ": self-loop on node " + std::to_string(e.i));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.emplace(e.i, e.j).second) {
      throw InputError(where + ": duplicate edge (" + std::to_string(e.i) + "," +
                       std::to_string(e.j) + ")");
    }
    const double w = b_[static_cast<Eigen::Index>(l)];
    if (!std::isfinite(w) || w < 0.0) {
      throw InputError(where + ": weight must be finite and nonnegative");
    }
  }
}

WeightedGraph WeightedGraph::with_weights(Eigen::VectorXd weights) const {
  return WeightedGraph(n_, edges_, std::move(weights));
}

std::optional<int> WeightedGraph::find_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    if (edges_[l].i == i && edges_[l].j == j) return static_cast<int>(l);
  }
  return std::nullopt;
}

Eigen::MatrixXd WeightedGraph::laplacian() const {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    const int u = edges_[l].i - 1;
    const int v = edges_[l].j - 1;
    const double w = b_[static_cast<Eigen::Index>(l)];
    L(u, u) += w;
    L(v, v) += w;
    L(u, v) -= w;
    L(v, u) -= w;
  }
  return L;
}

Eigen::MatrixXd WeightedGraph::adjacency() const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    const int u = edges_[l].i - 1;
    const int v = edges_[l].j - 1;
    B(u, v) = B(v, u) = b_[static_cast<Eigen::Index>(l)];
  }
  return B;
}

double SpectralBundle::lambda2() const {
  if (eigenvalues.size() < 2) return 0.0;
  const double top = eigenvalues[eigenvalues.size() - 1];
  const double l2 = eigenvalues[1];
  return l2 <= kZeroEigenvalueRelTol * top ? 0.0 : l2;
}

SpectralBundle spectral_bundle(const WeightedGraph& g) {
  const int n = g.num_nodes();
  SpectralBundle s;
  s.laplacian = g.laplacian();
  s.total_weight = g.total_weight();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.laplacian);
  s.eigenvalues = eig.eigenvalues();
  s.eigenvectors = eig.eigenvectors();
  s.connected = n == 1 || s.lambda2() > 0.0;

  if (!s.connected) {
    s.pseudoinverse = pseudoinverse_by_eigen(s);
    return s;
  }

  const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd Y = s.laplacian + J;
  Eigen::LLT<Eigen::MatrixXd> llt(Y);
  if (llt.info() != Eigen::Success) {
    throw SingularError("L + 11^T/n is numerically singular");
  }
  s.reg_inverse = llt.solve(Eigen::MatrixXd::Identity(n, n));
  s.reg_inverse = 0.5 * (s.reg_inverse + s.reg_inverse.transpose());
  s.pseudoinverse = s.reg_inverse - J;
  return s;
}

Eigen::MatrixXd pseudoinverse_by_eigen(const SpectralBundle& s) {
  const int n = s.num_nodes();
  const double top = n > 0 ? s.eigenvalues[n - 1] : 0.0;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const double lam = s.eigenvalues[a];
    if (lam <= kZeroEigenvalueRelTol * top) continue;
    P.noalias() += (1.0 / lam) * s.eigenvectors.col(a) * s.eigenvectors.col(a).transpose();
  }
  return P;
}

double algebraic_connectivity(const WeightedGraph& g) {
  if (g.num_nodes() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.laplacian(), Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double l2 = ev[1];
  return l2 <= kZeroEigenvalueRelTol * ev[ev.size() - 1] ? 0.0 : l2;
}

bool is_connected(const WeightedGraph& g, double tol) {
  if (!(tol > 0.0)) throw InputError("is_connected: tolerance must be positive");
  if (g.num_nodes() == 1) return true;
  return algebraic_connectivity(g) > tol;
}

bool is_connected_by_traversal(const WeightedGraph& g, double tol) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int l = 0; l < g.num_edges(); ++l) {
    if (g.weights()[l] <= tol) continue;
    const auto& e = g.edge(l);
    adj[static_cast<std::size_t>(e.i - 1)].push_back(e.j - 1);
    adj[static_cast<std::size_t>(e.j - 1)].push_back(e.i - 1);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  int visited = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++visited;
        q.push(v);
      }
    }
  }
  return visited == n;
}

double effective_resistance(const SpectralBundle& s, int i, int j) {
  const int n = s.num_nodes();
  require_node(n, i, "effective_resistance");
  require_node(n, j, "effective_resistance");
  if (i == j) throw InputError("effective_resistance: endpoints must differ");
  require_connected(s);
  const auto& P = s.pseudoinverse;
  return P(i - 1, i - 1) + P(j - 1, j - 1) - 2.0 * P(i - 1, j - 1);
}

double effective_resistance(const WeightedGraph& g, int i, int j) {
  return effective_resistance(spectral_bundle(g), i, j);
}

Eigen::MatrixXd resistance_matrix(const SpectralBundle& s) {
  require_connected(s);
  const auto& P = s.pseudoinverse;
  const Eigen::VectorXd d = P.diagonal();
  const int n = s.num_nodes();
  Eigen::MatrixXd R = d.replicate(1, n) + d.transpose().replicate(n, 1) - 2.0 * P;
  R.diagonal().setZero();
  return R;
}

double commute_time(const SpectralBundle& s, int i, int j) {
  return 2.0 * s.total_weight * effective_resistance(s, i, j);
}

double commute_time(const WeightedGraph& g, int i, int j) {
  return commute_time(spectral_bundle(g), i, j);
}

Eigen::MatrixXd transition_matrix(const WeightedGraph& g) {
  Eigen::MatrixXd B = g.adjacency();
  for (int u = 0; u < g.num_nodes(); ++u) {
    const double deg = B.row(u).sum();
    if (!(deg > 0.0)) {
      throw InputError("transition_matrix: node " + std::to_string(u + 1) +
                       " has zero weighted degree");
    }
    B.row(u) /= deg;
  }
  return B;
}

}  // namespace resilnet
