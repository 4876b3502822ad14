#pragma once

#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "resilnet/analytic.hpp"
#include "resilnet/graph.hpp"

namespace resilnet {

inline constexpr double kDefaultGamma = std::numbers::pi / 16.0;

/// Spectral floor used when no natural frequencies are available,
/// relative to the budget.
inline constexpr double kDefaultRelativeFloor = 1e-4;

/// Edge-weight design problem: minimize the worst vulnerability over the
/// perturbed nodes, over b >= 0 with 1^T b = budget and lambda2(b) >= eps.
struct DesignProblem {
  int num_nodes = 0;
  std::vector<NodePair> edges;
  /// Nodes where perturbations are expected (1-based, nonempty).
  std::vector<int> perturbed_nodes;
  /// Natural frequencies, one per node; empty when unknown.
  Eigen::VectorXd natural_frequencies;
  double gamma = kDefaultGamma;
  /// Explicit floor on lambda2; overrides the derived one.
  std::optional<double> epsilon;
  double budget = 1.0;

  /// eps = ||omega||_{E,inf} sin(gamma) when frequencies are given and the
  /// result is positive, otherwise kDefaultRelativeFloor * budget.
  double spectral_floor() const;

  /// Throws InputError on violated invariants.
  void validate() const;
};

/// max over edges of |omega_i - omega_j| * sin(gamma).
double epsilon_from_sync(const Eigen::VectorXd& omega, const std::vector<NodePair>& edges,
                         double gamma);

struct SolverConfig {
  /// Projected-gradient tolerance of the final stage (normalized budget).
  double tol = 1e-7;
  /// Relative objective change over `stall_window` iterations.
  double rel_tol = 1e-9;
  int stall_window = 20;
  int max_iters = 20000;
  int max_stage_iters = 3000;
  /// Barrier weight: starts at mu_initial * f(b_init), divided by 10 per
  /// stage down to mu_final.
  double mu_initial = 1e-4;
  double mu_final = 1e-8;
  /// Log-sum-exp temperature relative to f(b_init), same schedule.
  double smoothing_initial = 1e-2;
  double smoothing_final = 1e-6;
  /// Edges below zero_threshold * budget are zeroed in the final polish.
  double zero_threshold = 1e-7;
  /// Newton refinement on the support for single-node problems.
  bool newton_polish = true;
};

struct SolverResult {
  Eigen::VectorXd b_star;
  /// max over the perturbed nodes of M_k(b_star).
  double objective = 0.0;
  std::map<int, double> per_node;
  int iterations = 0;
  /// Projected-gradient norm of the (smoothed, barrier-free) objective at
  /// b_star, in normalized-budget units.
  double kkt_gap = 0.0;
  /// lambda2(b_star) - eps.
  double feasibility = 0.0;
  double epsilon = 0.0;
  bool converged = false;
  /// Sufficient-condition check; set for single-node solves.
  std::optional<CertificateResult> certificate;
};

/// argmin_b M_k(b) over the feasible set. Throws InfeasibleError when the
/// floor cannot be reached.
SolverResult solve_single_node(const DesignProblem& problem, int k, const SolverConfig& config = {});

/// argmin_b max_{k in V'} M_k(b).
SolverResult solve_min_max(const DesignProblem& problem, const SolverConfig& config = {});

struct ConnectivityResult {
  Eigen::VectorXd b;
  double lambda2 = 0.0;
};

/// Approximately maximizes lambda2 over the simplex (smoothed minimum
/// eigenvalue, projected gradient). Stops early once lambda2 >= target.
ConnectivityResult maximize_connectivity(int num_nodes, const std::vector<NodePair>& edges,
                                         double budget,
                                         std::optional<double> target = std::nullopt);

}  // namespace resilnet
