#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilnet/graph.hpp"

namespace resilnet {

/// Disturbance added to the natural frequency of one node.
struct NoiseSpec {
  enum class Kind { ornstein_uhlenbeck, box };

  Kind kind = Kind::ornstein_uhlenbeck;
  int node = 1;  // 1-based
  // Ornstein-Uhlenbeck
  double tau = 50.0;
  double sigma = 0.05;
  // box
  double amplitude = 0.1;
  double start = 10.0;
  double duration = 20.0;

  static NoiseSpec ou(int node, double tau = 50.0, double sigma = 0.05);
  static NoiseSpec box(int node, double amplitude = 0.1, double start = 10.0, double duration = 20.0);

  /// Time before which samples are dropped by the estimator.
  double onset() const { return kind == Kind::box ? start : 0.0; }
  void validate() const;
};

struct SimConfig {
  double h = 0.01;
  double horizon = 200.0;
  int realizations = 100;
  std::uint64_t seed = 1;
  /// Keep every record_stride-th step in the stored trajectories.
  int record_stride = 1;
  /// false keeps only the per-realization estimator accumulators.
  bool keep_trajectories = true;
};

struct SteadyState {
  /// Mean-zero phases of the synchronized state, rotating frame.
  Eigen::VectorXd theta0;
  /// max_i |omega_i - sum_j b_ij sin(theta_i - theta_j)| with omega centered.
  double residual = 0.0;
  double max_angle_gap = 0.0;
  /// Mean of the input frequencies, removed to enter the rotating frame.
  double frequency_shift = 0.0;
  int iterations = 0;
};

struct TrajectoryEnsemble {
  int num_nodes = 0;
  double h = 0.0;
  double horizon = 0.0;
  int realizations = 0;
  std::uint64_t seed = 0;
  int record_stride = 1;
  /// Start of the estimator window.
  double onset = 0.0;
  /// Recorded times (every record_stride-th step).
  std::vector<double> times;
  /// Per realization: nodes x recorded times. Phases are mean-zero per
  /// time; frequencies come from central differences of the phases.
  std::vector<Eigen::MatrixXd> theta;
  std::vector<Eigen::MatrixXd> freq;
  /// Per realization: (1/(T - onset)) sum_{t >= onset} h sum_i (freq_i - mean freq)^2.
  std::vector<double> spread;
  /// Largest edge angle gap seen (nonlinear runs); a basin-escape watchdog.
  double max_angle_gap = 0.0;
};

/// Newton on the power-flow map from the flat start, at most 50 iterations.
/// Throws ConvergenceError when no synchronized state is found.
SteadyState steady_state(const WeightedGraph& g, const Eigen::VectorXd& omega, double tol = 1e-12);

/// Disturbance value on each step [t_s, t_s + h), s = 0..round(T/h)-1.
/// OU starts from its stationary law and uses the exact AR(1) update.
std::vector<double> make_noise(const NoiseSpec& spec, double h, double horizon, std::uint64_t seed);

/// theta' = omega + eta(t) e_k - sum_j b_ij sin(theta_i - theta_j), classical
/// RK4 with eta held over each step. Realization r draws noise with seed + r.
/// Throws InputError when h * lambda_max(L) >= 0.5.
TrajectoryEnsemble integrate_nonlinear(const WeightedGraph& g, const Eigen::VectorXd& omega,
                                       const Eigen::VectorXd& theta_init, const NoiseSpec& noise,
                                       const SimConfig& config = {});

/// Deviation dynamics x' = -L_c x + eta(t) e_k about theta0, where L_c
/// weighs edge (i,j) by b_ij cos(theta0_i - theta0_j). The step is exact
/// for piecewise-constant eta. Reported phases are theta0 + x.
TrajectoryEnsemble integrate_linearized(const WeightedGraph& g, const SteadyState& base,
                                        const NoiseSpec& noise, const SimConfig& config = {});

/// Single-realization variants driven by an explicit per-step signal.
TrajectoryEnsemble integrate_nonlinear_signal(const WeightedGraph& g, const Eigen::VectorXd& omega,
                                              const Eigen::VectorXd& theta_init, int node,
                                              const std::vector<double>& signal, double h,
                                              double onset = 0.0, bool keep_trajectories = true);
TrajectoryEnsemble integrate_linearized_signal(const WeightedGraph& g, const SteadyState& base,
                                               int node, const std::vector<double>& signal,
                                               double h, double onset = 0.0,
                                               bool keep_trajectories = true);

struct EmpiricalMeasure {
  double value = 0.0;
  /// Monte-Carlo standard error across realizations (0 when R < 2).
  double std_error = 0.0;
  int realizations = 0;
  /// Set when R < 2: no ensemble averaging took place.
  bool single_realization = false;
};

EmpiricalMeasure empirical_vulnerability(const TrajectoryEnsemble& traj);

/// CSV with header time,realization,node,theta,freq (nodes 1-based).
void write_trajectory_csv(const TrajectoryEnsemble& traj, std::ostream& out);
void write_trajectory_csv(const TrajectoryEnsemble& traj, const std::string& path);

}  // namespace resilnet
