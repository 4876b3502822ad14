#pragma once

// Spectral projected gradient on a scaled simplex (Birgin, Martinez and
// Raydan, nonmonotone variant). Internal to the optimizer.

#include <deque>
#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace resilnet::detail {

struct ValueGrad {
  double value = 0.0;
  Eigen::VectorXd grad;
};

/// Returns nullopt outside the objective's domain (treated as +inf).
using Objective = std::function<std::optional<ValueGrad>(const Eigen::VectorXd&)>;

struct SpgOptions {
  double pg_tol = 1e-7;
  double rel_tol = 1e-9;
  int stall_window = 20;
  int max_iters = 1000;
  int memory = 10;
  /// Checked after each accepted step; true stops the run.
  std::function<bool(const Eigen::VectorXd&, const ValueGrad&)> early_stop;
};

struct SpgOutcome {
  Eigen::VectorXd x;
  ValueGrad at_x;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Stopped because the objective stopped changing before pg_tol was met.
  bool stalled = false;
};

/// ||P(x - g) - x||_inf, the projected-gradient stationarity measure.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               double budget);

/// x0 must lie in the domain and on the simplex.
SpgOutcome spg_minimize(const Objective& f, Eigen::VectorXd x0, double budget,
                        const SpgOptions& opt);

}  // namespace resilnet::detail
