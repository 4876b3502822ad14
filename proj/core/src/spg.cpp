#include "spg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resilnet/errors.hpp"
#include "resilnet/simplex.hpp"

namespace resilnet::detail {

namespace {

constexpr double kAlphaMin = 1e-30;
constexpr double kAlphaMax = 1e30;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               double budget) {
  return (project_simplex(x - g, budget) - x).lpNorm<Eigen::Infinity>();
}

SpgOutcome spg_minimize(const Objective& f, Eigen::VectorXd x0, double budget,
                        const SpgOptions& opt) {
  SpgOutcome out;
  out.x = std::move(x0);
  auto first = f(out.x);
  if (!first) throw Error("spg_minimize: starting point outside the objective domain");
  out.at_x = std::move(*first);
  out.pg_norm = projected_gradient_norm(out.x, out.at_x.grad, budget);

  std::deque<double> recent{out.at_x.value};
  std::deque<double> history{out.at_x.value};
  double alpha = out.pg_norm > 0.0 ? std::clamp(1.0 / out.pg_norm, kAlphaMin, kAlphaMax) : 1.0;

  auto stalled = [&] {
    if (static_cast<int>(history.size()) <= opt.stall_window) return false;
    const double old = history.front();
    const double now = history.back();
    return std::abs(old - now) <= opt.rel_tol * std::max(1.0, std::abs(now));
  };

  int stalled_for = 0;
  for (out.iterations = 0; out.iterations < opt.max_iters; ++out.iterations) {
    if (out.pg_norm <= opt.pg_tol && (stalled() || out.pg_norm == 0.0)) {
      out.converged = true;
      return out;
    }
    stalled_for = stalled() ? stalled_for + 1 : 0;
    if (stalled_for > 5 * opt.stall_window) {  // precision floor
      out.stalled = true;
      return out;
    }
    const Eigen::VectorXd d = project_simplex(out.x - alpha * out.at_x.grad, budget) - out.x;
    const double slope = out.at_x.grad.dot(d);
    if (!(slope < 0.0)) {
      // No descent available at this step size: stationary to working precision.
      out.converged = out.pg_norm <= opt.pg_tol * 10.0 || stalled();
      return out;
    }
    const double reference = *std::max_element(recent.begin(), recent.end());

    double lambda = 1.0;
    std::optional<ValueGrad> next;
    Eigen::VectorXd x_next;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_next = out.x + lambda * d;
      next = f(x_next);
      if (next && next->value <= reference + kArmijo * lambda * slope) break;
      double shrink = 0.5;
      if (next) {
        const double denom = next->value - out.at_x.value - lambda * slope;
        if (denom > 0.0) shrink = std::clamp(-0.5 * lambda * slope / denom, 0.1, 0.5);
      }
      lambda *= shrink;
      next.reset();
    }
    if (!next) {
      out.converged = out.pg_norm <= opt.pg_tol * 10.0 || stalled();
      return out;
    }

    const Eigen::VectorXd s = x_next - out.x;
    const Eigen::VectorXd y = next->grad - out.at_x.grad;
    const double sy = s.dot(y);
    alpha = sy <= 0.0 ? kAlphaMax : std::clamp(s.squaredNorm() / sy, kAlphaMin, kAlphaMax);

    out.x = std::move(x_next);
    out.at_x = std::move(*next);
    out.pg_norm = projected_gradient_norm(out.x, out.at_x.grad, budget);

    recent.push_back(out.at_x.value);
    if (static_cast<int>(recent.size()) > opt.memory) recent.pop_front();
    history.push_back(out.at_x.value);
    if (static_cast<int>(history.size()) > opt.stall_window + 1) history.pop_front();

    if (opt.early_stop && opt.early_stop(out.x, out.at_x)) {
      out.converged = true;
      ++out.iterations;
      return out;
    }
  }
  out.converged = out.pg_norm <= opt.pg_tol && stalled();
  return out;
}

}  // namespace resilnet::detail
