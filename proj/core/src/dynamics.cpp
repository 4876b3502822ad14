#include "resilnet/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <string>

#include "resilnet/errors.hpp"
#include "resilnet/parallel.hpp"

namespace resilnet {

namespace {

constexpr double kStabilityLimit = 0.5;

int step_count(double h, double horizon) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("time step must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
  const double steps = std::round(horizon / h);
  if (steps < 2.0 || steps > 1e9) throw InputError("horizon / h must give between 2 and 1e9 steps");
  return static_cast<int>(steps);
}

void check_node(const WeightedGraph& g, int node) {
  if (node < 1 || node > g.num_nodes()) {
    throw InputError("perturbed node " + std::to_string(node) + " outside 1.." +
                     std::to_string(g.num_nodes()));
  }
}

void stability_guard(const WeightedGraph& g, double h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.laplacian(), Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues()[g.num_nodes() - 1];
  if (h * top >= kStabilityLimit) {
    throw InputError("time step h = " + std::to_string(h) + " violates h * lambda_max < 0.5 (lambda_max = " +
                     std::to_string(top) + "); use h < " + std::to_string(kStabilityLimit / top));
  }
}

Eigen::VectorXd centered(const Eigen::VectorXd& omega) {
  return omega.array() - omega.mean();
}

/// Laplacian with edge (i,j) weighted b_ij cos(theta_i - theta_j).
Eigen::MatrixXd cosine_laplacian(const WeightedGraph& g, const Eigen::VectorXd& theta) {
  const int n = g.num_nodes();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < g.num_edges(); ++l) {
    const int i = g.edge(l).i - 1;
    const int j = g.edge(l).j - 1;
    const double w = g.weights()[l] * std::cos(theta[i] - theta[j]);
    L(i, i) += w;
    L(j, j) += w;
    L(i, j) -= w;
    L(j, i) -= w;
  }
  return L;
}

/// sum_j b_ij sin(theta_i - theta_j) for every i.
void coupling(const WeightedGraph& g, const Eigen::VectorXd& theta, Eigen::VectorXd& out) {
  out.setZero(g.num_nodes());
  for (int l = 0; l < g.num_edges(); ++l) {
    const int i = g.edge(l).i - 1;
    const int j = g.edge(l).j - 1;
    const double f = g.weights()[l] * std::sin(theta[i] - theta[j]);
    out[i] += f;
    out[j] -= f;
  }
}

double max_edge_gap(const WeightedGraph& g, const Eigen::VectorXd& theta) {
  double gap = 0.0;
  for (int l = 0; l < g.num_edges(); ++l) {
    if (g.weights()[l] <= 0.0) continue;
    gap = std::max(gap, std::abs(theta[g.edge(l).i - 1] - theta[g.edge(l).j - 1]));
  }
  return gap;
}

struct Realization {
  Eigen::MatrixXd theta;  // recorded, mean-zero
  Eigen::MatrixXd freq;
  double spread = 0.0;
};

/// Frequencies, estimator accumulator and strided recording from the full
/// phase history (nodes x (N+1)).
Realization summarize(const Eigen::MatrixXd& full, double h, double onset, bool keep, int stride) {
  const Eigen::Index n = full.rows();
  const Eigen::Index last = full.cols() - 1;
  Realization r;

  auto freq_at = [&](Eigen::Index s) -> Eigen::VectorXd {
    if (s == 0) return (-3.0 * full.col(0) + 4.0 * full.col(1) - full.col(2)) / (2.0 * h);
    if (s == last) return (3.0 * full.col(last) - 4.0 * full.col(last - 1) + full.col(last - 2)) / (2.0 * h);
    return (full.col(s + 1) - full.col(s - 1)) / (2.0 * h);
  };

  const auto first = static_cast<Eigen::Index>(std::ceil(onset / h - 1e-9));
  double acc = 0.0;
  for (Eigen::Index s = std::max<Eigen::Index>(first, 0); s < last; ++s) {
    const Eigen::VectorXd f = freq_at(s);
    acc += (f.array() - f.mean()).square().sum() * h;
  }
  const double window = static_cast<double>(last - std::max<Eigen::Index>(first, 0)) * h;
  r.spread = window > 0.0 ? acc / window : 0.0;

  if (keep) {
    const Eigen::Index cols = last / stride + 1;
    r.theta.resize(n, cols);
    r.freq.resize(n, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index s = c * stride;
      r.theta.col(c) = full.col(s).array() - full.col(s).mean();
      r.freq.col(c) = freq_at(s);
    }
  }
  return r;
}

/// Full nonlinear phase history under one disturbance signal.
Eigen::MatrixXd run_nonlinear(const WeightedGraph& g, const Eigen::VectorXd& omega_c,
                              const Eigen::VectorXd& theta_init, int k0,
                              const std::vector<double>& signal, double h) {
  const int n = g.num_nodes();
  const auto steps = static_cast<Eigen::Index>(signal.size());
  Eigen::MatrixXd full(n, steps + 1);
  Eigen::VectorXd x = theta_init;
  full.col(0) = x;
  Eigen::VectorXd c(n), k1(n), k2(n), k3(n), k4(n), drive(n);
  auto rhs = [&](const Eigen::VectorXd& th, Eigen::VectorXd& out) {
    coupling(g, th, c);
    out = drive - c;
  };
  for (Eigen::Index s = 0; s < steps; ++s) {
    drive = omega_c;
    drive[k0] += signal[static_cast<std::size_t>(s)];
    rhs(x, k1);
    rhs(x + 0.5 * h * k1, k2);
    rhs(x + 0.5 * h * k2, k3);
    rhs(x + h * k3, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    full.col(s + 1) = x;
  }
  return full;
}

struct LinearStep {
  Eigen::MatrixXd propagator;  // exp(-h L_c)
  Eigen::VectorXd input;       // int_0^h exp(-s L_c) ds e_k
};

LinearStep linear_step(const WeightedGraph& g, const Eigen::VectorXd& theta0, int k0, double h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cosine_laplacian(g, theta0));
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  Eigen::VectorXd decay(lam.size()), phi(lam.size());
  for (Eigen::Index a = 0; a < lam.size(); ++a) {
    decay[a] = std::exp(-h * lam[a]);
    phi[a] = std::abs(h * lam[a]) < 1e-12 ? h : -std::expm1(-h * lam[a]) / lam[a];
  }
  LinearStep st;
  st.propagator = V * decay.asDiagonal() * V.transpose();
  st.input = V * phi.asDiagonal() * V.row(k0).transpose();
  return st;
}

Eigen::MatrixXd run_linear(const LinearStep& st, const Eigen::VectorXd& theta0,
                           const std::vector<double>& signal) {
  const auto n = theta0.size();
  const auto steps = static_cast<Eigen::Index>(signal.size());
  Eigen::MatrixXd full(n, steps + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  full.col(0) = theta0;
  for (Eigen::Index s = 0; s < steps; ++s) {
    x = st.propagator * x + st.input * signal[static_cast<std::size_t>(s)];
    full.col(s + 1) = theta0 + x;
  }
  return full;
}

TrajectoryEnsemble empty_ensemble(int n, double h, int steps, int realizations, std::uint64_t seed,
                                  int stride, double onset, bool keep) {
  TrajectoryEnsemble e;
  e.num_nodes = n;
  e.h = h;
  e.horizon = steps * h;
  e.realizations = realizations;
  e.seed = seed;
  e.record_stride = stride;
  e.onset = onset;
  if (keep) {
    for (int s = 0; s <= steps; s += stride) e.times.push_back(s * h);
    e.theta.resize(static_cast<std::size_t>(realizations));
    e.freq.resize(static_cast<std::size_t>(realizations));
  }
  e.spread.assign(static_cast<std::size_t>(realizations), 0.0);
  return e;
}

void store(TrajectoryEnsemble& e, int r, Realization&& rz) {
  const auto idx = static_cast<std::size_t>(r);
  e.spread[idx] = rz.spread;
  if (!e.theta.empty()) {
    e.theta[idx] = std::move(rz.theta);
    e.freq[idx] = std::move(rz.freq);
  }
}

void check_config(const SimConfig& cfg) {
  if (cfg.realizations < 1) throw InputError("realizations must be at least 1");
  if (cfg.record_stride < 1) throw InputError("record_stride must be at least 1");
}

}  // namespace

NoiseSpec NoiseSpec::ou(int node, double tau, double sigma) {
  NoiseSpec s;
  s.kind = Kind::ornstein_uhlenbeck;
  s.node = node;
  s.tau = tau;
  s.sigma = sigma;
  return s;
}

NoiseSpec NoiseSpec::box(int node, double amplitude, double start, double duration) {
  NoiseSpec s;
  s.kind = Kind::box;
  s.node = node;
  s.amplitude = amplitude;
  s.start = start;
  s.duration = duration;
  return s;
}

void NoiseSpec::validate() const {
  if (kind == Kind::ornstein_uhlenbeck) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("OU correlation time must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("OU sigma must be nonnegative");
  } else {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InputError("box duration must be positive");
    if (!std::isfinite(amplitude) || !std::isfinite(start)) throw InputError("box parameters must be finite");
  }
}

SteadyState steady_state(const WeightedGraph& g, const Eigen::VectorXd& omega, double tol) {
  const int n = g.num_nodes();
  if (omega.size() != n) throw InputError("steady_state: need one natural frequency per node");
  if (!is_connected(g, 1e-12)) throw DisconnectedError("steady_state: graph is disconnected");

  SteadyState st;
  st.frequency_shift = omega.mean();
  const Eigen::VectorXd w = centered(omega);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd c(n);
  const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  for (int it = 0; it <= 50; ++it) {
    coupling(g, theta, c);
    const Eigen::VectorXd f = w - c;
    st.residual = f.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(st.residual)) break;
    if (st.residual < tol) {
      st.theta0 = theta;
      st.iterations = it;
      st.max_angle_gap = max_edge_gap(g, theta);
      return st;
    }
    if (it == 50) break;
    const Eigen::VectorXd step = (cosine_laplacian(g, theta) + J).partialPivLu().solve(f);
    theta += step;
    theta.array() -= theta.mean();
  }
  throw ConvergenceError("no synchronized solution: Newton did not converge in 50 iterations (residual " +
                         std::to_string(st.residual) + ")");
}

std::vector<double> make_noise(const NoiseSpec& spec, double h, double horizon, std::uint64_t seed) {
  spec.validate();
  const int steps = step_count(h, horizon);
  std::vector<double> out(static_cast<std::size_t>(steps), 0.0);
  if (spec.kind == NoiseSpec::Kind::box) {
    const double slack = 1e-9 * h;
    for (int s = 0; s < steps; ++s) {
      const double t = s * h;
      if (t >= spec.start - slack && t < spec.start + spec.duration - slack) {
        out[static_cast<std::size_t>(s)] = spec.amplitude;
      }
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double a = std::exp(-h / spec.tau);
  const double kick = spec.sigma * std::sqrt(-std::expm1(-2.0 * h / spec.tau));
  double eta = spec.sigma * normal(rng);
  for (int s = 0; s < steps; ++s) {
    out[static_cast<std::size_t>(s)] = eta;
    eta = a * eta + kick * normal(rng);
  }
  return out;
}

TrajectoryEnsemble integrate_nonlinear(const WeightedGraph& g, const Eigen::VectorXd& omega,
                                       const Eigen::VectorXd& theta_init, const NoiseSpec& noise,
                                       const SimConfig& config) {
  check_config(config);
  noise.validate();
  check_node(g, noise.node);
  if (omega.size() != g.num_nodes() || theta_init.size() != g.num_nodes()) {
    throw InputError("integrate_nonlinear: omega and theta_init need one entry per node");
  }
  const int steps = step_count(config.h, config.horizon);
  stability_guard(g, config.h);
  const Eigen::VectorXd omega_c = centered(omega);

  TrajectoryEnsemble e = empty_ensemble(g.num_nodes(), config.h, steps, config.realizations, config.seed,
                                        config.record_stride, noise.onset(), config.keep_trajectories);
  std::vector<double> gaps(static_cast<std::size_t>(config.realizations), 0.0);
  parallel_for(config.realizations, [&](int r) {
    const auto signal = make_noise(noise, config.h, config.horizon, config.seed + static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd full = run_nonlinear(g, omega_c, theta_init, noise.node - 1, signal, config.h);
    double gap = 0.0;
    for (Eigen::Index s = 0; s < full.cols(); ++s) gap = std::max(gap, max_edge_gap(g, full.col(s)));
    gaps[static_cast<std::size_t>(r)] = gap;
    store(e, r, summarize(full, config.h, noise.onset(), config.keep_trajectories, config.record_stride));
  });
  for (double gp : gaps) e.max_angle_gap = std::max(e.max_angle_gap, gp);
  return e;
}

TrajectoryEnsemble integrate_linearized(const WeightedGraph& g, const SteadyState& base,
                                        const NoiseSpec& noise, const SimConfig& config) {
  check_config(config);
  noise.validate();
  check_node(g, noise.node);
  if (base.theta0.size() != g.num_nodes()) throw InputError("integrate_linearized: steady state size mismatch");
  const int steps = step_count(config.h, config.horizon);
  stability_guard(g, config.h);
  const LinearStep st = linear_step(g, base.theta0, noise.node - 1, config.h);

  TrajectoryEnsemble e = empty_ensemble(g.num_nodes(), config.h, steps, config.realizations, config.seed,
                                        config.record_stride, noise.onset(), config.keep_trajectories);
  parallel_for(config.realizations, [&](int r) {
    const auto signal = make_noise(noise, config.h, config.horizon, config.seed + static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd full = run_linear(st, base.theta0, signal);
    store(e, r, summarize(full, config.h, noise.onset(), config.keep_trajectories, config.record_stride));
  });
  e.max_angle_gap = max_edge_gap(g, base.theta0);
  return e;
}

TrajectoryEnsemble integrate_nonlinear_signal(const WeightedGraph& g, const Eigen::VectorXd& omega,
                                              const Eigen::VectorXd& theta_init, int node,
                                              const std::vector<double>& signal, double h,
                                              double onset, bool keep_trajectories) {
  check_node(g, node);
  if (omega.size() != g.num_nodes() || theta_init.size() != g.num_nodes()) {
    throw InputError("integrate_nonlinear_signal: omega and theta_init need one entry per node");
  }
  const auto steps = static_cast<int>(signal.size());
  if (steps < 2) throw InputError("signal needs at least two steps");
  step_count(h, steps * h);
  stability_guard(g, h);
  TrajectoryEnsemble e = empty_ensemble(g.num_nodes(), h, steps, 1, 0, 1, onset, keep_trajectories);
  const Eigen::MatrixXd full = run_nonlinear(g, centered(omega), theta_init, node - 1, signal, h);
  for (Eigen::Index s = 0; s < full.cols(); ++s) e.max_angle_gap = std::max(e.max_angle_gap, max_edge_gap(g, full.col(s)));
  store(e, 0, summarize(full, h, onset, keep_trajectories, 1));
  return e;
}

TrajectoryEnsemble integrate_linearized_signal(const WeightedGraph& g, const SteadyState& base,
                                               int node, const std::vector<double>& signal,
                                               double h, double onset, bool keep_trajectories) {
  check_node(g, node);
  if (base.theta0.size() != g.num_nodes()) throw InputError("integrate_linearized_signal: steady state size mismatch");
  const auto steps = static_cast<int>(signal.size());
  if (steps < 2) throw InputError("signal needs at least two steps");
  step_count(h, steps * h);
  stability_guard(g, h);
  TrajectoryEnsemble e = empty_ensemble(g.num_nodes(), h, steps, 1, 0, 1, onset, keep_trajectories);
  const Eigen::MatrixXd full = run_linear(linear_step(g, base.theta0, node - 1, h), base.theta0, signal);
  e.max_angle_gap = max_edge_gap(g, base.theta0);
  store(e, 0, summarize(full, h, onset, keep_trajectories, 1));
  return e;
}

EmpiricalMeasure empirical_vulnerability(const TrajectoryEnsemble& traj) {
  EmpiricalMeasure m;
  m.realizations = static_cast<int>(traj.spread.size());
  m.single_realization = m.realizations < 2;
  if (m.realizations == 0) return m;
  double sum = 0.0;
  for (double v : traj.spread) sum += v;
  m.value = sum / m.realizations;
  if (m.realizations >= 2) {
    double ss = 0.0;
    for (double v : traj.spread) ss += (v - m.value) * (v - m.value);
    m.std_error = std::sqrt(ss / (m.realizations - 1) / m.realizations);
  }
  return m;
}

void write_trajectory_csv(const TrajectoryEnsemble& traj, std::ostream& out) {
  if (traj.theta.empty()) throw InputError("trajectories were not kept; rerun with keep_trajectories");
  out << "time,realization,node,theta,freq\n";
  char buf[160];
  for (std::size_t r = 0; r < traj.theta.size(); ++r) {
    const auto& th = traj.theta[r];
    const auto& fr = traj.freq[r];
    for (Eigen::Index c = 0; c < th.cols(); ++c) {
      for (Eigen::Index i = 0; i < th.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%zu,%ld,%.17g,%.17g\n", traj.times[static_cast<std::size_t>(c)], r,
                      static_cast<long>(i + 1), th(i, c), fr(i, c));
        out << buf;
      }
    }
  }
}

void write_trajectory_csv(const TrajectoryEnsemble& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_trajectory_csv(traj, out);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace resilnet
