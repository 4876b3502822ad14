#include "resilnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "resilnet/errors.hpp"
#include "resilnet/simplex.hpp"
#include "resilnet/vulnerability.hpp"
#include "spg.hpp"

namespace resilnet {

namespace {

using detail::ValueGrad;

struct Topology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // 0-based

  Topology(int nodes, const std::vector<NodePair>& e) : n(nodes) {
    edges.reserve(e.size());
    for (const auto& p : e) edges.emplace_back(p.i - 1, p.j - 1);
  }

  int m() const { return static_cast<int>(edges.size()); }

  /// L(b) + shift * 11^T / n
  Eigen::MatrixXd regularized(const Eigen::VectorXd& b, double shift = 1.0) const {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(n, n, shift / n);
    for (int l = 0; l < m(); ++l) {
      const auto [u, v] = edges[static_cast<std::size_t>(l)];
      Y(u, u) += b[l];
      Y(v, v) += b[l];
      Y(u, v) -= b[l];
      Y(v, u) -= b[l];
    }
    return Y;
  }

  double quad(const Eigen::MatrixXd& M, int l) const {
    const auto [u, v] = edges[static_cast<std::size_t>(l)];
    return M(u, u) + M(v, v) - 2.0 * M(u, v);
  }
};

double lambda2_of(const Topology& t, const Eigen::VectorXd& b) {
  Eigen::MatrixXd L = t.regularized(b, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
  return t.n < 2 ? 0.0 : eig.eigenvalues()[1];
}

/// LSE_tau(e_k^T Y^-1 e_k - 1/n) - mu logdet(Y - eps I).
class DesignObjective {
 public:
  DesignObjective(const Topology& t, std::vector<int> nodes0, double eps, double mu, double tau)
      : t_(t), nodes_(std::move(nodes0)), eps_(eps), mu_(mu), tau_(tau) {}

  std::optional<ValueGrad> operator()(const Eigen::VectorXd& b) const {
    const int n = t_.n;
    if ((b.array() < 0.0).any()) return std::nullopt;
    const Eigen::MatrixXd Y = t_.regularized(b);
    Eigen::LLT<Eigen::MatrixXd> llt(Y);
    if (llt.info() != Eigen::Success) return std::nullopt;

    const auto kcount = static_cast<Eigen::Index>(nodes_.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, kcount);
    for (Eigen::Index c = 0; c < kcount; ++c) E(nodes_[static_cast<std::size_t>(c)], c) = 1.0;
    const Eigen::MatrixXd U = llt.solve(E);

    Eigen::VectorXd f(kcount);
    for (Eigen::Index c = 0; c < kcount; ++c) f[c] = U(nodes_[static_cast<std::size_t>(c)], c) - 1.0 / n;

    ValueGrad out;
    Eigen::VectorXd w;
    if (kcount == 1) {
      out.value = f[0];
      w = Eigen::VectorXd::Ones(1);
    } else {
      const double top = f.maxCoeff();
      w = ((f.array() - top) / tau_).exp().matrix();
      const double z = w.sum();
      out.value = top + tau_ * std::log(z);
      w /= z;
    }
    if (!std::isfinite(out.value)) return std::nullopt;

    out.grad = Eigen::VectorXd::Zero(t_.m());
    for (Eigen::Index c = 0; c < kcount; ++c) {
      for (int l = 0; l < t_.m(); ++l) {
        const auto [u, v] = t_.edges[static_cast<std::size_t>(l)];
        const double d = U(u, c) - U(v, c);
        out.grad[l] -= w[c] * d * d;
      }
    }

    if (mu_ > 0.0) {
      const Eigen::MatrixXd C = Y - eps_ * Eigen::MatrixXd::Identity(n, n);
      Eigen::LLT<Eigen::MatrixXd> lltc(C);
      if (lltc.info() != Eigen::Success) return std::nullopt;
      const Eigen::VectorXd diag = lltc.matrixL().toDenseMatrix().diagonal();
      if ((diag.array() <= 0.0).any()) return std::nullopt;
      out.value -= mu_ * 2.0 * diag.array().log().sum();
      const Eigen::MatrixXd Cinv = lltc.solve(Eigen::MatrixXd::Identity(n, n));
      for (int l = 0; l < t_.m(); ++l) out.grad[l] -= mu_ * t_.quad(Cinv, l);
    }
    return out;
  }

 private:
  const Topology& t_;
  std::vector<int> nodes_;
  double eps_;
  double mu_;
  double tau_;
};

double max_measure(const Topology& t, const std::vector<int>& nodes0, const Eigen::VectorXd& b) {
  const Eigen::MatrixXd Y = t.regularized(b);
  Eigen::LLT<Eigen::MatrixXd> llt(Y);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd Yinv = llt.solve(Eigen::MatrixXd::Identity(t.n, t.n));
  double top = -std::numeric_limits<double>::infinity();
  for (int k : nodes0) top = std::max(top, Yinv(k, k) - 1.0 / t.n);
  return top;
}

/// Active-set Newton refinement of a single-node solution on its support,
/// with the budget constraint handled through the KKT system. Edges that a
/// step would drive negative are clamped to zero and leave the support.
/// Returns the refined point or nullopt when it does not improve.
std::optional<Eigen::VectorXd> newton_on_support(const Topology& t, int k0, Eigen::VectorXd b,
                                                 double eps) {
  auto objective = [&](const Eigen::VectorXd& x) { return max_measure(t, {k0}, x); };
  // Spread of the gradient over the support; zero at a stationary point.
  // Near the optimum f is flat to rounding, so steps are judged on this.
  auto stationarity = [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd Y = t.regularized(x);
    const Eigen::VectorXd u = Y.llt().solve(Eigen::VectorXd::Unit(t.n, k0));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int l = 0; l < t.m(); ++l) {
      if (x[l] <= 0.0) continue;
      const auto [p, q] = t.edges[static_cast<std::size_t>(l)];
      const double gl = -(u[p] - u[q]) * (u[p] - u[q]);
      lo = std::min(lo, gl);
      hi = std::max(hi, gl);
    }
    return hi - lo;
  };
  double f = objective(b);
  double res = stationarity(b);
  bool improved = false;
  for (int it = 0; it < 60; ++it) {
    std::vector<int> support;
    for (int l = 0; l < t.m(); ++l)
      if (b[l] > 0.0) support.push_back(l);
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s < 2) break;

    const Eigen::MatrixXd Y = t.regularized(b);
    Eigen::LLT<Eigen::MatrixXd> llt(Y);
    if (llt.info() != Eigen::Success) break;
    const Eigen::MatrixXd Yinv = llt.solve(Eigen::MatrixXd::Identity(t.n, t.n));
    const Eigen::VectorXd u = Yinv.col(k0);

    Eigen::VectorXd g(s), sl(s);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(t.n, s);
    for (Eigen::Index c = 0; c < s; ++c) {
      const auto [p, q] = t.edges[static_cast<std::size_t>(support[static_cast<std::size_t>(c)])];
      sl[c] = u[p] - u[q];
      g[c] = -sl[c] * sl[c];
      A(p, c) = 1.0;
      A(q, c) = -1.0;
    }
    const Eigen::MatrixXd R = A.transpose() * Yinv * A;
    const Eigen::MatrixXd H = 2.0 * sl.asDiagonal() * R * sl.asDiagonal();

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + 1, s + 1);
    K.topLeftCorner(s, s) = H;
    K.block(0, s, s, 1).setOnes();
    K.block(s, 0, 1, s).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
    rhs.head(s) = -g;
    // Cycles leave flat directions in H; take the minimum-norm step.
    const Eigen::VectorXd step = K.completeOrthogonalDecomposition().solve(rhs).head(s);
    if (!step.allFinite() || step.lpNorm<Eigen::Infinity>() < 1e-16) break;

    // Ratio test against b >= 0.
    double tmax = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index c = 0; c < s; ++c) {
      if (step[c] < 0.0) {
        const double tc = -b[support[static_cast<std::size_t>(c)]] / step[c];
        if (tc < tmax) {
          tmax = tc;
          blocking = c;
        }
      }
    }

    bool accepted = false;
    double tstep = tmax;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd trial = b;
      for (Eigen::Index c = 0; c < s; ++c)
        trial[support[static_cast<std::size_t>(c)]] += tstep * step[c];
      if (blocking >= 0 && tstep == tmax) trial[support[static_cast<std::size_t>(blocking)]] = 0.0;
      trial = trial.cwiseMax(0.0);
      trial /= trial.sum();
      if (lambda2_of(t, trial) > eps) {
        const double ft = objective(trial);
        const double rt = stationarity(trial);
        const double flat = 1e-13 * std::abs(f);
        if (ft < f - flat || (ft <= f + flat && rt < res)) {
          accepted = true;
          improved = true;
          b = trial;
          f = ft;
          res = rt;
          break;
        }
      }
      tstep *= 0.5;
    }
    if (!accepted) break;
  }
  if (!improved) return std::nullopt;
  return b;
}

std::vector<int> to_zero_based(const std::vector<int>& nodes) {
  std::vector<int> out;
  out.reserve(nodes.size());
  for (int k : nodes) out.push_back(k - 1);
  return out;
}

SolverResult solve_nodes(const DesignProblem& p, const std::vector<int>& nodes,
                         const SolverConfig& cfg, bool single) {
  p.validate();
  const double eps = p.spectral_floor();
  const double eps_n = eps / p.budget;
  const Topology t(p.num_nodes, p.edges);
  const std::vector<int> nodes0 = to_zero_based(nodes);
  const int m = t.m();

  const Eigen::VectorXd open = Eigen::VectorXd::Constant(m, 1.0 / m);
  const double l2_uniform = lambda2_of(t, open);
  const double interior = eps_n * (1.0 + 1e-6) + 1e-14;
  Eigen::VectorXd b = open;
  if (!(l2_uniform > interior)) {
    const ConnectivityResult phase1 =
        maximize_connectivity(p.num_nodes, p.edges, 1.0, eps_n * (1.0 + 1e-3) + 1e-12);
    if (!(phase1.lambda2 > interior)) {
      throw InfeasibleError("spectral floor " + std::to_string(eps) +
                                " is unreachable; largest lambda2 found is " +
                                std::to_string(phase1.lambda2 * p.budget),
                            phase1.lambda2 * p.budget);
    }
    b = phase1.b;
  }
  const Eigen::VectorXd b_init = b;
  const double f_init = max_measure(t, nodes0, b_init);

  const bool smooth = nodes0.size() > 1;
  double mu = cfg.mu_initial * f_init;
  double tau = cfg.smoothing_initial * f_init;
  const double tau_final = cfg.smoothing_final * f_init;

  SolverResult res;
  int used = 0;
  double final_pg = 0.0;
  for (;;) {
    const bool last = mu <= cfg.mu_final && (!smooth || tau <= tau_final);
    const DesignObjective obj(t, nodes0, eps_n, mu, smooth ? tau : 1.0);
    detail::SpgOptions opt;
    // The smoothed max has curvature ~ f/tau; below sqrt(eps_mach f / tau)
    // the projected gradient is not resolvable in double precision.
    const double resolvable =
        smooth ? std::sqrt(std::numeric_limits<double>::epsilon() * f_init / tau) : 0.0;
    opt.pg_tol = std::max(last ? cfg.tol : std::max(cfg.tol, 1e-5), resolvable);
    opt.rel_tol = cfg.rel_tol;
    opt.stall_window = cfg.stall_window;
    const int remaining = std::max(1, cfg.max_iters - used);
    opt.max_iters = last ? remaining : std::min(cfg.max_stage_iters, remaining);
    const detail::SpgOutcome out = detail::spg_minimize(std::cref(obj), b, 1.0, opt);
    used += out.iterations;
    b = out.x;
    if (last || used >= cfg.max_iters) {
      res.converged = last && (out.converged || (smooth && out.stalled));
      final_pg = out.pg_norm;
      break;
    }
    mu = std::max(cfg.mu_final, mu * 0.1);
    tau = std::max(tau_final, tau * 0.1);
  }
  (void)final_pg;

  // Polish: drop numerically zero edges, then refine on the support.
  Eigen::VectorXd polished = (b.array() < cfg.zero_threshold).select(0.0, b);
  polished /= polished.sum();
  if (lambda2_of(t, polished) >= eps_n && max_measure(t, nodes0, polished) <=
                                              max_measure(t, nodes0, b) + 1e-12) {
    b = polished;
  }
  if (single && cfg.newton_polish && lambda2_of(t, b) > eps_n * (1.0 + 1e-4) + 1e-12) {
    if (auto refined = newton_on_support(t, nodes0.front(), b, eps_n)) b = *refined;
  }
  if (max_measure(t, nodes0, b) > f_init) b = b_init;
  b /= b.sum();

  // Stationarity of the barrier-free objective at the returned point.
  {
    const DesignObjective plain(t, nodes0, eps_n, 0.0, smooth ? tau_final : 1.0);
    const auto vg = plain(b);
    res.kkt_gap = vg ? detail::projected_gradient_norm(b, vg->grad, 1.0)
                     : std::numeric_limits<double>::infinity();
  }

  res.iterations = used;
  res.epsilon = eps;
  res.b_star = b * p.budget;
  const WeightedGraph g(p.num_nodes, p.edges, res.b_star);
  const SpectralBundle sb = spectral_bundle(g);
  res.objective = -std::numeric_limits<double>::infinity();
  for (int k : nodes) {
    const double mk = vulnerability_measure(sb, k);
    res.per_node[k] = mk;
    res.objective = std::max(res.objective, mk);
  }
  res.feasibility = sb.lambda2() - eps;
  if (single) {
    res.certificate = optimality_certificate(WeightedGraph(p.num_nodes, p.edges, b), nodes.front());
  }
  return res;
}

}  // namespace

double epsilon_from_sync(const Eigen::VectorXd& omega, const std::vector<NodePair>& edges,
                         double gamma) {
  if (!(gamma > 0.0 && gamma < std::numbers::pi / 2.0)) {
    throw InputError("gamma must lie in (0, pi/2)");
  }
  double spread = 0.0;
  for (const auto& e : edges) {
    if (e.i < 1 || e.j < 1 || e.i > omega.size() || e.j > omega.size()) {
      throw InputError("epsilon_from_sync: edge endpoint outside the frequency vector");
    }
    spread = std::max(spread, std::abs(omega[e.i - 1] - omega[e.j - 1]));
  }
  return spread * std::sin(gamma);
}

double DesignProblem::spectral_floor() const {
  if (epsilon) return *epsilon;
  if (natural_frequencies.size() > 0) {
    const double e = epsilon_from_sync(natural_frequencies, edges, gamma);
    if (e > 0.0) return e;
  }
  return kDefaultRelativeFloor * budget;
}

void DesignProblem::validate() const {
  if (num_nodes < 2) throw InputError("design problem needs at least two nodes");
  if (edges.empty()) throw InputError("design problem has no candidate edges");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InputError("budget must be positive");
  // Reuses the graph constructor's edge validation.
  (void)WeightedGraph(num_nodes, edges, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges.size())));
  std::set<int> seen;
  for (int k : perturbed_nodes) {
    if (k < 1 || k > num_nodes) {
      throw InputError("perturbed node " + std::to_string(k) + " outside 1.." + std::to_string(num_nodes));
    }
    if (!seen.insert(k).second) throw InputError("perturbed node " + std::to_string(k) + " listed twice");
  }
  if (natural_frequencies.size() != 0 && natural_frequencies.size() != num_nodes) {
    throw InputError("natural frequency vector must have one entry per node");
  }
  if (!(gamma > 0.0 && gamma < std::numbers::pi / 2.0)) throw InputError("gamma must lie in (0, pi/2)");
  const double eps = spectral_floor();
  if (!(eps > 0.0)) throw InputError("spectral floor must be positive");
  if (!(eps / budget < 1.0)) {
    // Above the budget the floor is unreachable for n >= 3, and E = Y - eps I
    // cannot be psd since 11^T/n carries eigenvalue 1 after normalization.
    const double best = maximize_connectivity(num_nodes, edges, budget).lambda2;
    throw InfeasibleError("spectral floor " + std::to_string(eps) + " is not below the budget " +
                              std::to_string(budget) + "; largest lambda2 found is " + std::to_string(best),
                          best);
  }
}

SolverResult solve_single_node(const DesignProblem& problem, int k, const SolverConfig& config) {
  DesignProblem p = problem;
  p.perturbed_nodes = {k};
  return solve_nodes(p, p.perturbed_nodes, config, true);
}

SolverResult solve_min_max(const DesignProblem& problem, const SolverConfig& config) {
  if (problem.perturbed_nodes.empty()) throw InputError("solve_min_max: perturbed node set is empty");
  return solve_nodes(problem, problem.perturbed_nodes, config, false);
}

ConnectivityResult maximize_connectivity(int num_nodes, const std::vector<NodePair>& edges,
                                         double budget, std::optional<double> target) {
  const Topology t(num_nodes, edges);
  const int n = t.n;
  const int m = t.m();
  if (m == 0 || n < 2) return {Eigen::VectorXd::Zero(m), 0.0};
  const double shift = 3.0;  // above the largest Laplacian eigenvalue for unit budget
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));

  // Eigenpairs of L restricted to 1-perp, ascending.
  auto spectrum = [&](const Eigen::VectorXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.regularized(b, shift));
    Eigen::Index drop = 0;
    (eig.eigenvectors().transpose() * ones).cwiseAbs().maxCoeff(&drop);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != drop) keep.push_back(a);
    Eigen::VectorXd vals(n - 1);
    Eigen::MatrixXd vecs(n, n - 1);
    for (std::size_t c = 0; c < keep.size(); ++c) {
      vals[static_cast<Eigen::Index>(c)] = eig.eigenvalues()[keep[c]];
      vecs.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
    }
    return std::pair{vals, vecs};
  };

  ConnectivityResult best{Eigen::VectorXd::Constant(m, 1.0 / m), 0.0};
  best.lambda2 = spectrum(best.b).first.minCoeff();
  auto reached = [&](double l2) { return target && l2 >= *target; };
  if (reached(best.lambda2)) {
    best.b *= budget;
    best.lambda2 *= budget;
    return best;
  }

  Eigen::VectorXd b = best.b;
  const double scale = 2.0 / (n - 1);
  for (int stage = 1; stage <= 5; ++stage) {
    const double tau = scale * std::pow(10.0, -stage);
    detail::Objective obj = [&](const Eigen::VectorXd& x) -> std::optional<ValueGrad> {
      if ((x.array() < 0.0).any()) return std::nullopt;
      const auto [vals, vecs] = spectrum(x);
      const double low = vals.minCoeff();
      Eigen::VectorXd w = (-(vals.array() - low) / tau).exp().matrix();
      const double z = w.sum();
      ValueGrad out;
      out.value = -(low - tau * std::log(z));
      w /= z;
      out.grad = Eigen::VectorXd::Zero(m);
      for (int l = 0; l < m; ++l) {
        const auto [u, v] = t.edges[static_cast<std::size_t>(l)];
        for (Eigen::Index a = 0; a < vals.size(); ++a) {
          const double d = vecs(u, a) - vecs(v, a);
          out.grad[l] -= w[a] * d * d;
        }
      }
      return out;
    };
    detail::SpgOptions opt;
    opt.pg_tol = 1e-9;
    opt.max_iters = 500;
    opt.early_stop = [&](const Eigen::VectorXd& x, const ValueGrad&) {
      return reached(spectrum(x).first.minCoeff());
    };
    const detail::SpgOutcome out = detail::spg_minimize(obj, b, 1.0, opt);
    b = out.x;
    const double l2 = spectrum(b).first.minCoeff();
    if (l2 > best.lambda2) best = {b, l2};
    if (reached(l2)) break;
  }
  best.b *= budget;
  best.lambda2 *= budget;
  return best;
}

}  // namespace resilnet
