#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "resilnet/dynamics.hpp"
#include "resilnet/errors.hpp"
#include "resilnet/grid_case.hpp"
#include "resilnet/optimizer.hpp"
#include "resilnet/scenario.hpp"
#include "resilnet/sdp.hpp"
#include "resilnet/vulnerability.hpp"

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitInput = 3;

using resilnet::GridCase;
using resilnet::InputError;

/// "1,4,7-9", "all" or "generators" -> bus ids.
std::vector<int> parse_nodes(const std::string& spec, const GridCase& c) {
  if (spec == "all") {
    std::vector<int> ids;
    for (const auto& b : c.buses) ids.push_back(b.id);
    return ids;
  }
  if (spec == "generators") return c.generator_buses();
  std::vector<int> ids;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        ids.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const int lo = std::stoi(item.substr(0, dash));
        const int hi = std::stoi(item.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument(item);
        for (int v = lo; v <= hi; ++v) ids.push_back(v);
      }
    } catch (const std::exception&) {
      throw InputError("bad node list entry '" + item + "'");
    }
  }
  if (ids.empty()) throw InputError("node list is empty");
  for (int id : ids) c.node_of(id);
  return ids;
}

GridCase read_case(const std::string& path) {
  GridCase c = resilnet::load_case(path);
  if (c.injection_shift != 0.0) {
    std::fprintf(stderr, "note: injections shifted by %.6g pu each to sum to zero\n", c.injection_shift);
  }
  return c;
}

/// weights.csv from `design` (edges matched by from/to; column chosen by
/// name, default the last one) or a bare list with one weight per merged
/// edge.
Eigen::VectorXd read_weights(const std::string& path, const GridCase& c, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open weights file " + path);
  const auto edges = c.edges();
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  if (lines.empty()) throw InputError(path + ": no weights");

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    return out;
  };
  auto to_double = [&](const std::string& s, std::size_t line) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() && s.find_first_not_of(" \r\t", used) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
  };

  Eigen::VectorXd b = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(edges.size()), -1.0);
  const auto header = split(lines[0]);
  const auto from_col = std::find(header.begin(), header.end(), "from");
  const auto to_col = std::find(header.begin(), header.end(), "to");
  if (from_col != header.end() && to_col != header.end()) {
    std::size_t col = header.size() - 1;
    if (!column.empty()) {
      const auto it = std::find(header.begin(), header.end(), column);
      if (it == header.end()) throw InputError(path + ": no column '" + column + "'");
      col = static_cast<std::size_t>(it - header.begin());
    }
    const auto fc = static_cast<std::size_t>(from_col - header.begin());
    const auto tc = static_cast<std::size_t>(to_col - header.begin());
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const auto f = split(lines[r]);
      if (f.size() <= std::max({fc, tc, col})) throw InputError(path + ":" + std::to_string(r + 1) + ": too few fields");
      const int a = c.node_of(static_cast<int>(to_double(f[fc], r + 1)));
      const int z = c.node_of(static_cast<int>(to_double(f[tc], r + 1)));
      const auto key = std::minmax(a, z);
      const auto it = std::find_if(edges.begin(), edges.end(),
                                   [&](const resilnet::NodePair& e) { return e.i == key.first && e.j == key.second; });
      if (it == edges.end()) throw InputError(path + ":" + std::to_string(r + 1) + ": edge not in case");
      b[it - edges.begin()] = to_double(f[col], r + 1);
    }
  } else {
    if (lines.size() != edges.size()) {
      throw InputError(path + ": expected " + std::to_string(edges.size()) + " weights, found " +
                       std::to_string(lines.size()));
    }
    for (std::size_t r = 0; r < lines.size(); ++r) b[static_cast<Eigen::Index>(r)] = to_double(lines[r], r + 1);
  }
  if ((b.array() < 0.0).any()) throw InputError(path + ": missing or negative weights");
  return b;
}

int cmd_measure(const std::string& case_path, const std::string& nodes_spec, bool as_json) {
  const GridCase c = read_case(case_path);
  const auto buses = parse_nodes(nodes_spec.empty() ? "all" : nodes_spec, c);
  const resilnet::WeightedGraph g = c.graph();
  const resilnet::SpectralBundle s = resilnet::spectral_bundle(g);
  std::vector<int> nodes;
  for (int id : buses) nodes.push_back(c.node_of(id));
  const auto worst = resilnet::worst_case(s, nodes);
  const double eps = resilnet::epsilon_from_sync(c.injections(), c.edges(), resilnet::kDefaultGamma);

  if (as_json) {
    nlohmann::json j;
    j["case"] = c.name;
    j["budget"] = c.total_susceptance();
    j["lambda2"] = s.lambda2();
    j["epsilon"] = eps;
    j["lower_bound"] = resilnet::lower_bound(s);
    j["worst_bus"] = c.bus_of(worst.node);
    j["worst_measure"] = worst.measure;
    j["measures"] = nlohmann::json::array();
    for (int id : buses) j["measures"].push_back({{"bus", id}, {"measure", resilnet::vulnerability_measure(s, c.node_of(id))}});
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::printf("# case %s: %d buses, %zu edges, budget %.10g\n", c.name.c_str(), c.num_nodes(), c.edges().size(),
              c.total_susceptance());
  std::printf("# lambda2 %.10g, epsilon(gamma=pi/16) %.10g, lower bound %.10g\n", s.lambda2(), eps,
              resilnet::lower_bound(s));
  std::printf("bus,measure\n");
  for (int id : buses) std::printf("%d,%.17g\n", id, resilnet::vulnerability_measure(s, c.node_of(id)));
  std::printf("# worst bus %d, measure %.10g\n", c.bus_of(worst.node), worst.measure);
  return 0;
}

int cmd_design(const std::string& case_path, const std::string& mode, const std::string& nodes_spec,
               double gamma, std::optional<double> epsilon, const std::string& out_dir) {
  const GridCase c = read_case(case_path);
  const auto buses = parse_nodes(nodes_spec, c);
  resilnet::ScenarioOptions opt;
  opt.gamma = gamma;
  opt.epsilon = epsilon;
  const resilnet::ScenarioReport r =
      mode == "single" ? resilnet::scenario_one(c, buses, opt) : resilnet::scenario_two(c, buses, opt);

  std::printf("bus,before,after\n");
  for (const auto& [bus, o] : r.per_node) {
    if (o.after) std::printf("%d,%.10g,%.10g\n", bus, o.before, *o.after);
    else std::printf("%d,%.10g,infeasible\n", bus, o.before);
  }
  if (mode == "single") {
    std::printf("# best bus before %d", *r.best_node_before);
    if (r.best_node_after) std::printf(", after %d", *r.best_node_after);
    std::printf("\n");
  } else {
    std::printf("# max before %.10g, after %.10g; sum before %.10g, after %.10g\n", r.objective_before,
                r.objective_after, r.sum_before, r.sum_after);
    if (!r.increased.empty()) {
      std::printf("# measure increased at");
      for (int b : r.increased) std::printf(" %d", b);
      std::printf("\n");
    }
  }
  std::printf("# epsilon %.10g, lambda2 %.10g, b0 feasible %s\n", r.sync.epsilon, r.sync.lambda2,
              r.b0_feasible ? "yes" : "no");
  if (!r.sync.ok) std::fprintf(stderr, "warning: %s\n", r.sync.warning.c_str());
  if (!out_dir.empty()) {
    for (const auto& p : resilnet::emit_report(r, out_dir)) std::fprintf(stderr, "wrote %s\n", p.c_str());
  }
  if (mode == "single" && !r.best_node_after) return kExitInfeasible;
  return 0;
}

struct SimulateArgs {
  std::string case_path, weights_path, column, noise, model = "nonlinear", trajectories;
  int bus = 0;
  std::uint64_t seed = 1;
  resilnet::SimConfig sim;
  std::optional<double> tau, sigma, amplitude, start, duration;
};

int cmd_simulate(SimulateArgs a) {
  const GridCase c = read_case(a.case_path);
  const int k = c.node_of(a.bus);
  const Eigen::VectorXd b = read_weights(a.weights_path, c, a.column);
  const resilnet::WeightedGraph g(c.num_nodes(), c.edges(), b);
  const Eigen::VectorXd omega = c.injections();

  resilnet::NoiseSpec spec;
  if (a.noise == "ou") {
    const double spread = omega.size() ? omega.maxCoeff() - omega.minCoeff() : 0.0;
    spec = resilnet::NoiseSpec::ou(k, a.tau.value_or(50.0),
                                   a.sigma.value_or(spread > 0.0 ? 0.05 * std::min(spread, 1.0) : 0.05));
  } else {
    spec = resilnet::NoiseSpec::box(k, a.amplitude.value_or(0.1), a.start.value_or(10.0), a.duration.value_or(20.0));
  }
  a.sim.seed = a.seed;
  a.sim.keep_trajectories = !a.trajectories.empty();

  const resilnet::SteadyState st = resilnet::steady_state(g, omega);
  const resilnet::TrajectoryEnsemble traj = a.model == "linearized"
                                                ? resilnet::integrate_linearized(g, st, spec, a.sim)
                                                : resilnet::integrate_nonlinear(g, omega, st.theta0, spec, a.sim);
  const auto emp = resilnet::empirical_vulnerability(traj);
  const double analytic = resilnet::vulnerability_measure(g, k);

  std::printf("bus %d, noise %s, model %s, realizations %d, h %g, T %g\n", a.bus, a.noise.c_str(), a.model.c_str(),
              emp.realizations, a.sim.h, a.sim.horizon);
  std::printf("empirical %.10g +- %.3g (standard error)\n", emp.value, emp.std_error);
  std::printf("analytic %.10g\n", analytic);
  std::printf("empirical / analytic %.10g\n", emp.value / analytic);
  std::printf("steady-state max angle gap %.6g, run max angle gap %.6g\n", st.max_angle_gap, traj.max_angle_gap);
  if (emp.single_realization) std::fprintf(stderr, "warning: one realization, no ensemble averaging\n");
  if (!a.trajectories.empty()) {
    resilnet::write_trajectory_csv(traj, a.trajectories);
    std::fprintf(stderr, "wrote %s\n", a.trajectories.c_str());
  }
  return 0;
}

int cmd_export_sdp(const std::string& case_path, const std::string& nodes_spec, const std::string& out,
                   double gamma, std::optional<double> epsilon) {
  const GridCase c = read_case(case_path);
  resilnet::ScenarioOptions opt;
  opt.gamma = gamma;
  opt.epsilon = epsilon;
  const auto problem = resilnet::case_problem(c, parse_nodes(nodes_spec, c), opt);
  const resilnet::SdpData sdp = resilnet::assemble_sdp(problem);
  resilnet::write_sdpa(sdp, out);
  std::fprintf(stderr, "wrote %s: dimension %d, %zu constraints\n", out.c_str(), sdp.dimension, sdp.constraints.size());
  return 0;
}

int cmd_convert(const std::string& in, const std::string& out) {
  const GridCase c = resilnet::convert_matpower(in);
  resilnet::save_case(c, out);
  std::fprintf(stderr, "wrote %s: %d buses, %zu branches, %zu generators\n", out.c_str(), c.num_nodes(),
               c.branches.size(), c.generator_buses().size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability analysis and edge-weight design for oscillator networks"};
  app.require_subcommand(1);

  std::string case_path, nodes, mode, out;
  double gamma = resilnet::kDefaultGamma;
  std::optional<double> epsilon;
  bool as_json = false;

  auto* measure = app.add_subcommand("measure", "Vulnerability of each bus under the case's own susceptances");
  measure->add_option("--case", case_path, "Case JSON")->required();
  measure->add_option("--nodes", nodes, "Bus list, e.g. 1,4,7-9, 'all' or 'generators'");
  measure->add_flag("--json", as_json, "Print JSON");

  auto* design = app.add_subcommand("design", "Reallocate susceptance (single: per bus; minmax: worst case over the list)");
  design->add_option("--case", case_path)->required();
  design->add_option("--mode", mode)->required()->check(CLI::IsMember({"single", "minmax"}));
  design->add_option("--nodes", nodes)->required();
  design->add_option("--gamma", gamma, "Angle parameter in radians")->check(CLI::Range(0.0, 1.5707963267948966));
  design->add_option("--epsilon", epsilon, "Spectral floor, physical units (overrides the derived one)");
  design->add_option("--out", out, "Report directory");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Noisy oscillator simulation and empirical vulnerability");
  simulate->add_option("--case", sim.case_path)->required();
  simulate->add_option("--weights", sim.weights_path, "weights.csv from design, or one weight per line")->required();
  simulate->add_option("--column", sim.column, "Weight column (default: last)");
  simulate->add_option("--noise", sim.noise)->required()->check(CLI::IsMember({"ou", "box"}));
  simulate->add_option("--node", sim.bus, "Perturbed bus")->required();
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--model", sim.model)->check(CLI::IsMember({"nonlinear", "linearized"}));
  simulate->add_option("--step", sim.sim.h, "Integration step");
  simulate->add_option("--horizon", sim.sim.horizon);
  simulate->add_option("--realizations", sim.sim.realizations);
  simulate->add_option("--stride", sim.sim.record_stride, "Record every n-th step");
  simulate->add_option("--tau", sim.tau);
  simulate->add_option("--sigma", sim.sigma);
  simulate->add_option("--amplitude", sim.amplitude);
  simulate->add_option("--start", sim.start);
  simulate->add_option("--duration", sim.duration);
  simulate->add_option("--trajectories", sim.trajectories, "Write trajectory CSV here");

  std::string sdp_out;
  auto* export_sdp = app.add_subcommand("export-sdp", "Write the design problem in SDPA sparse format");
  export_sdp->add_option("--case", case_path)->required();
  export_sdp->add_option("--nodes", nodes)->required();
  export_sdp->add_option("--out", sdp_out)->required();
  export_sdp->add_option("--gamma", gamma)->check(CLI::Range(0.0, 1.5707963267948966));
  export_sdp->add_option("--epsilon", epsilon);

  std::string mp_in;
  auto* convert = app.add_subcommand("convert", "Convert a MATPOWER-style bus/branch file to case JSON");
  convert->add_option("--matpower", mp_in)->required();
  convert->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*measure) return cmd_measure(case_path, nodes, as_json);
    if (*design) return cmd_design(case_path, mode, nodes, gamma, epsilon, out);
    if (*simulate) return cmd_simulate(sim);
    if (*export_sdp) return cmd_export_sdp(case_path, nodes, sdp_out, gamma, epsilon);
    if (*convert) return cmd_convert(mp_in, out);
  } catch (const resilnet::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const resilnet::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const resilnet::DisconnectedError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
