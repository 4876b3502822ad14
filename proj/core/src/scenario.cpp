#include "resilnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "resilnet/dynamics.hpp"
#include "resilnet/errors.hpp"
#include "resilnet/parallel.hpp"
#include "resilnet/vulnerability.hpp"

namespace resilnet {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> to_nodes(const GridCase& c, const std::vector<int>& buses) {
  if (buses.empty()) throw InputError("node list is empty");
  std::set<int> seen;
  std::vector<int> nodes;
  for (int id : buses) {
    if (!seen.insert(id).second) throw InputError("bus " + std::to_string(id) + " listed twice");
    nodes.push_back(c.node_of(id));
  }
  return nodes;
}

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> json_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

ScenarioReport base_report(const GridCase& c, const std::string& scenario) {
  ScenarioReport r;
  r.scenario = scenario;
  r.case_name = c.name;
  r.budget = c.total_susceptance();
  for (const auto& e : c.edges()) r.edges.emplace_back(c.bus_of(e.i), c.bus_of(e.j));
  r.b0 = c.susceptances();
  return r;
}

void open_for_write(std::ofstream& out, const std::string& path) {
  out.open(path);
  if (!out) throw Error("cannot open " + path + " for writing");
}

}  // namespace

bool ScenarioReport::operator==(const ScenarioReport& o) const {
  if (b_out.size() != o.b_out.size()) return false;
  for (const auto& [k, v] : b_out) {
    const auto it = o.b_out.find(k);
    if (it == o.b_out.end() || !same(v, it->second)) return false;
  }
  return scenario == o.scenario && case_name == o.case_name && budget == o.budget && edges == o.edges &&
         same(b0, o.b0) && per_node == o.per_node && best_node_before == o.best_node_before &&
         best_node_after == o.best_node_after && objective_before == o.objective_before &&
         objective_after == o.objective_after && sum_before == o.sum_before && sum_after == o.sum_after &&
         increased == o.increased && b0_feasible == o.b0_feasible && sync == o.sync;
}

DesignProblem case_problem(const GridCase& c, const std::vector<int>& buses, const ScenarioOptions& opt) {
  DesignProblem p;
  p.num_nodes = c.num_nodes();
  p.edges = c.edges();
  p.perturbed_nodes = to_nodes(c, buses);
  p.natural_frequencies = c.injections();
  p.gamma = opt.gamma;
  p.epsilon = opt.epsilon;
  p.budget = c.total_susceptance();
  return p;
}

SyncCheck sync_check(const GridCase& c, const Eigen::VectorXd& b, double gamma, double epsilon) {
  SyncCheck s;
  s.gamma = gamma;
  s.epsilon = epsilon;
  const WeightedGraph g(c.num_nodes(), c.edges(), b);
  s.lambda2 = algebraic_connectivity(g);
  try {
    const SteadyState st = steady_state(g, c.injections());
    s.max_angle_gap = st.max_angle_gap;
    s.ok = st.max_angle_gap <= gamma;
    if (!s.ok) {
      s.warning = "steady-state angle gap " + num(st.max_angle_gap) + " exceeds gamma " + num(gamma) +
                  "; the spectral floor is sufficient only for a wide class of networks";
    }
  } catch (const ConvergenceError& e) {
    s.ok = false;
    s.warning = e.what();
  }
  return s;
}

ScenarioReport scenario_one(const GridCase& c, const std::vector<int>& candidate_buses,
                            const ScenarioOptions& opt) {
  const auto gens = c.generator_buses();
  for (int id : candidate_buses) {
    if (!std::binary_search(gens.begin(), gens.end(), id)) {
      throw InputError("candidate bus " + std::to_string(id) + " is not a generator bus");
    }
  }
  const DesignProblem problem = case_problem(c, candidate_buses, opt);
  problem.validate();
  const double eps = problem.spectral_floor();

  ScenarioReport r = base_report(c, "one");
  const WeightedGraph g0 = c.graph();
  const SpectralBundle s0 = spectral_bundle(g0);
  r.b0_feasible = s0.lambda2() >= eps;

  const auto count = static_cast<int>(candidate_buses.size());
  std::vector<std::optional<SolverResult>> results(static_cast<std::size_t>(count));
  std::vector<std::string> notes(static_cast<std::size_t>(count));
  parallel_for(
      count,
      [&](int i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
          results[idx] = solve_single_node(problem, problem.perturbed_nodes[idx], opt.solver);
        } catch (const InfeasibleError& e) {
          notes[idx] = e.what();
        }
      },
      opt.threads > 0 ? opt.threads : thread_budget());

  for (int i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const int bus = candidate_buses[idx];
    NodeOutcome& o = r.per_node[bus];
    o.before = vulnerability_measure(s0, problem.perturbed_nodes[idx]);
    if (results[idx]) {
      o.after = results[idx]->objective;
      if (!results[idx]->converged) o.note = "solver stopped before meeting its tolerance";
      r.b_out[bus] = results[idx]->b_star;
    } else {
      o.infeasible = true;
      o.note = notes[idx];
    }
  }

  // Rankings: smallest measure wins, ties (to rounding) to the smallest bus id.
  auto beats = [](double a, double b) { return a < b * (1.0 - 1e-12); };
  for (const auto& [bus, o] : r.per_node) {
    if (!r.best_node_before || beats(o.before, r.per_node[*r.best_node_before].before)) r.best_node_before = bus;
    if (o.after && (!r.best_node_after || beats(*o.after, *r.per_node[*r.best_node_after].after))) r.best_node_after = bus;
    r.sum_before += o.before;
    if (o.after) r.sum_after += *o.after;
  }
  r.objective_before = r.per_node[*r.best_node_before].before;
  if (r.best_node_after) {
    r.objective_after = *r.per_node[*r.best_node_after].after;
    r.sync = sync_check(c, r.b_out[*r.best_node_after], opt.gamma, eps);
  } else {
    r.objective_after = r.objective_before;
    r.sync = sync_check(c, r.b0, opt.gamma, eps);
  }
  r.sync.epsilon = eps;
  return r;
}

ScenarioReport scenario_two(const GridCase& c, const std::vector<int>& buses, const ScenarioOptions& opt) {
  const DesignProblem problem = case_problem(c, buses, opt);
  const SolverResult res = solve_min_max(problem, opt.solver);
  const double eps = problem.spectral_floor();

  ScenarioReport r = base_report(c, "two");
  const SpectralBundle s0 = spectral_bundle(c.graph());
  r.b0_feasible = s0.lambda2() >= eps;
  r.b_out[0] = res.b_star;
  r.objective_before = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < buses.size(); ++i) {
    NodeOutcome& o = r.per_node[buses[i]];
    const int k = problem.perturbed_nodes[i];
    o.before = vulnerability_measure(s0, k);
    o.after = res.per_node.at(k);
    if (!res.converged) o.note = "solver stopped before meeting its tolerance";
    r.objective_before = std::max(r.objective_before, o.before);
  }
  for (const auto& [bus, o] : r.per_node) {
    r.sum_before += o.before;
    r.sum_after += *o.after;
    if (*o.after > o.before * (1.0 + 1e-12)) r.increased.push_back(bus);
  }
  r.objective_after = res.objective;
  r.sync = sync_check(c, res.b_star, opt.gamma, eps);
  return r;
}

json report_to_json(const ScenarioReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["case"] = r.case_name;
  j["budget"] = r.budget;
  j["edges"] = json::array();
  for (const auto& [a, b] : r.edges) j["edges"].push_back({a, b});
  j["b0"] = vec_json(r.b0);
  j["per_node"] = json::array();
  for (const auto& [bus, o] : r.per_node) {
    j["per_node"].push_back({{"bus", bus},
                             {"before", o.before},
                             {"after", opt_json(o.after)},
                             {"infeasible", o.infeasible},
                             {"note", o.note}});
  }
  j["best_node_before"] = opt_json(r.best_node_before);
  j["best_node_after"] = opt_json(r.best_node_after);
  j["b_out"] = json::array();
  for (const auto& [bus, v] : r.b_out) j["b_out"].push_back({{"bus", bus}, {"b", vec_json(v)}});
  j["objective_before"] = r.objective_before;
  j["objective_after"] = r.objective_after;
  j["sum_before"] = r.sum_before;
  j["sum_after"] = r.sum_after;
  j["increased"] = r.increased;
  j["b0_feasible"] = r.b0_feasible;
  j["sync_check"] = {{"gamma", r.sync.gamma},
                     {"epsilon", r.sync.epsilon},
                     {"lambda2", r.sync.lambda2},
                     {"max_angle_gap", opt_json(r.sync.max_angle_gap)},
                     {"ok", r.sync.ok},
                     {"warning", r.sync.warning}};
  return j;
}

ScenarioReport report_from_json(const json& j) {
  try {
    ScenarioReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.case_name = j.at("case").get<std::string>();
    r.budget = j.at("budget").get<double>();
    for (const auto& e : j.at("edges")) r.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    r.b0 = json_vec(j.at("b0"));
    for (const auto& p : j.at("per_node")) {
      NodeOutcome o;
      o.before = p.at("before").get<double>();
      o.after = json_opt<double>(p.at("after"));
      o.infeasible = p.at("infeasible").get<bool>();
      o.note = p.at("note").get<std::string>();
      r.per_node[p.at("bus").get<int>()] = o;
    }
    r.best_node_before = json_opt<int>(j.at("best_node_before"));
    r.best_node_after = json_opt<int>(j.at("best_node_after"));
    for (const auto& b : j.at("b_out")) r.b_out[b.at("bus").get<int>()] = json_vec(b.at("b"));
    r.objective_before = j.at("objective_before").get<double>();
    r.objective_after = j.at("objective_after").get<double>();
    r.sum_before = j.at("sum_before").get<double>();
    r.sum_after = j.at("sum_after").get<double>();
    r.increased = j.at("increased").get<std::vector<int>>();
    r.b0_feasible = j.at("b0_feasible").get<bool>();
    const json& s = j.at("sync_check");
    r.sync.gamma = s.at("gamma").get<double>();
    r.sync.epsilon = s.at("epsilon").get<double>();
    r.sync.lambda2 = s.at("lambda2").get<double>();
    r.sync.max_angle_gap = json_opt<double>(s.at("max_angle_gap"));
    r.sync.ok = s.at("ok").get<bool>();
    r.sync.warning = s.at("warning").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

std::vector<std::string> emit_report(const ScenarioReport& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir + ": " + ec.message());
  std::vector<std::string> written;
  auto path = [&](const char* name) {
    written.push_back((fs::path(out_dir) / name).string());
    return written.back();
  };
  std::ofstream out;

  open_for_write(out, path("report.json"));
  out << report_to_json(r).dump(2) << '\n';
  out.close();

  open_for_write(out, path("measures.csv"));
  out << "bus,before,after\n";
  for (const auto& [bus, o] : r.per_node) out << bus << ',' << num(o.before) << ',' << (o.after ? num(*o.after) : "") << '\n';
  out.close();

  open_for_write(out, path("weights.csv"));
  out << "edge,from,to,b0";
  for (const auto& [bus, v] : r.b_out) {
    if (r.scenario == "two") out << ",b_star";
    else out << ",b_star_" << bus;
  }
  out << '\n';
  for (std::size_t l = 0; l < r.edges.size(); ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    out << l + 1 << ',' << r.edges[l].first << ',' << r.edges[l].second << ',' << num(r.b0[li]);
    for (const auto& [bus, v] : r.b_out) out << ',' << num(v[li]);
    out << '\n';
  }
  out.close();

  open_for_write(out, path("figdata_bars.csv"));
  out << "bus,before,after,change_pct\n";
  for (const auto& [bus, o] : r.per_node) {
    out << bus << ',' << num(o.before) << ',';
    if (o.after) out << num(*o.after) << ',' << num(100.0 * (*o.after - o.before) / o.before);
    else out << ',';
    out << '\n';
  }
  out.close();

  // Node colouring: rank 1 is the least vulnerable.
  open_for_write(out, path("figdata_nodes.csv"));
  out << "bus,before,after,rank_before,rank_after\n";
  {
    std::vector<std::pair<double, int>> before, after;
    for (const auto& [bus, o] : r.per_node) {
      before.emplace_back(o.before, bus);
      if (o.after) after.emplace_back(*o.after, bus);
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    std::map<int, int> rb, ra;
    for (std::size_t i = 0; i < before.size(); ++i) rb[before[i].second] = static_cast<int>(i) + 1;
    for (std::size_t i = 0; i < after.size(); ++i) ra[after[i].second] = static_cast<int>(i) + 1;
    for (const auto& [bus, o] : r.per_node) {
      out << bus << ',' << num(o.before) << ',' << (o.after ? num(*o.after) : "") << ',' << rb[bus] << ','
          << (ra.count(bus) ? std::to_string(ra[bus]) : "") << '\n';
    }
  }
  out.close();

  // Edge colouring for the headline design.
  open_for_write(out, path("figdata_edges.csv"));
  out << "from,to,b0,b_design,share_b0,share_design\n";
  {
    const Eigen::VectorXd* design = nullptr;
    if (r.scenario == "two" && r.b_out.count(0)) design = &r.b_out.at(0);
    if (r.scenario == "one" && r.best_node_after) design = &r.b_out.at(*r.best_node_after);
    for (std::size_t l = 0; l < r.edges.size(); ++l) {
      const auto li = static_cast<Eigen::Index>(l);
      const double d = design ? (*design)[li] : r.b0[li];
      out << r.edges[l].first << ',' << r.edges[l].second << ',' << num(r.b0[li]) << ',' << num(d) << ','
          << num(r.b0[li] / r.budget) << ',' << num(d / r.budget) << '\n';
    }
  }
  out.close();
  if (!out) throw Error("write failed in " + out_dir);
  return written;
}

}  // namespace resilnet
