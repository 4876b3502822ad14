#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "resilnet/grid_case.hpp"
#include "resilnet/optimizer.hpp"

namespace resilnet {

/// Measures are in physical units: M_k for the case's own susceptances,
/// so M(c b) = M(b) / c translates from the unit-budget solve.
struct NodeOutcome {
  double before = 0.0;
  std::optional<double> after;
  /// Solve failed under the spectral floor; excluded from rankings.
  bool infeasible = false;
  std::string note;

  bool operator==(const NodeOutcome&) const = default;
};

struct SyncCheck {
  double gamma = kDefaultGamma;
  double epsilon = 0.0;
  double lambda2 = 0.0;
  /// Largest steady-state edge angle gap; nullopt when no synchronized
  /// state was found.
  std::optional<double> max_angle_gap;
  bool ok = false;
  std::string warning;

  bool operator==(const SyncCheck&) const = default;
};

struct ScenarioReport {
  std::string scenario;  // "one" or "two"
  std::string case_name;
  double budget = 0.0;  // total susceptance
  /// Edges as bus-id pairs, merged order.
  std::vector<std::pair<int, int>> edges;
  Eigen::VectorXd b0;
  /// Keyed by bus id.
  std::map<int, NodeOutcome> per_node;
  std::optional<int> best_node_before;
  std::optional<int> best_node_after;
  /// Scenario one: b_k* per candidate bus. Scenario two: key 0 holds b*.
  std::map<int, Eigen::VectorXd> b_out;
  /// Scenario one: min over candidates; scenario two: max over V'.
  double objective_before = 0.0;
  double objective_after = 0.0;
  double sum_before = 0.0;
  double sum_after = 0.0;
  /// Scenario two: buses whose measure went up.
  std::vector<int> increased;
  bool b0_feasible = false;
  /// Scenario one: check for the best node's design; scenario two: for b*.
  SyncCheck sync;

  bool operator==(const ScenarioReport&) const;
};

struct ScenarioOptions {
  double gamma = kDefaultGamma;
  /// Overrides the floor derived from the injections (physical units).
  std::optional<double> epsilon;
  SolverConfig solver;
  /// Cap on worker threads for scenario one; 0 uses thread_budget().
  int threads = 0;
};

/// For each candidate bus k: M_k(b0) and M_k(b_k*), b_k* = argmin M_k.
ScenarioReport scenario_one(const GridCase& c, const std::vector<int>& candidate_buses,
                            const ScenarioOptions& opt = {});

/// One min-max solve over V'. Throws InfeasibleError when the floor is
/// unreachable.
ScenarioReport scenario_two(const GridCase& c, const std::vector<int>& buses,
                            const ScenarioOptions& opt = {});

/// Design problem of a case in physical units (budget = total susceptance).
DesignProblem case_problem(const GridCase& c, const std::vector<int>& buses, const ScenarioOptions& opt);

SyncCheck sync_check(const GridCase& c, const Eigen::VectorXd& b, double gamma, double epsilon);

nlohmann::json report_to_json(const ScenarioReport& r);
ScenarioReport report_from_json(const nlohmann::json& j);

/// Writes report.json, measures.csv, weights.csv, figdata_bars.csv,
/// figdata_nodes.csv and figdata_edges.csv into out_dir (created if
/// missing). Returns the written paths.
std::vector<std::string> emit_report(const ScenarioReport& r, const std::string& out_dir);

}  // namespace resilnet
