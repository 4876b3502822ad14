#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "resilnet/graph.hpp"

namespace resilnet {

struct Bus {
  enum class Kind { generator, load };
  int id = 0;
  Kind kind = Kind::load;
  /// Net injection, per unit, after mean-centering.
  double power_pu = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  std::optional<double> reactance_pu;
  std::optional<double> susceptance_pu;

  /// 1 / reactance when the reactance is given.
  double susceptance() const;
  bool operator==(const Branch&) const = default;
};

/// Bus/branch network. Buses are kept sorted by id; bus at position p is
/// node p + 1 of the derived graph. Parallel branches merge into one edge
/// whose susceptance is their sum.
struct GridCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  /// Total shift added to every injection to make them sum to zero.
  double injection_shift = 0.0;

  int num_nodes() const { return static_cast<int>(buses.size()); }
  /// 1-based node for a bus id; throws InputError for unknown ids.
  int node_of(int bus_id) const;
  int bus_of(int node) const { return buses[static_cast<std::size_t>(node - 1)].id; }
  std::vector<int> generator_buses() const;

  /// Merged edges (1-based nodes) and their susceptances, in order of
  /// first appearance.
  std::vector<NodePair> edges() const;
  Eigen::VectorXd susceptances() const;
  double total_susceptance() const { return susceptances().sum(); }
  WeightedGraph graph() const;
  /// Natural frequencies: the centered injections, node order.
  Eigen::VectorXd injections() const;

  bool operator==(const GridCase&) const = default;
};

/// Validates, sorts buses and mean-centers the injections. `source` labels
/// error messages.
GridCase normalize_case(GridCase c, const std::string& source = "case");

GridCase case_from_json(const nlohmann::json& j, const std::string& source = "case");
nlohmann::json case_to_json(const GridCase& c);

/// Reads a JSON case (see docs/case-format.md).
GridCase load_case(const std::string& path);
void save_case(const GridCase& c, const std::string& path);

/// Converts the bus/branch matrix layout of MATPOWER-style case files
/// (mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch). Injection is
/// (sum of in-service Pg at the bus - Pd) / baseMVA; a bus is a generator
/// when its net injection is positive, or zero with a generator attached.
/// Out-of-service branches are skipped.
GridCase convert_matpower(std::istream& in, const std::string& name);
GridCase convert_matpower(const std::string& path);

}  // namespace resilnet
