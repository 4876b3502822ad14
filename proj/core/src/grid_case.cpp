#include "resilnet/grid_case.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "resilnet/errors.hpp"

namespace resilnet {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + ": must be finite");
  return d;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw InputError(where + ": expected an integer");
  return v.get<int>();
}

std::string kind_name(Bus::Kind k) { return k == Bus::Kind::generator ? "generator" : "load"; }

/// Rows of `mpc.<name> = [ ... ];`, comments stripped.
std::vector<std::vector<double>> matpower_matrix(const std::string& text, const std::string& name,
                                                 bool required) {
  const std::string key = "mpc." + name;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    const std::size_t after = pos + key.size();
    const std::size_t eq = text.find_first_not_of(" \t", after);
    if (eq != std::string::npos && text[eq] == '=') break;
    pos = after;
  }
  if (pos == std::string::npos) {
    if (required) throw InputError("matpower: no '" + key + "' matrix");
    return {};
  }
  const std::size_t open = text.find('[', pos);
  const std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos) {
    throw InputError("matpower: unterminated '" + key + "' matrix");
  }
  std::vector<std::vector<double>> rows;
  std::istringstream body(text.substr(open + 1, close - open - 1));
  std::string line;
  while (std::getline(body, line)) {
    if (const auto pct = line.find('%'); pct != std::string::npos) line.erase(pct);
    std::stringstream pieces(line);
    std::string piece;
    while (std::getline(pieces, piece, ';')) {
      std::replace(piece.begin(), piece.end(), ',', ' ');
      std::istringstream nums(piece);
      std::vector<double> row;
      std::string tok;
      while (nums >> tok) {
        try {
          row.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw InputError("matpower: bad number '" + tok + "' in '" + key + "'");
        }
      }
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

double Branch::susceptance() const {
  if (susceptance_pu) return *susceptance_pu;
  if (reactance_pu) return 1.0 / *reactance_pu;
  throw InputError("branch has neither reactance nor susceptance");
}

int GridCase::node_of(int bus_id) const {
  const auto it = std::lower_bound(buses.begin(), buses.end(), bus_id,
                                   [](const Bus& b, int id) { return b.id < id; });
  if (it == buses.end() || it->id != bus_id) throw InputError("unknown bus id " + std::to_string(bus_id));
  return static_cast<int>(it - buses.begin()) + 1;
}

std::vector<int> GridCase::generator_buses() const {
  std::vector<int> out;
  for (const auto& b : buses)
    if (b.kind == Bus::Kind::generator) out.push_back(b.id);
  return out;
}

std::vector<NodePair> GridCase::edges() const {
  std::vector<NodePair> out;
  std::set<std::pair<int, int>> seen;
  for (const auto& br : branches) {
    const int a = node_of(br.from);
    const int b = node_of(br.to);
    const auto key = std::minmax(a, b);
    if (seen.insert(key).second) out.push_back({key.first, key.second});
  }
  return out;
}

Eigen::VectorXd GridCase::susceptances() const {
  const auto e = edges();
  std::map<std::pair<int, int>, int> index;
  for (std::size_t l = 0; l < e.size(); ++l) index[{e[l].i, e[l].j}] = static_cast<int>(l);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.size()));
  for (const auto& br : branches) {
    const int a = node_of(br.from);
    const int b = node_of(br.to);
    s[index.at({std::min(a, b), std::max(a, b)})] += br.susceptance();
  }
  return s;
}

WeightedGraph GridCase::graph() const { return WeightedGraph(num_nodes(), edges(), susceptances()); }

Eigen::VectorXd GridCase::injections() const {
  Eigen::VectorXd w(num_nodes());
  for (int p = 0; p < num_nodes(); ++p) w[p] = buses[static_cast<std::size_t>(p)].power_pu;
  return w;
}

GridCase normalize_case(GridCase c, const std::string& source) {
  if (c.buses.size() < 2) throw InputError(source + ": need at least two buses");
  if (c.branches.empty()) throw InputError(source + ": no branches");
  std::stable_sort(c.buses.begin(), c.buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  double scale = 0.0;
  for (std::size_t p = 0; p < c.buses.size(); ++p) {
    const Bus& b = c.buses[p];
    if (p > 0 && c.buses[p - 1].id == b.id) throw InputError(source + ": duplicate bus id " + std::to_string(b.id));
    if (!std::isfinite(b.power_pu)) throw InputError(source + ": bus " + std::to_string(b.id) + " power is not finite");
    scale = std::max(scale, std::abs(b.power_pu));
  }
  const double tol = 1e-12 * std::max(1.0, scale);
  for (const Bus& b : c.buses) {
    const double raw = b.power_pu - c.injection_shift;
    if (b.kind == Bus::Kind::generator && raw < -tol) {
      throw InputError(source + ": generator bus " + std::to_string(b.id) + " has negative injection");
    }
    if (b.kind == Bus::Kind::load && raw > tol) {
      throw InputError(source + ": load bus " + std::to_string(b.id) + " has positive injection");
    }
  }
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    const Branch& br = c.branches[l];
    const std::string where = source + ": branches[" + std::to_string(l) + "]";
    c.node_of(br.from);
    c.node_of(br.to);
    if (br.from == br.to) throw InputError(where + ": self-loop at bus " + std::to_string(br.from));
    if (br.reactance_pu.has_value() == br.susceptance_pu.has_value()) {
      throw InputError(where + ": give exactly one of reactance_pu and susceptance_pu");
    }
    const double v = br.reactance_pu ? *br.reactance_pu : *br.susceptance_pu;
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(where + ": reactance/susceptance must be positive");
  }

  double mean = 0.0;
  for (const Bus& b : c.buses) mean += b.power_pu;
  mean /= static_cast<double>(c.buses.size());
  if (std::abs(mean) > 1e-15 * std::max(1.0, scale)) {
    for (Bus& b : c.buses) b.power_pu -= mean;
    c.injection_shift -= mean;
  }
  return c;
}

GridCase case_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) throw InputError(source + ": top level must be an object");
  GridCase c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw InputError(source + ": name: expected a string");
    c.name = j["name"].get<std::string>();
  }
  if (j.contains("injection_shift_pu")) c.injection_shift = number(j["injection_shift_pu"], source + ": injection_shift_pu");

  const json& buses = field(j, "buses", source);
  if (!buses.is_array()) throw InputError(source + ": buses: expected an array");
  for (std::size_t p = 0; p < buses.size(); ++p) {
    const std::string where = source + ": buses[" + std::to_string(p) + "]";
    const json& b = buses[p];
    Bus bus;
    bus.id = integer(field(b, "id", where), where + ".id");
    const json& kind = field(b, "kind", where);
    if (kind == "generator") {
      bus.kind = Bus::Kind::generator;
    } else if (kind == "load") {
      bus.kind = Bus::Kind::load;
    } else {
      throw InputError(where + ".kind: expected \"generator\" or \"load\"");
    }
    bus.power_pu = number(field(b, "power_pu", where), where + ".power_pu");
    c.buses.push_back(bus);
  }

  const json& branches = field(j, "branches", source);
  if (!branches.is_array()) throw InputError(source + ": branches: expected an array");
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const std::string where = source + ": branches[" + std::to_string(l) + "]";
    const json& b = branches[l];
    Branch br;
    br.from = integer(field(b, "from", where), where + ".from");
    br.to = integer(field(b, "to", where), where + ".to");
    const bool has_x = b.contains("reactance_pu");
    const bool has_b = b.contains("susceptance_pu");
    if (has_x && has_b) throw InputError(where + ": both reactance_pu and susceptance_pu given");
    if (!has_x && !has_b) throw InputError(where + ": missing reactance_pu or susceptance_pu");
    if (has_x) br.reactance_pu = number(b["reactance_pu"], where + ".reactance_pu");
    if (has_b) br.susceptance_pu = number(b["susceptance_pu"], where + ".susceptance_pu");
    c.branches.push_back(br);
  }
  return normalize_case(std::move(c), source);
}

json case_to_json(const GridCase& c) {
  json j;
  j["name"] = c.name;
  j["injection_shift_pu"] = c.injection_shift;
  j["buses"] = json::array();
  for (const Bus& b : c.buses) j["buses"].push_back({{"id", b.id}, {"kind", kind_name(b.kind)}, {"power_pu", b.power_pu}});
  j["branches"] = json::array();
  for (const Branch& br : c.branches) {
    json e{{"from", br.from}, {"to", br.to}};
    if (br.reactance_pu) e["reactance_pu"] = *br.reactance_pu;
    if (br.susceptance_pu) e["susceptance_pu"] = *br.susceptance_pu;
    j["branches"].push_back(e);
  }
  return j;
}

GridCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open case file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return case_from_json(j, path);
}

void save_case(const GridCase& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << case_to_json(c).dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

GridCase convert_matpower(std::istream& in, const std::string& name) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  double base = 100.0;
  if (const auto pos = text.find("mpc.baseMVA"); pos != std::string::npos) {
    const auto eq = text.find('=', pos);
    if (eq == std::string::npos) throw InputError("matpower: malformed mpc.baseMVA");
    try {
      base = std::stod(text.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("matpower: malformed mpc.baseMVA");
    }
    if (!(base > 0.0)) throw InputError("matpower: baseMVA must be positive");
  }

  const auto bus_rows = matpower_matrix(text, "bus", true);
  const auto gen_rows = matpower_matrix(text, "gen", false);
  const auto branch_rows = matpower_matrix(text, "branch", true);

  // bus_i type Pd ...
  std::map<int, double> pd, pg;
  std::map<int, bool> hosts;
  std::vector<int> order;
  for (std::size_t r = 0; r < bus_rows.size(); ++r) {
    if (bus_rows[r].size() < 3) throw InputError("matpower: bus row " + std::to_string(r + 1) + " has fewer than 3 columns");
    const int id = static_cast<int>(bus_rows[r][0]);
    order.push_back(id);
    pd[id] = bus_rows[r][2];
    pg[id] = 0.0;
    hosts[id] = false;
  }
  // bus Pg Qg Qmax Qmin Vg mBase status ...
  for (std::size_t r = 0; r < gen_rows.size(); ++r) {
    const auto& row = gen_rows[r];
    if (row.size() < 2) throw InputError("matpower: gen row " + std::to_string(r + 1) + " has fewer than 2 columns");
    const int id = static_cast<int>(row[0]);
    if (!pg.count(id)) throw InputError("matpower: gen row " + std::to_string(r + 1) + " refers to unknown bus " + std::to_string(id));
    if (row.size() >= 8 && row[7] <= 0.0) continue;
    pg[id] += row[1];
    hosts[id] = true;
  }

  GridCase c;
  c.name = name;
  for (int id : order) {
    Bus b;
    b.id = id;
    b.power_pu = (pg[id] - pd[id]) / base;
    const bool gen = b.power_pu > 0.0 || (hosts[id] && b.power_pu == 0.0);
    b.kind = gen ? Bus::Kind::generator : Bus::Kind::load;
    c.buses.push_back(b);
  }
  // fbus tbus r x b rateA rateB rateC ratio angle status ...
  for (std::size_t r = 0; r < branch_rows.size(); ++r) {
    const auto& row = branch_rows[r];
    if (row.size() < 4) throw InputError("matpower: branch row " + std::to_string(r + 1) + " has fewer than 4 columns");
    if (row.size() >= 11 && row[10] <= 0.0) continue;
    Branch br;
    br.from = static_cast<int>(row[0]);
    br.to = static_cast<int>(row[1]);
    br.reactance_pu = row[3];
    c.branches.push_back(br);
  }
  return normalize_case(std::move(c), name);
}

GridCase convert_matpower(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return convert_matpower(in, name);
}

}  // namespace resilnet
