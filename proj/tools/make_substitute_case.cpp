// Generates the synthetic 57-bus / 94-line stand-in case shipped in
// data/cases. Buses sit at random points in the unit square; lines are a
// minimum spanning tree plus the shortest remaining pairs, with reactance
// growing with length. Injections are rescaled when needed so the floor
// derived from them sits at half of lambda2 of the unscaled susceptances.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "resilnet/errors.hpp"
#include "resilnet/grid_case.hpp"
#include "resilnet/optimizer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic 57-bus substitute case"};
  std::uint64_t seed = 57;
  int buses = 57;
  int lines = 94;
  int generators = 29;
  std::string out = "substitute57.json";
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--buses", buses)->check(CLI::Range(3, 10000));
  app.add_option("--lines", lines);
  app.add_option("--generators", generators);
  app.add_option("--out", out, "Output JSON path");
  CLI11_PARSE(app, argc, argv);
  if (lines < buses - 1 || lines > buses * (buses - 1) / 2 || generators < 1 || generators >= buses) {
    std::cerr << "inconsistent bus/line/generator counts\n";
    return 3;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(buses)), y(x.size());
  for (int i = 0; i < buses; ++i) {
    x[static_cast<std::size_t>(i)] = unit(rng);
    y[static_cast<std::size_t>(i)] = unit(rng);
  }
  auto dist = [&](int i, int j) {
    return std::hypot(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)],
                      y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)]);
  };

  // Prim's tree, then shortest extra pairs.
  std::set<std::pair<int, int>> chosen;
  std::vector<bool> in_tree(static_cast<std::size_t>(buses), false);
  std::vector<double> best(static_cast<std::size_t>(buses), 1e300);
  std::vector<int> parent(static_cast<std::size_t>(buses), -1);
  best[0] = 0.0;
  for (int it = 0; it < buses; ++it) {
    int u = -1;
    for (int v = 0; v < buses; ++v)
      if (!in_tree[static_cast<std::size_t>(v)] && (u < 0 || best[static_cast<std::size_t>(v)] < best[static_cast<std::size_t>(u)])) u = v;
    in_tree[static_cast<std::size_t>(u)] = true;
    if (parent[static_cast<std::size_t>(u)] >= 0) chosen.insert(std::minmax(u, parent[static_cast<std::size_t>(u)]));
    for (int v = 0; v < buses; ++v) {
      if (!in_tree[static_cast<std::size_t>(v)] && dist(u, v) < best[static_cast<std::size_t>(v)]) {
        best[static_cast<std::size_t>(v)] = dist(u, v);
        parent[static_cast<std::size_t>(v)] = u;
      }
    }
  }
  std::vector<std::tuple<double, int, int>> pairs;
  for (int i = 0; i < buses; ++i)
    for (int j = i + 1; j < buses; ++j) pairs.emplace_back(dist(i, j), i, j);
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [d, i, j] : pairs) {
    if (static_cast<int>(chosen.size()) >= lines) break;
    chosen.insert({i, j});
  }

  resilnet::GridCase c;
  c.name = "substitute57";
  std::vector<int> ids(static_cast<std::size_t>(buses));
  for (int i = 0; i < buses; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::set<int> gen_ids(ids.begin(), ids.begin() + generators);

  std::uniform_real_distribution<double> power(0.2, 2.0);
  double gen_total = 0.0;
  double load_total = 0.0;
  for (int id = 1; id <= buses; ++id) {
    resilnet::Bus b;
    b.id = id;
    b.kind = gen_ids.count(id) ? resilnet::Bus::Kind::generator : resilnet::Bus::Kind::load;
    b.power_pu = power(rng);
    if (b.kind == resilnet::Bus::Kind::load) {
      b.power_pu = -b.power_pu;
      load_total -= b.power_pu;
    } else {
      gen_total += b.power_pu;
    }
    c.buses.push_back(b);
  }
  for (auto& b : c.buses)
    if (b.kind == resilnet::Bus::Kind::load) b.power_pu *= gen_total / load_total;

  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  for (const auto& [i, j] : chosen) {
    resilnet::Branch br;
    br.from = i + 1;
    br.to = j + 1;
    br.reactance_pu = std::round((0.01 + 0.25 * dist(i, j) * jitter(rng)) * 1e5) / 1e5;
    c.branches.push_back(br);
  }

  try {
    c = resilnet::normalize_case(c, c.name);
    const double lambda2 = resilnet::algebraic_connectivity(c.graph());
    const double eps = resilnet::epsilon_from_sync(c.injections(), c.edges(), resilnet::kDefaultGamma);
    if (eps > 0.5 * lambda2) {
      const double scale = 0.5 * lambda2 / eps;
      for (auto& b : c.buses) b.power_pu = std::round(b.power_pu * scale * 1e6) / 1e6;
      c = resilnet::normalize_case(c, c.name);
    }
    resilnet::save_case(c, out);
    std::printf("%s: %d buses, %zu lines, %zu generators, total susceptance %.6g, lambda2 %.6g, eps %.6g\n",
                out.c_str(), c.num_nodes(), c.edges().size(), c.generator_buses().size(), c.total_susceptance(),
                resilnet::algebraic_connectivity(c.graph()),
                resilnet::epsilon_from_sync(c.injections(), c.edges(), resilnet::kDefaultGamma));
  } catch (const resilnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
