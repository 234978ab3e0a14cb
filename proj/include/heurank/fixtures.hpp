#pragma once

#include "heurank/domains.hpp"
#include "heurank/generate.hpp"

namespace heurank {
namespace fixtures {

namespace detail {
inline ProblemInstance explicit_graph(std::string id, std::vector<std::string> nodes,
                                      std::vector<std::tuple<std::string, std::string, double>> edges,
                                      std::vector<std::string> goals, std::string initial,
                                      std::vector<std::pair<std::string, double>> reference_h = {}) {
  ExplicitGraph g;
  g.node_names = std::move(nodes);
  g.adjacency.resize(g.node_names.size());
  g.goal.assign(g.node_names.size(), false);
  g.reference_h.assign(g.node_names.size(), std::nullopt);
  for (const auto& [from, to, cost] : edges) g.adjacency[g.node_index(from)].push_back({g.node_index(to), cost});
  for (const auto& name : goals) g.goal[g.node_index(name)] = true;
  for (const auto& [name, h] : reference_h) g.reference_h[g.node_index(name)] = h;
  g.initial = g.node_index(initial);
  return ProblemInstance(std::move(id), DomainTag::explicit_graph, std::move(g));
}
}  // namespace detail

// Unit-cost tree with a unique 3-edge solution path s0-s1-s2-s3 and two
// off-path children under each of s0 and s1. The canonical worked example for
// open-list ranking: expanding only the path gives open lists
// {s1,s4,s5} and then {s2,s4,s5,s6,s7}.
inline ProblemInstance ranking_tree() {
  return detail::explicit_graph(
      "ranking_tree", {"s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"},
      {{"s0", "s1", 1}, {"s0", "s4", 1}, {"s0", "s5", 1}, {"s1", "s2", 1}, {"s1", "s6", 1}, {"s1", "s7", 1}, {"s2", "s3", 1}},
      {"s3"}, "s0");
}

// Five-node graph where the exact cost-to-goal misleads greedy best-first
// search: greedy follows A-B-E at cost 11 while the optimum is A-C-D-E at
// cost 10. The stored reference heuristic is the exact cost-to-goal.
inline ProblemInstance greedy_detour_graph() {
  return detail::explicit_graph(
      "greedy_detour", {"A", "B", "C", "D", "E"},
      {{"A", "C", 2}, {"A", "B", 8}, {"C", "D", 4}, {"B", "E", 3}, {"D", "E", 4}},
      {"E"}, "A", {{"A", 10}, {"B", 3}, {"C", 8}, {"D", 4}, {"E", 0}});
}

// Four-node instance from D to goal A where greedy search guided by the exact
// cost-to-goal returns the suboptimal direct edge. Shipped in two variants
// because the drawn arrows contradict the traversal the construction needs:
// as drawn, D has no outgoing edges.
inline ProblemInstance greedy_trap_graph(bool undirected) {
  std::vector<std::tuple<std::string, std::string, double>> edges = {
      {"A", "B", 1}, {"B", "D", 1}, {"A", "C", 1}, {"A", "D", 9}, {"B", "C", 9}};
  if (undirected) {
    std::vector<std::tuple<std::string, std::string, double>> rev;
    for (const auto& [from, to, cost] : edges) rev.push_back({to, from, cost});
    edges.insert(edges.end(), rev.begin(), rev.end());
  }
  return detail::explicit_graph(undirected ? "greedy_trap_undirected" : "greedy_trap_directed",
                                {"A", "B", "C", "D"}, edges, {"A"}, "D",
                                {{"A", 0}, {"B", 1}, {"C", 1}, {"D", 2}});
}

// The n x n down-left grid; every plan costs 2(n-1) and the number of optimal
// plans is the central binomial coefficient C(2(n-1), n-1).
inline ProblemInstance oneway_grid(int size) {
  return generate_instance(DomainTag::oneway_grid, json{{"size", size}}, 0);
}

// The down-then-left corner plan used as the single-path training set.
inline Plan oneway_corner_plan(const ProblemInstance& inst) {
  const auto& p = inst.payload<OnewayGrid>();
  std::vector<PlanEdge> edges;
  for (int a = p.size - 1; a > 0; --a)
    edges.push_back({OnewayGrid::encode(a, p.size - 1), OnewayGrid::encode(a - 1, p.size - 1), 1.0});
  for (int b = p.size - 1; b > 0; --b)
    edges.push_back({OnewayGrid::encode(0, b), OnewayGrid::encode(0, b - 1), 1.0});
  return make_plan(inst.initial_state(), std::move(edges));
}

// Mirror of oneway_corner_plan: all left moves, then all down moves.
inline Plan oneway_mirror_plan(const ProblemInstance& inst) {
  const auto& p = inst.payload<OnewayGrid>();
  std::vector<PlanEdge> edges;
  for (int b = p.size - 1; b > 0; --b)
    edges.push_back({OnewayGrid::encode(p.size - 1, b), OnewayGrid::encode(p.size - 1, b - 1), 1.0});
  for (int a = p.size - 1; a > 0; --a)
    edges.push_back({OnewayGrid::encode(a, 0), OnewayGrid::encode(a - 1, 0), 1.0});
  return make_plan(inst.initial_state(), std::move(edges));
}

}  // namespace fixtures
}  // namespace heurank
