#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "heurank/core.hpp"
#include "heurank/domains.hpp"

namespace heurank {
namespace oracle {

struct Limits {
  std::size_t max_states = 2'000'000;
};

// Exact remaining cost per reachable state. Dead ends are states from which
// no goal can be reached; they carry no finite value.
struct CostToGoalTable {
  StateMap<double> value;
  StateSet dead_ends;
  double max_finite = 0.0;

  bool is_dead_end(StateId s) const { return dead_ends.contains(s); }
  std::optional<double> get(StateId s) const {
    auto it = value.find(s);
    if (it == value.end()) return std::nullopt;
    return it->second;
  }
  // Surrogate label for dead ends: large enough to never be preferred, small
  // enough to keep regression gradients bounded.
  double dead_end_cap() const { return 2.0 * max_finite; }
};

namespace detail {

// Forward closure from the initial state in deterministic discovery order,
// with the edge list needed for backward passes.
struct Closure {
  std::vector<StateId> states;
  StateMap<std::uint32_t> index;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> edges;  // forward, per state
  std::vector<bool> goal;
};

inline Closure enumerate_closure(const ProblemInstance& inst, const Limits& limits) {
  Closure c;
  auto intern = [&](StateId s) -> std::uint32_t {
    auto it = c.index.find(s);
    if (it != c.index.end()) return it->second;
    if (c.states.size() >= limits.max_states)
      throw OracleCapacityError("state closure exceeds " + std::to_string(limits.max_states) + " states");
    const auto id = static_cast<std::uint32_t>(c.states.size());
    c.index.emplace(s, id);
    c.states.push_back(s);
    c.edges.emplace_back();
    c.goal.push_back(inst.is_goal(s));
    return id;
  };
  intern(inst.initial_state());
  for (std::uint32_t at = 0; at < c.states.size(); ++at) {
    for (const Successor& succ : inst.successors(c.states[at])) {
      const auto to = intern(succ.state);
      c.edges[at].push_back({to, succ.cost});
    }
  }
  return c;
}

struct DistEntry {
  double dist;
  std::uint64_t seq;
  std::uint32_t node;
};
struct DistLater {
  bool operator()(const DistEntry& a, const DistEntry& b) const {
    if (a.dist != b.dist) return a.dist > b.dist;
    return a.seq > b.seq;  // FIFO among equal distances
  }
};

// Single-source shortest distances over an explicit adjacency list.
inline std::vector<double> dijkstra(const std::vector<std::vector<std::pair<std::uint32_t, double>>>& adj,
                                    const std::vector<std::uint32_t>& sources) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(adj.size(), kInf);
  std::priority_queue<DistEntry, std::vector<DistEntry>, DistLater> heap;
  std::uint64_t seq = 0;
  for (auto s : sources) {
    dist[s] = 0;
    heap.push({0.0, seq++, s});
  }
  while (!heap.empty()) {
    const auto top = heap.top();
    heap.pop();
    if (top.dist > dist[top.node]) continue;
    for (const auto& [to, w] : adj[top.node]) {
      const double nd = top.dist + w;
      if (nd < dist[to]) {
        dist[to] = nd;
        heap.push({nd, seq++, to});
      }
    }
  }
  return dist;
}

}  // namespace detail

// Cost-optimal plan by uniform-cost search with pop-time goal detection.
// Implemented directly over the enumerated graph, independent of the search
// engine, so the two can check each other.
inline Plan optimal_solve(const ProblemInstance& inst, const Limits& limits = {}) {
  const auto c = detail::enumerate_closure(inst, limits);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(c.states.size(), kInf);
  std::vector<std::int64_t> parent(c.states.size(), -1);
  std::vector<double> parent_cost(c.states.size(), 0);
  std::priority_queue<detail::DistEntry, std::vector<detail::DistEntry>, detail::DistLater> heap;
  std::uint64_t seq = 0;
  dist[0] = 0;
  heap.push({0.0, seq++, 0});
  std::vector<bool> done(c.states.size(), false);
  while (!heap.empty()) {
    const auto top = heap.top();
    heap.pop();
    if (done[top.node] || top.dist > dist[top.node]) continue;
    done[top.node] = true;
    if (c.goal[top.node]) {
      std::vector<PlanEdge> edges;
      std::uint32_t at = top.node;
      while (parent[at] >= 0) {
        const auto p = static_cast<std::uint32_t>(parent[at]);
        edges.push_back(PlanEdge{c.states[p], c.states[at], parent_cost[at]});
        at = p;
      }
      std::reverse(edges.begin(), edges.end());
      return make_plan(c.states[0], std::move(edges));
    }
    for (const auto& [to, w] : c.edges[top.node]) {
      const double nd = top.dist + w;
      if (nd < dist[to]) {
        dist[to] = nd;
        parent[to] = top.node;
        parent_cost[to] = w;
        heap.push({nd, seq++, to});
      }
    }
  }
  throw NoPlanError("instance " + inst.instance_id() + " has no plan");
}

// A* under an admissible straight-line heuristic; same optimal cost as
// uniform cost but far fewer pops on puzzles. Used for the generator's
// solvability probe and as the second route in cost cross-checks.
inline Plan optimal_solve_astar_manhattan(const ProblemInstance& inst, std::size_t max_expansions = 1'000'000) {
  const auto h = manhattan_heuristic(inst);
  struct Entry {
    double f;
    double g;
    std::uint64_t seq;
    StateId id;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;  // prefer deeper on ties
    return a.seq > b.seq;
  };
  struct Node {
    double g;
    StateId parent;
    double parent_cost;
    bool has_parent = false;
    bool closed = false;
  };
  StateMap<Node> nodes;
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);
  std::uint64_t seq = 0;
  const StateId s0 = inst.initial_state();
  nodes[s0] = Node{0, {}, 0, false, false};
  heap.push({h(s0), 0, seq++, s0});
  std::size_t expanded = 0;
  while (!heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    Node& node = nodes.at(top.id);
    if (node.closed || top.g > node.g) continue;
    if (inst.is_goal(top.id)) {
      std::vector<PlanEdge> edges;
      StateId at = top.id;
      while (nodes.at(at).has_parent) {
        const Node& n = nodes.at(at);
        edges.push_back(PlanEdge{n.parent, at, n.parent_cost});
        at = n.parent;
      }
      std::reverse(edges.begin(), edges.end());
      return make_plan(s0, std::move(edges));
    }
    node.closed = true;
    if (++expanded > max_expansions) throw OracleCapacityError("admissible solve exceeded expansion cap");
    for (const Successor& succ : inst.successors(top.id)) {
      const double g_new = node.g + succ.cost;
      auto it = nodes.find(succ.state);
      if (it != nodes.end() && g_new >= it->second.g) continue;
      Node& child = nodes[succ.state];
      child.g = g_new;
      child.parent = top.id;
      child.parent_cost = succ.cost;
      child.has_parent = true;
      child.closed = false;  // consistent h makes this a no-op
      heap.push({g_new + h(succ.state), g_new, seq++, succ.state});
    }
  }
  throw NoPlanError("instance " + inst.instance_id() + " has no plan");
}

// Exact cost-to-goal for every state reachable from the initial state: one
// forward closure, then a backward multi-source pass from the goals over the
// reversed edges. States with no finite value are flagged as dead ends.
// `restrict_to` filters the returned table without changing the computation.
inline CostToGoalTable cost_to_goal(const ProblemInstance& inst, const std::vector<StateId>* restrict_to = nullptr,
                                    const Limits& limits = {}) {
  const auto c = detail::enumerate_closure(inst, limits);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> reverse(c.states.size());
  for (std::uint32_t from = 0; from < c.states.size(); ++from)
    for (const auto& [to, w] : c.edges[from]) reverse[to].push_back({from, w});
  std::vector<std::uint32_t> goals;
  for (std::uint32_t i = 0; i < c.states.size(); ++i)
    if (c.goal[i]) goals.push_back(i);
  std::vector<double> dist = goals.empty() ? std::vector<double>(c.states.size(), std::numeric_limits<double>::infinity())
                                           : detail::dijkstra(reverse, goals);
  CostToGoalTable table;
  auto want = [&](StateId s) {
    if (!restrict_to) return true;
    return std::find(restrict_to->begin(), restrict_to->end(), s) != restrict_to->end();
  };
  for (std::uint32_t i = 0; i < c.states.size(); ++i) {
    if (std::isfinite(dist[i])) table.max_finite = std::max(table.max_finite, dist[i]);
    if (!want(c.states[i])) continue;
    if (std::isfinite(dist[i]))
      table.value.emplace(c.states[i], dist[i]);
    else
      table.dead_ends.insert(c.states[i]);
  }
  if (restrict_to)
    for (StateId s : *restrict_to)
      if (!table.value.contains(s) && !table.dead_ends.contains(s))
        throw OracleCapacityError("requested state not reachable from the initial state: " + inst.state_name(s));
  return table;
}

struct EnumerationResult {
  std::vector<Plan> plans;
  bool truncated = false;
  double optimal_cost = 0.0;
};

// All distinct optimal-cost plans, up to `limit`, by depth-first traversal of
// the subgraph of edges with g*(s) + w(s, s') + h*(s') equal to the optimal
// cost. Plans come out in domain successor order.
inline EnumerationResult enumerate_optimal_plans(const ProblemInstance& inst, std::size_t limit,
                                                 const Limits& limits = {}) {
  constexpr double kEps = 1e-9;
  const auto c = detail::enumerate_closure(inst, limits);
  std::vector<std::uint32_t> goals;
  for (std::uint32_t i = 0; i < c.states.size(); ++i)
    if (c.goal[i]) goals.push_back(i);
  if (goals.empty()) throw NoPlanError("instance " + inst.instance_id() + " has no plan");
  const std::vector<double> g_star = detail::dijkstra(c.edges, {0});
  std::vector<std::vector<std::pair<std::uint32_t, double>>> reverse(c.states.size());
  for (std::uint32_t from = 0; from < c.states.size(); ++from)
    for (const auto& [to, w] : c.edges[from]) reverse[to].push_back({from, w});
  const std::vector<double> h_star = detail::dijkstra(reverse, goals);
  if (!std::isfinite(h_star[0])) throw NoPlanError("instance " + inst.instance_id() + " has no plan");
  const double f_star = h_star[0];

  EnumerationResult out;
  out.optimal_cost = f_star;
  std::vector<PlanEdge> stack;
  std::vector<bool> on_path(c.states.size(), false);

  // Iterative DFS would obscure the on-path bookkeeping; recursion depth is
  // bounded by the longest optimal plan.
  std::function<bool(std::uint32_t, double)> walk = [&](std::uint32_t at, double g) -> bool {
    if (c.goal[at] && std::abs(g - f_star) < kEps) {
      if (out.plans.size() == limit) {
        out.truncated = true;
        return true;  // found one beyond the limit; stop
      }
      out.plans.push_back(make_plan(c.states[0], stack));
      return false;
    }
    on_path[at] = true;
    for (const auto& [to, w] : c.edges[at]) {
      if (on_path[to]) continue;
      if (!std::isfinite(h_star[to])) continue;
      if (std::abs(g + w + h_star[to] - f_star) >= kEps) continue;
      stack.push_back(PlanEdge{c.states[at], c.states[to], w});
      const bool stop = walk(to, g + w);
      stack.pop_back();
      if (stop) {
        on_path[at] = false;
        return true;
      }
    }
    on_path[at] = false;
    return false;
  };
  walk(0, 0.0);
  return out;
}

}  // namespace oracle
}  // namespace heurank
