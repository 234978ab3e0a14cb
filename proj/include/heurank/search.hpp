#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "heurank/core.hpp"
#include "heurank/domains.hpp"

namespace heurank {

using HeuristicFn = std::function<double(StateId)>;

inline HeuristicFn zero_heuristic() {
  return [](StateId) { return 0.0; };
}

enum class TiePolicy { lifo, fifo, lower_g, higher_g };

inline std::string to_string(TiePolicy t) {
  switch (t) {
    case TiePolicy::lifo: return "lifo";
    case TiePolicy::fifo: return "fifo";
    case TiePolicy::lower_g: return "lower_g";
    case TiePolicy::higher_g: return "higher_g";
  }
  throw Error("unknown tie policy");
}

// Merit f(s) = alpha * g(s) + beta * h(s). alpha = beta = 1 is A*;
// alpha = 0, beta = 1 is greedy best-first search.
struct SearchConfig {
  double alpha = 1.0;
  double beta = 1.0;
  bool reopening = true;
  TiePolicy tie_policy = TiePolicy::lifo;
  std::uint64_t expansion_budget = 100000;
  std::optional<std::uint64_t> generated_budget;

  static SearchConfig astar() { return SearchConfig{}; }
  static SearchConfig gbfs() {
    SearchConfig c;
    c.alpha = 0.0;
    c.beta = 1.0;
    c.reopening = false;  // customary for greedy search
    return c;
  }

  void validate() const {
    if (alpha < 0 || beta < 0 || alpha + beta <= 0) throw SpecError("SearchConfig: need alpha, beta >= 0 with alpha + beta > 0");
  }
};

enum class SearchStatus { solved, budget_exhausted, exhausted_open };

inline std::string to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::solved: return "solved";
    case SearchStatus::budget_exhausted: return "budget_exhausted";
    case SearchStatus::exhausted_open: return "exhausted_open";
  }
  throw Error("unknown status");
}

struct SearchResult {
  SearchStatus status = SearchStatus::exhausted_open;
  std::optional<Plan> plan;
  std::uint64_t expanded_count = 0;
  std::uint64_t generated_count = 0;
  std::uint64_t reopened_count = 0;
  std::vector<StateId> expansion_order;
  // Final g of every discovered state (open or closed) at termination.
  StateMap<double> g_values;

  json to_json(bool with_trace = false, const ProblemInstance* inst = nullptr) const {
    json j{{"status", to_string(status)},
           {"cost", plan ? json(plan->total_cost) : json()},
           {"length", plan ? json(plan->length()) : json()},
           {"expanded", expanded_count},
           {"generated", generated_count},
           {"reopened", reopened_count}};
    if (with_trace) {
      json order = json::array();
      for (const auto& s : expansion_order) order.push_back(inst ? inst->state_to_json(s) : json());
      j["expansion_order"] = order;
    }
    return j;
  }
};

// Best-first forward search with full duplicate detection ("open"/"closed"
// books), pop-time goal testing, decrease-key on cheaper regeneration and
// optional reopening from the closed book. The open list is a binary heap
// with lazy deletion; stale entries are skipped at pop so observable counts
// match eager-update semantics.
inline SearchResult forward_search(const ProblemInstance& inst, const HeuristicFn& h, const SearchConfig& cfg) {
  cfg.validate();

  struct Node {
    double g = 0;
    double h = 0;
    StateId parent{};
    double parent_cost = 0;
    bool has_parent = false;
    bool closed = false;
    std::uint64_t entry_seq = 0;  // seq of the live heap entry when open
  };
  struct HeapEntry {
    double f;
    double g;
    std::uint64_t seq;
    StateId id;
  };

  const TiePolicy tie = cfg.tie_policy;
  auto later = [tie](const HeapEntry& a, const HeapEntry& b) {
    // true when a pops after b
    if (a.f != b.f) return a.f > b.f;
    switch (tie) {
      case TiePolicy::lifo: return a.seq < b.seq;
      case TiePolicy::fifo: return a.seq > b.seq;
      case TiePolicy::lower_g:
        if (a.g != b.g) return a.g > b.g;
        return a.seq < b.seq;
      case TiePolicy::higher_g:
        if (a.g != b.g) return a.g < b.g;
        return a.seq < b.seq;
    }
    return false;
  };

  StateMap<Node> nodes;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(later)> open(later);
  std::uint64_t seq = 0;
  SearchResult result;

  auto push_open = [&](StateId id, Node& node) {
    node.entry_seq = ++seq;
    node.closed = false;
    open.push(HeapEntry{cfg.alpha * node.g + cfg.beta * node.h, node.g, node.entry_seq, id});
  };

  const StateId s0 = inst.initial_state();
  {
    Node root;
    root.g = 0;
    root.h = h(s0);
    auto [it, _] = nodes.emplace(s0, root);
    push_open(s0, it->second);
  }

  auto finish = [&](SearchStatus status, std::optional<StateId> goal) {
    result.status = status;
    if (goal) {
      std::vector<PlanEdge> edges;
      StateId at = *goal;
      while (true) {
        const Node& n = nodes.at(at);
        if (!n.has_parent) break;
        edges.push_back(PlanEdge{n.parent, at, n.parent_cost});
        at = n.parent;
      }
      std::reverse(edges.begin(), edges.end());
      result.plan = make_plan(s0, std::move(edges));
    }
    for (const auto& [id, n] : nodes) result.g_values[id] = n.g;
    return result;
  };

  while (!open.empty()) {
    const HeapEntry top = open.top();
    open.pop();
    auto it = nodes.find(top.id);
    if (it == nodes.end()) continue;
    Node& node = it->second;
    if (node.closed || node.entry_seq != top.seq) continue;  // stale entry

    const StateId current = top.id;
    if (inst.is_goal(current)) return finish(SearchStatus::solved, current);

    if (result.expanded_count >= cfg.expansion_budget) return finish(SearchStatus::budget_exhausted, std::nullopt);

    node.closed = true;
    result.expanded_count += 1;
    result.expansion_order.push_back(current);

    const double g_current = node.g;
    for (const Successor& succ : inst.successors(current)) {
      if (cfg.generated_budget && result.generated_count >= *cfg.generated_budget)
        return finish(SearchStatus::budget_exhausted, std::nullopt);
      result.generated_count += 1;
      const double g_new = g_current + succ.cost;
      auto child_it = nodes.find(succ.state);
      if (child_it == nodes.end()) {
        Node child;
        child.g = g_new;
        child.h = h(succ.state);
        child.parent = current;
        child.parent_cost = succ.cost;
        child.has_parent = true;
        auto [ins, _] = nodes.emplace(succ.state, child);
        push_open(succ.state, ins->second);
        continue;
      }
      Node& child = child_it->second;
      if (g_new >= child.g) continue;
      if (child.closed && !cfg.reopening) continue;
      if (child.closed) result.reopened_count += 1;
      child.g = g_new;
      child.parent = current;
      child.parent_cost = succ.cost;
      child.has_parent = true;
      push_open(succ.state, child);  // decrease-key or reopen
    }
  }
  return finish(SearchStatus::exhausted_open, std::nullopt);
}

// True iff the edge chain starts at the initial state, every edge is a legal
// transition with matching cost, and the final state is a goal.
inline std::optional<std::string> validate_plan_diagnose(const ProblemInstance& inst, const Plan& plan) {
  if (plan.start != inst.initial_state()) return "plan does not start at the initial state";
  StateId at = plan.start;
  for (std::size_t i = 0; i < plan.edges.size(); ++i) {
    const auto& e = plan.edges[i];
    if (e.from != at) return "edge " + std::to_string(i) + " does not chain";
    bool found = false;
    for (const Successor& s : inst.successors(e.from)) {
      if (s.state == e.to && s.cost == e.cost) {
        found = true;
        break;
      }
    }
    if (!found) return "edge " + std::to_string(i) + " is not a legal transition with that cost";
    at = e.to;
  }
  if (!inst.is_goal(at)) return "final state is not a goal";
  return std::nullopt;
}

inline bool validate_plan(const ProblemInstance& inst, const Plan& plan) {
  return !validate_plan_diagnose(inst, plan).has_value();
}

struct Certification {
  bool certified = false;
  std::uint64_t expanded = 0;
  std::uint64_t plan_length = 0;
};

// A run is strictly optimally efficient when it expands exactly the non-goal
// states of the returned plan, in plan order. Efficiency, not optimality: the
// plan itself may be suboptimal (greedy search with an exact cost-to-goal).
inline Certification certify_strict_optimal_efficiency(const ProblemInstance& inst, const HeuristicFn& h,
                                                       const SearchConfig& cfg) {
  const SearchResult r = forward_search(inst, h, cfg);
  if (r.status != SearchStatus::solved)
    throw CertificationInconclusiveError("search did not solve the instance within budget (" + to_string(r.status) + ")");
  Certification cert;
  cert.expanded = r.expanded_count;
  cert.plan_length = r.plan->length();
  if (r.expanded_count != r.plan->length()) return cert;
  const auto plan_states = r.plan->states();
  for (std::size_t i = 0; i < r.expansion_order.size(); ++i)
    if (r.expansion_order[i] != plan_states[i]) return cert;
  cert.certified = true;
  return cert;
}

}  // namespace heurank
