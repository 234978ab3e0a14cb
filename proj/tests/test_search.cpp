#include <catch2/catch_amalgamated.hpp>

#include "heurank/fixtures.hpp"
#include "heurank/generate.hpp"
#include "heurank/oracle.hpp"
#include "heurank/search.hpp"

using namespace heurank;

namespace {

StateId named(const ProblemInstance& inst, const std::string& name) {
  return inst.state_from_json(json(name));
}

std::vector<std::string> names_of(const ProblemInstance& inst, const std::vector<StateId>& states) {
  std::vector<std::string> out;
  for (const auto& s : states) out.push_back(inst.state_name(s));
  return out;
}

ProblemInstance trivial_goal_instance() {
  ExplicitGraph g;
  g.node_names = {"root"};
  g.adjacency.resize(1);
  g.goal = {true};
  g.reference_h = {std::nullopt};
  g.initial = 0;
  return ProblemInstance("trivial", DomainTag::explicit_graph, g);
}

}  // namespace

TEST_CASE("greedy search follows the exact cost-to-goal into the detour", "[search]") {
  const auto inst = fixtures::greedy_detour_graph();
  const auto res = forward_search(inst, reference_heuristic(inst), SearchConfig::gbfs());
  REQUIRE(res.status == SearchStatus::solved);
  CHECK(res.plan->total_cost == 11.0);
  CHECK(names_of(inst, res.plan->states()) == std::vector<std::string>{"A", "B", "E"});
  CHECK(names_of(inst, res.expansion_order) == std::vector<std::string>{"A", "B"});
  CHECK(res.expanded_count == 2);
}

TEST_CASE("cost-aware search finds the optimum in three expansions", "[search]") {
  const auto inst = fixtures::greedy_detour_graph();
  const auto res = forward_search(inst, reference_heuristic(inst), SearchConfig::astar());
  REQUIRE(res.status == SearchStatus::solved);
  CHECK(res.plan->total_cost == 10.0);
  CHECK(names_of(inst, res.plan->states()) == std::vector<std::string>{"A", "C", "D", "E"});
  CHECK(res.expanded_count == 3);
  CHECK(res.expanded_count == res.expansion_order.size());
}

TEST_CASE("initial goal is solved with an empty plan and zero expansions", "[search]") {
  const auto inst = trivial_goal_instance();
  SearchConfig cfg = SearchConfig::astar();
  cfg.expansion_budget = 0;  // the goal pop is not an expansion
  const auto res = forward_search(inst, zero_heuristic(), cfg);
  REQUIRE(res.status == SearchStatus::solved);
  CHECK(res.plan->length() == 0);
  CHECK(res.plan->total_cost == 0.0);
  CHECK(res.expanded_count == 0);
}

TEST_CASE("expansion budget exhausts cleanly", "[search]") {
  const auto inst = fixtures::greedy_detour_graph();
  SearchConfig cfg = SearchConfig::astar();
  cfg.expansion_budget = 0;
  const auto res = forward_search(inst, zero_heuristic(), cfg);
  CHECK(res.status == SearchStatus::budget_exhausted);
  CHECK_FALSE(res.plan.has_value());
  CHECK(res.expanded_count == 0);

  cfg.expansion_budget = 2;
  const auto partial = forward_search(inst, zero_heuristic(), cfg);
  CHECK(partial.status == SearchStatus::budget_exhausted);
  CHECK(partial.expanded_count == 2);
}

TEST_CASE("open exhaustion without a goal", "[search]") {
  ExplicitGraph g;
  g.node_names = {"a", "b", "goal"};
  g.adjacency.resize(3);
  g.adjacency[0].push_back({1, 1.0});
  g.goal = {false, false, true};
  g.reference_h.assign(3, std::nullopt);
  g.initial = 0;
  ProblemInstance inst("unreachable", DomainTag::explicit_graph, g);
  const auto res = forward_search(inst, zero_heuristic(), SearchConfig::astar());
  CHECK(res.status == SearchStatus::exhausted_open);
}

TEST_CASE("uniform-cost mode matches the oracle on random instances", "[search]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, seed);
    const auto res = forward_search(maze, zero_heuristic(), SearchConfig::astar());
    REQUIRE(res.status == SearchStatus::solved);
    CHECK(res.plan->total_cost == oracle::optimal_solve(maze).total_cost);
  }
}

TEST_CASE("consistent heuristic: no reopening, monotone pops, exact g", "[search]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto puzzle = generate_instance(DomainTag::sliding_puzzle, json{{"size", 3}, {"scramble_moves", 14}}, seed);
    const auto h = manhattan_heuristic(puzzle);
    const auto res = forward_search(puzzle, h, SearchConfig::astar());
    REQUIRE(res.status == SearchStatus::solved);
    CHECK(res.reopened_count == 0);

    double prev_f = -1;
    for (const auto& s : res.expansion_order) {
      const double f = res.g_values.at(s) + h(s);
      CHECK(f >= prev_f - 1e-9);
      prev_f = f;
    }

    // decrease-key left every closed state at its true distance
    const auto dists = forward_search(puzzle, zero_heuristic(), SearchConfig::astar());
    for (const auto& s : res.expansion_order) CHECK(res.g_values.at(s) == dists.g_values.at(s));
  }
}

TEST_CASE("identical inputs give identical expansion orders", "[search]") {
  const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 11}, {"teleport_pairs", 2}}, 4);
  for (TiePolicy tie : {TiePolicy::lifo, TiePolicy::fifo, TiePolicy::lower_g, TiePolicy::higher_g}) {
    SearchConfig cfg = SearchConfig::astar();
    cfg.tie_policy = tie;
    const auto a = forward_search(maze, zero_heuristic(), cfg);
    const auto b = forward_search(maze, zero_heuristic(), cfg);
    CHECK(a.expansion_order == b.expansion_order);
    CHECK(a.expanded_count == b.expanded_count);
  }
}

TEST_CASE("tie policies pick different ends of an f-plateau", "[search]") {
  // two parallel unit-cost routes of equal merit
  ExplicitGraph g;
  g.node_names = {"s", "x", "y", "goal"};
  g.adjacency.resize(4);
  g.adjacency[0] = {{1, 1.0}, {2, 1.0}};
  g.adjacency[1] = {{3, 1.0}};
  g.adjacency[2] = {{3, 1.0}};
  g.goal = {false, false, false, true};
  g.reference_h.assign(4, std::nullopt);
  g.initial = 0;
  ProblemInstance inst("plateau", DomainTag::explicit_graph, g);

  SearchConfig lifo = SearchConfig::gbfs();
  lifo.tie_policy = TiePolicy::lifo;
  SearchConfig fifo = SearchConfig::gbfs();
  fifo.tie_policy = TiePolicy::fifo;
  const auto a = forward_search(inst, zero_heuristic(), lifo);
  const auto b = forward_search(inst, zero_heuristic(), fifo);
  REQUIRE(a.status == SearchStatus::solved);
  REQUIRE(b.status == SearchStatus::solved);
  CHECK(names_of(inst, a.expansion_order)[1] == "y");  // most recently generated
  CHECK(names_of(inst, b.expansion_order)[1] == "x");  // first generated
}

TEST_CASE("reopening repairs closed states under an inconsistent heuristic", "[search]") {
  ExplicitGraph g;
  g.node_names = {"s", "a", "b", "goal"};
  g.adjacency.resize(4);
  g.adjacency[0] = {{2, 5.0}, {1, 1.0}};  // s->b (5), s->a (1)
  g.adjacency[1] = {{2, 1.0}};            // a->b (1)
  g.adjacency[2] = {{3, 100.0}};          // b->goal
  g.goal = {false, false, false, true};
  g.reference_h = {0.0, 10.0, 0.0, 0.0};  // inconsistent: drop of 10 over a unit edge
  g.initial = 0;
  ProblemInstance inst("reopen", DomainTag::explicit_graph, g);

  SearchConfig on = SearchConfig::astar();
  const auto with_reopen = forward_search(inst, reference_heuristic(inst), on);
  REQUIRE(with_reopen.status == SearchStatus::solved);
  CHECK(with_reopen.reopened_count >= 1);
  CHECK(with_reopen.plan->total_cost == 102.0);

  SearchConfig off = SearchConfig::astar();
  off.reopening = false;
  const auto without = forward_search(inst, reference_heuristic(inst), off);
  REQUIRE(without.status == SearchStatus::solved);  // still complete
  CHECK(without.reopened_count == 0);
  CHECK(without.plan->total_cost == 105.0);
}

TEST_CASE("plan validation", "[search]") {
  const auto inst = fixtures::greedy_detour_graph();
  const auto res = forward_search(inst, reference_heuristic(inst), SearchConfig::astar());
  REQUIRE(res.plan);
  CHECK(validate_plan(inst, *res.plan));
  CHECK(res.plan->total_cost == 10.0);

  Plan empty;
  empty.start = inst.initial_state();
  CHECK_FALSE(validate_plan(inst, empty));  // initial state is not a goal

  Plan corrupted = *res.plan;
  corrupted.edges[1].cost += 1.0;
  CHECK_FALSE(validate_plan(inst, corrupted));
  CHECK(validate_plan_diagnose(inst, corrupted).has_value());
}

TEST_CASE("efficiency certificates", "[search]") {
  const auto inst = fixtures::greedy_detour_graph();
  SearchConfig astar = SearchConfig::astar();
  astar.tie_policy = TiePolicy::lower_g;
  const auto cert = certify_strict_optimal_efficiency(inst, reference_heuristic(inst), astar);
  CHECK(cert.certified);
  CHECK(cert.expanded == 3);
  CHECK(cert.plan_length == 3);

  // greedy is certified on its own (suboptimal) plan: efficiency, not optimality
  const auto greedy = certify_strict_optimal_efficiency(inst, reference_heuristic(inst), SearchConfig::gbfs());
  CHECK(greedy.certified);
  CHECK(greedy.expanded == 2);
  CHECK(greedy.plan_length == 2);

  // a blind heuristic on a branching maze expands off the returned plan
  const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 5}, {"teleport_pairs", 0}}, 1);
  const auto blind = certify_strict_optimal_efficiency(maze, zero_heuristic(), SearchConfig::astar());
  CHECK_FALSE(blind.certified);
  CHECK(blind.expanded > blind.plan_length);

  SearchConfig tiny = SearchConfig::astar();
  tiny.expansion_budget = 1;
  CHECK_THROWS_AS(certify_strict_optimal_efficiency(maze, zero_heuristic(), tiny), CertificationInconclusiveError);
}

TEST_CASE("search config validation", "[search]") {
  SearchConfig bad;
  bad.alpha = 0;
  bad.beta = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
}
