#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "heurank/fixtures.hpp"
#include "heurank/generate.hpp"
#include "heurank/io.hpp"
#include "heurank/losses.hpp"
#include "heurank/trace.hpp"
#include "support/reference_trace.hpp"

using namespace heurank;

namespace {

std::set<std::string> off_path_names(const ProblemInstance& inst, const TraceStep& step) {
  std::set<std::string> out;
  for (const auto& o : step.off_path) out.insert(inst.state_name(o.id));
  return out;
}

RankingTrace tree_trace() {
  const auto tree = fixtures::ranking_tree();
  return ranking_trace(tree, oracle::optimal_solve(tree));
}

std::vector<reference::PairTuple> sorted_pairs(const RecordSet& rs) {
  std::vector<reference::PairTuple> out;
  for (const auto& p : rs.pairs) out.push_back({p.on_path, p.rival, p.g_on_path, p.g_rival});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("open lists of the restricted run on the branching tree", "[trace]") {
  const auto tree = fixtures::ranking_tree();
  const auto trace = ranking_trace(tree, oracle::optimal_solve(tree));
  REQUIRE(trace.steps.size() == 3);

  CHECK(tree.state_name(trace.steps[0].on_path) == "s1");
  CHECK(off_path_names(tree, trace.steps[0]) == std::set<std::string>{"s4", "s5"});
  CHECK(tree.state_name(trace.steps[1].on_path) == "s2");
  CHECK(off_path_names(tree, trace.steps[1]) == std::set<std::string>{"s4", "s5", "s6", "s7"});
  // the final step is the goal pop; its rivals are the four leaves again
  CHECK(tree.state_name(trace.steps[2].on_path) == "s3");
  CHECK(off_path_names(tree, trace.steps[2]) == std::set<std::string>{"s4", "s5", "s6", "s7"});

  // every pop constrained: 2 + 4 + 4
  CHECK(trace.pair_count() == 10);
  const auto records = training_records(trace, LossKind::lstar);
  CHECK(records.pairs.size() == 10);

  // the six expansion-selection inequalities of the worked example are among them
  const auto has_pair = [&](const std::string& on, const std::string& off) {
    for (const auto& p : records.pairs)
      if (tree.state_name(p.on_path) == on && tree.state_name(p.rival) == off) return true;
    return false;
  };
  for (const auto& [on, off] : std::vector<std::pair<std::string, std::string>>{
           {"s1", "s4"}, {"s1", "s5"}, {"s2", "s4"}, {"s2", "s5"}, {"s2", "s6"}, {"s2", "s7"}})
    CHECK(has_pair(on, off));
}

TEST_CASE("a corridor has no rivals", "[trace]") {
  ExplicitGraph g;
  g.node_names = {"a", "b", "c"};
  g.adjacency.resize(3);
  g.adjacency[0] = {{1, 1.0}};
  g.adjacency[1] = {{2, 1.0}};
  g.goal = {false, false, true};
  g.reference_h.assign(3, std::nullopt);
  g.initial = 0;
  const ProblemInstance inst("corridor", DomainTag::explicit_graph, g);
  const auto trace = ranking_trace(inst, oracle::optimal_solve(inst));
  for (const auto& step : trace.steps) CHECK(step.off_path.empty());
  CHECK(trace.pair_count() == 0);
}

TEST_CASE("record extraction per loss kind", "[trace]") {
  const auto tree = fixtures::ranking_tree();
  auto trace = ranking_trace(tree, oracle::optimal_solve(tree));

  CHECK(training_records(trace, LossKind::lrt).transitions.size() == 3);
  CHECK(training_records(trace, LossKind::lgbfs).pairs.size() == training_records(trace, LossKind::lstar).pairs.size());

  attach_cost_to_goal_labels(trace, oracle::cost_to_goal(tree));
  const auto l2 = training_records(trace, LossKind::l2);
  CHECK(l2.labeled.size() == 4);  // the l+1 path states

  const auto be = training_records(trace, LossKind::lbe);
  REQUIRE(be.bellman.size() == 4);
  CHECK(be.bellman[0].children.size() == 3);  // s0 -> {s1, s4, s5}
  CHECK(be.bellman[3].children.empty());      // the goal has no successors
  CHECK(be.bellman[0].hstar == 3.0);
}

TEST_CASE("duplicate generation keeps the minimum g and first entry step", "[trace]") {
  // x is generated by s0 at cost 5 and again by s1 at cost 2
  ExplicitGraph g;
  g.node_names = {"s0", "s1", "x", "goal"};
  g.adjacency.resize(4);
  g.adjacency[0] = {{1, 1.0}, {2, 5.0}};
  g.adjacency[1] = {{3, 1.0}, {2, 1.0}};
  g.goal = {false, false, false, true};
  g.reference_h.assign(4, std::nullopt);
  g.initial = 0;
  const ProblemInstance inst("dup", DomainTag::explicit_graph, g);
  const auto trace = ranking_trace(inst, oracle::optimal_solve(inst));
  REQUIRE(trace.steps.size() == 2);
  const auto& last = trace.steps[1];
  REQUIRE(last.off_path.size() == 1);
  CHECK(inst.state_name(last.off_path[0].id) == "x");
  CHECK(last.off_path[0].g == 2.0);
  CHECK(last.off_path[0].entry_step == 1);
}

TEST_CASE("trace construction is pure", "[trace]") {
  const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, 11);
  const auto plan = oracle::optimal_solve(maze);
  const auto a = io::record_set_to_json(training_records(ranking_trace(maze, plan), LossKind::lstar));
  const auto b = io::record_set_to_json(training_records(ranking_trace(maze, plan), LossKind::lstar));
  CHECK(a.dump() == b.dump());
}

TEST_CASE("pair multiset matches the reference replay", "[trace]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 5}, {"teleport_pairs", 1}}, seed);
    const auto plan = oracle::optimal_solve(maze);
    const auto trace = ranking_trace(maze, plan);
    const auto replay = reference::replay_restricted_search(maze, plan);
    CHECK(sorted_pairs(training_records(trace, LossKind::lstar)) == replay.all_pop_pairs);
  }
}

TEST_CASE("pair totals equal the reference recount on random mazes", "[trace]") {
  std::vector<RankingTrace> traces;
  std::size_t reference_total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 8}, {"teleport_pairs", 1}}, seed);
    const auto plan = oracle::optimal_solve(maze);
    traces.push_back(ranking_trace(maze, plan));
    reference_total += reference::replay_restricted_search(maze, plan).all_pop_pairs.size();
  }
  CHECK(count_pairs(traces) == reference_total);
  CHECK(count_pairs({}) == 0);
}

TEST_CASE("rivals that entered earlier never outrank on g in unit-cost domains", "[trace]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, seed);
    const auto trace = ranking_trace(maze, oracle::optimal_solve(maze));
    for (const auto& step : trace.steps)
      for (const auto& off : step.off_path)
        if (off.entry_step < step.index) CHECK(step.g_on_path >= off.g);
  }
}

TEST_CASE("ranking records never touch cost-to-goal labels", "[trace]") {
  const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, 5);
  const auto trace = ranking_trace(maze, oracle::optimal_solve(maze));
  trace.state_table->reset_hstar_read_count();
  const auto records = training_records(trace, LossKind::lstar);
  const auto gbfs_records = training_records(trace, LossKind::lgbfs);
  CHECK(records.pairs.size() > 0);
  CHECK(trace.state_table->hstar_read_count() == 0);
  (void)gbfs_records;
}

TEST_CASE("regression records demand labels", "[trace]") {
  const auto maze = generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, 6);
  auto trace = ranking_trace(maze, oracle::optimal_solve(maze));
  CHECK_THROWS_AS(training_records(trace, LossKind::l2), LabelError);
  attach_cost_to_goal_labels(trace, oracle::cost_to_goal(maze));
  const auto records = training_records(trace, LossKind::l2);
  CHECK(records.labeled.size() == trace.plan.length() + 1);
  CHECK(trace.state_table->hstar_read_count() == records.labeled.size());
}

TEST_CASE("invalid plans are rejected", "[trace]") {
  const auto inst = fixtures::greedy_detour_graph();
  Plan bogus;
  bogus.start = inst.initial_state();
  CHECK_THROWS_AS(ranking_trace(inst, bogus), TraceError);
}

TEST_CASE("a cheaper route than the plan is detected", "[trace]") {
  ExplicitGraph g;
  g.node_names = {"s0", "a", "goal"};
  g.adjacency.resize(3);
  g.adjacency[0] = {{1, 1.0}, {2, 1.0}};
  g.adjacency[1] = {{2, 1.0}};
  g.goal = {false, false, true};
  g.reference_h.assign(3, std::nullopt);
  g.initial = 0;
  const ProblemInstance inst("shortcut", DomainTag::explicit_graph, g);
  // the two-edge plan validates but is beaten by the direct edge
  Plan detour = make_plan(ExplicitGraph::encode(0), {PlanEdge{ExplicitGraph::encode(0), ExplicitGraph::encode(1), 1.0},
                                                     PlanEdge{ExplicitGraph::encode(1), ExplicitGraph::encode(2), 1.0}});
  REQUIRE(validate_plan(inst, detour));
  CHECK_THROWS_AS(ranking_trace(inst, detour), TraceError);
}
