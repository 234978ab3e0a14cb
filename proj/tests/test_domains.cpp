#include <catch2/catch_amalgamated.hpp>

#include "heurank/fixtures.hpp"
#include "heurank/generate.hpp"
#include "heurank/oracle.hpp"

using namespace heurank;

namespace {

StateId named(const ProblemInstance& inst, const std::string& name) {
  return inst.state_from_json(json(name));
}

std::vector<ProblemInstance> sample_instances() {
  std::vector<ProblemInstance> out;
  out.push_back(fixtures::greedy_detour_graph());
  out.push_back(generate_instance(DomainTag::maze_teleport, json{{"size", 9}, {"teleport_pairs", 1}}, 3));
  out.push_back(generate_instance(DomainTag::sliding_puzzle, json{{"size", 3}}, 1));
  out.push_back(generate_instance(DomainTag::sokoban_lite, json{{"size", 5}, {"boxes", 1}}, 2));
  out.push_back(fixtures::oneway_grid(5));
  return out;
}

// Deterministic walk collecting a few dozen distinct states per instance.
std::vector<StateId> sample_states(const ProblemInstance& inst, std::size_t limit = 64) {
  std::vector<StateId> frontier{inst.initial_state()};
  StateSet seen{frontier.front()};
  for (std::size_t i = 0; i < frontier.size() && frontier.size() < limit; ++i)
    for (const auto& succ : inst.successors(frontier[i]))
      if (seen.insert(succ.state).second) frontier.push_back(succ.state);
  return frontier;
}

}  // namespace

TEST_CASE("detour graph successors come in declared edge order", "[domains]") {
  const auto inst = fixtures::greedy_detour_graph();
  const auto succ = inst.successors(named(inst, "A"));
  REQUIRE(succ.size() == 2);
  CHECK(succ[0].state == named(inst, "C"));
  CHECK(succ[0].cost == 2.0);
  CHECK(succ[1].state == named(inst, "B"));
  CHECK(succ[1].cost == 8.0);
  CHECK(inst.successors(named(inst, "E")).empty());  // goal has no out-edges
}

TEST_CASE("goal predicates", "[domains]") {
  const auto inst = fixtures::greedy_detour_graph();
  CHECK(inst.is_goal(named(inst, "E")));
  CHECK_FALSE(inst.is_goal(named(inst, "A")));

  SlidingPuzzle p;
  p.size = 3;
  p.initial_tiles = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  ProblemInstance puzzle("canonical", DomainTag::sliding_puzzle, p);
  CHECK(puzzle.is_goal(puzzle.initial_state()));
}

TEST_CASE("one-way grid moves and successor counts", "[domains]") {
  const auto grid = fixtures::oneway_grid(5);
  const auto& payload = grid.payload<OnewayGrid>();
  const auto succ = grid.successors(OnewayGrid::encode(4, 4));
  REQUIRE(succ.size() == 2);
  CHECK(succ[0].state == OnewayGrid::encode(3, 4));
  CHECK(succ[0].cost == 1.0);
  CHECK(succ[1].state == OnewayGrid::encode(4, 3));
  CHECK(succ[1].cost == 1.0);

  for (int a = 0; a < payload.size; ++a)
    for (int b = 0; b < payload.size; ++b) {
      const auto n = grid.successors(OnewayGrid::encode(a, b)).size();
      if (a == 0 && b == 0)
        CHECK(n == 0);
      else if (a == 0 || b == 0)
        CHECK(n == 1);
      else
        CHECK(n == 2);
    }
}

TEST_CASE("generator determinism and solvability", "[domains]") {
  const json params{{"size", 15}, {"teleport_pairs", 4}};
  const auto a = generate_instance(DomainTag::maze_teleport, params, 7);
  const auto b = generate_instance(DomainTag::maze_teleport, params, 7);
  CHECK(a.to_json().dump() == b.to_json().dump());
  const auto c = generate_instance(DomainTag::maze_teleport, params, 8);
  CHECK(a.to_json().dump() != c.to_json().dump());

  const auto puzzle = generate_instance(DomainTag::sliding_puzzle, json{{"size", 3}}, 1);
  const auto plan = oracle::optimal_solve_astar_manhattan(puzzle, 100000);
  CHECK(plan.total_cost > 0);

  const auto grid = fixtures::oneway_grid(5);
  CHECK(grid.initial_state() == OnewayGrid::encode(4, 4));
  CHECK(grid.is_goal(OnewayGrid::encode(0, 0)));
}

TEST_CASE("feature vectors", "[domains]") {
  const auto grid = fixtures::oneway_grid(5);
  // layout: bias, a, b, remaining distance
  CHECK(grid.features(OnewayGrid::encode(0, 0))[3] == 0.0);
  CHECK(grid.features(OnewayGrid::encode(4, 4))[3] == 8.0);

  const json params{{"size", 15}, {"teleport_pairs", 4}};
  int dim = -1;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto maze = generate_instance(DomainTag::maze_teleport, params, seed);
    CHECK(maze.feature_dim() == 5 + 4);
    for (StateId s : sample_states(maze)) {
      const auto f = maze.features(s);
      if (dim < 0) dim = static_cast<int>(f.size());
      REQUIRE(static_cast<int>(f.size()) == dim);
      CHECK(f[0] == 1.0);
    }
  }
}

TEST_CASE("unit costs on grid domains, nonnegative elsewhere", "[domains]") {
  for (const auto& inst : sample_instances()) {
    const bool unit = inst.domain_tag() != DomainTag::explicit_graph;
    for (StateId s : sample_states(inst))
      for (const auto& succ : inst.successors(s)) {
        if (unit)
          CHECK(succ.cost == 1.0);
        else
          CHECK(succ.cost >= 0.0);
      }
  }
}

TEST_CASE("state encodings round-trip through their json form", "[domains]") {
  for (const auto& inst : sample_instances())
    for (StateId s : sample_states(inst)) {
      CHECK(inst.state_from_json(inst.state_to_json(s)) == s);
      CHECK_FALSE(inst.state_name(s).empty());
    }
}

TEST_CASE("instance json round-trip", "[domains]") {
  for (const auto& inst : sample_instances()) {
    const auto restored = ProblemInstance::from_json(inst.to_json());
    CHECK(restored.to_json().dump() == inst.to_json().dump());
    CHECK(restored.initial_state() == inst.initial_state());
  }
}

TEST_CASE("malformed state encodings are rejected", "[domains]") {
  const auto grid = fixtures::oneway_grid(5);
  CHECK_THROWS_AS(grid.successors(StateId{1, 0}), EncodingError);
  const auto inst = fixtures::greedy_detour_graph();
  CHECK_THROWS_AS(inst.is_goal(StateId{0, 99}), EncodingError);
}

TEST_CASE("sokoban pushes respect walls and other boxes", "[domains]") {
  // 5x5 room with a border wall, one box next to the right wall.
  SokobanLite p;
  p.size = 5;
  p.open.assign(25, 0);
  p.goal_at.assign(25, 0);
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) p.open[static_cast<std::size_t>(r * 5 + c)] = 1;
  p.goal_at[static_cast<std::size_t>(1 * 5 + 1)] = 1;
  p.agent_r = 2;
  p.agent_c = 1;
  p.initial_boxes = {2 * 5 + 2};
  ProblemInstance inst("room", DomainTag::sokoban_lite, p);

  const auto succ = inst.successors(inst.initial_state());
  // moves: down, up walk; right pushes the box to (2,3)
  bool pushed = false;
  for (const auto& s : succ) {
    const auto st = inst.payload<SokobanLite>().decode(s.state);
    if (st.agent == 2 * 5 + 2) {
      pushed = true;
      CHECK(st.boxes == std::vector<int>{2 * 5 + 3});
    }
  }
  CHECK(pushed);
  // pushing the box from (2,2) against the wall at (2,4) is legal once; from
  // (2,3) the push is blocked by the wall, so the agent cannot walk right.
  const auto& payload = inst.payload<SokobanLite>();
  SokobanLite::State wedged{2 * 5 + 2, {2 * 5 + 3}};
  for (const auto& s : inst.successors(payload.encode(wedged))) {
    const auto st = payload.decode(s.state);
    CHECK(st.boxes == std::vector<int>{2 * 5 + 3});  // box cannot move further
  }
}
