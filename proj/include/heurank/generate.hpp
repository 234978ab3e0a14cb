#pragma once

#include <random>
#include <string>

#include "heurank/domains.hpp"
#include "heurank/oracle.hpp"

namespace heurank {

// Seeded instance generation. Every domain draws from one mt19937_64 stream
// through uniform_below, so identical (seed, params) give byte-identical
// instances. Each attempt is checked for solvability with the oracle; the
// generator retries with derived sub-seeds up to `max_attempts`.
struct GenerateOptions {
  int max_attempts = 100;
  std::size_t solvability_expansion_cap = 100000;
};

namespace detail {

inline std::uint64_t sub_seed(std::uint64_t seed, int attempt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Depth-first carving over the lattice of cells at even coordinates, giving a
// spanning tree of corridors (a perfect maze).
inline MazeTeleport carve_maze(int size, std::mt19937_64& rng) {
  MazeTeleport m;
  m.size = size;
  m.open.assign(static_cast<std::size_t>(size) * size, 0);
  const int lattice = (size + 1) / 2;
  auto cell_of = [&](int lr, int lc) { return std::pair<int, int>{2 * lr, 2 * lc}; };
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(lattice) * lattice, 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  visited[0] = 1;
  m.open[0] = 1;
  constexpr std::array<std::pair<int, int>, 4> dirs = {{{1, 0}, {0, -1}, {0, 1}, {-1, 0}}};
  while (!stack.empty()) {
    auto [lr, lc] = stack.back();
    std::vector<std::pair<int, int>> options;
    for (const auto& [dr, dc] : dirs) {
      const int nr = lr + dr, nc = lc + dc;
      if (nr < 0 || nc < 0 || nr >= lattice || nc >= lattice) continue;
      if (2 * nr >= size || 2 * nc >= size) continue;
      if (!visited[static_cast<std::size_t>(nr) * lattice + nc]) options.push_back({nr, nc});
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    auto [nr, nc] = options[uniform_below(rng, options.size())];
    visited[static_cast<std::size_t>(nr) * lattice + nc] = 1;
    auto [cr, cc] = cell_of(nr, nc);
    auto [pr, pc] = cell_of(lr, lc);
    m.open[static_cast<std::size_t>(cr) * size + cc] = 1;
    m.open[static_cast<std::size_t>((cr + pr) / 2) * size + (cc + pc) / 2] = 1;
    stack.push_back({nr, nc});
  }
  return m;
}

inline ProblemInstance build_maze(const std::string& id, const json& params, std::uint64_t seed) {
  const int size = params.at("size").get<int>();
  if (size < 2) throw GenerationError("maze_teleport: size must be >= 2");
  const int pairs = params.value("teleport_pairs", 0);
  if (pairs < 0) throw GenerationError("maze_teleport: teleport_pairs must be >= 0");
  std::mt19937_64 rng(seed);
  MazeTeleport m = carve_maze(size, rng);
  m.start_r = m.start_c = 0;
  // Lower-right open lattice corner; the literal corner for odd sizes.
  const int last = 2 * ((size - 1) / 2);
  m.goal_r = m.goal_c = last;

  // Break a share of the remaining walls to add branches and cycles.
  const int to_break = params.value("broken_walls", size);
  std::vector<int> candidates;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      if (m.is_open(r, c)) continue;
      const bool horizontal = m.is_open(r, c - 1) && m.is_open(r, c + 1);
      const bool vertical = m.is_open(r - 1, c) && m.is_open(r + 1, c);
      if (horizontal || vertical) candidates.push_back(r * size + c);
    }
  for (int k = 0; k < to_break && !candidates.empty(); ++k) {
    const auto pick = uniform_below(rng, candidates.size());
    m.open[static_cast<std::size_t>(candidates[pick])] = 1;
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  // Teleport endpoints on distinct open cells away from start and goal.
  std::vector<int> open_cells;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      if (m.is_open(r, c) && !(r == m.start_r && c == m.start_c) && !(r == m.goal_r && c == m.goal_c))
        open_cells.push_back(r * size + c);
  if (static_cast<std::size_t>(2 * pairs) > open_cells.size())
    throw GenerationError("maze_teleport: not enough open cells for the requested teleports");
  for (int p = 0; p < pairs; ++p) {
    std::array<int, 4> t{};
    for (int e = 0; e < 2; ++e) {
      const auto pick = uniform_below(rng, open_cells.size());
      const int cell = open_cells[pick];
      open_cells.erase(open_cells.begin() + static_cast<std::ptrdiff_t>(pick));
      t[2 * e] = cell / size;
      t[2 * e + 1] = cell % size;
    }
    m.teleports.push_back(t);
  }
  return ProblemInstance(id, DomainTag::maze_teleport, std::move(m), params);
}

inline ProblemInstance build_puzzle(const std::string& id, const json& params, std::uint64_t seed) {
  const int size = params.at("size").get<int>();
  if (size < 2) throw GenerationError("sliding_puzzle: size must be >= 2");
  if (size > 5) throw GenerationError("sliding_puzzle: sizes beyond 5 do not fit the state encoding");
  const int scramble = params.value("scramble_moves", 3 * size * size);
  std::mt19937_64 rng(seed);
  SlidingPuzzle p;
  p.size = size;
  p.initial_tiles.resize(static_cast<std::size_t>(size) * size);
  for (std::size_t i = 0; i < p.initial_tiles.size(); ++i) p.initial_tiles[i] = static_cast<std::uint8_t>(i);
  // Random walk from the goal keeps the instance solvable by construction.
  int blank = 0;
  int prev = -1;
  for (int step = 0; step < scramble; ++step) {
    const int br = blank / size, bc = blank % size;
    std::vector<int> moves;
    for (const auto& [dr, dc] : kGridMoves) {
      const int nr = br + dr, nc = bc + dc;
      if (nr < 0 || nc < 0 || nr >= size || nc >= size) continue;
      const int cell = nr * size + nc;
      if (cell == prev) continue;  // no immediate undo
      moves.push_back(cell);
    }
    const int cell = moves[uniform_below(rng, moves.size())];
    std::swap(p.initial_tiles[static_cast<std::size_t>(blank)], p.initial_tiles[static_cast<std::size_t>(cell)]);
    prev = blank;
    blank = cell;
  }
  return ProblemInstance(id, DomainTag::sliding_puzzle, std::move(p), params);
}

inline ProblemInstance build_sokoban(const std::string& id, const json& params, std::uint64_t seed) {
  const int size = params.at("size").get<int>();
  if (size < 4) throw GenerationError("sokoban_lite: size must be >= 4");
  const int boxes = params.at("boxes").get<int>();
  if (boxes < 1 || boxes > 4) throw GenerationError("sokoban_lite: boxes must be in 1..4");
  const double wall_density = params.value("wall_density", 0.15);
  std::mt19937_64 rng(seed);
  SokobanLite p;
  p.size = size;
  p.open.assign(static_cast<std::size_t>(size) * size, 0);
  p.goal_at.assign(static_cast<std::size_t>(size) * size, 0);
  std::vector<int> interior;
  for (int r = 1; r < size - 1; ++r)
    for (int c = 1; c < size - 1; ++c) {
      const int cell = p.cell(r, c);
      const bool wall = uniform_below(rng, 1000) < static_cast<std::uint64_t>(wall_density * 1000);
      p.open[static_cast<std::size_t>(cell)] = wall ? 0 : 1;
      if (!wall) interior.push_back(cell);
    }
  const std::size_t need = static_cast<std::size_t>(2 * boxes + 1);
  if (interior.size() < need) throw GenerationError("sokoban_lite: board too crowded");
  auto take = [&]() {
    const auto pick = uniform_below(rng, interior.size());
    const int cell = interior[pick];
    interior.erase(interior.begin() + static_cast<std::ptrdiff_t>(pick));
    return cell;
  };
  for (int b = 0; b < boxes; ++b) p.goal_at[static_cast<std::size_t>(take())] = 1;
  for (int b = 0; b < boxes; ++b) p.initial_boxes.push_back(take());
  std::sort(p.initial_boxes.begin(), p.initial_boxes.end());
  const int agent = take();
  p.agent_r = agent / size;
  p.agent_c = agent % size;
  return ProblemInstance(id, DomainTag::sokoban_lite, std::move(p), params);
}

}  // namespace detail

inline ProblemInstance generate_instance(DomainTag tag, const json& params, std::uint64_t seed,
                                         const GenerateOptions& opts = {}) {
  if (tag == DomainTag::oneway_grid) {
    const int size = params.at("size").get<int>();
    if (size < 2) throw GenerationError("oneway_grid: size must be >= 2");
    OnewayGrid p;
    p.size = size;
    const std::string id = "oneway" + std::to_string(size) + "x" + std::to_string(size);
    return ProblemInstance(id, DomainTag::oneway_grid, p, params);  // fixed instance, no randomness
  }
  if (tag == DomainTag::explicit_graph)
    throw GenerationError("explicit_graph instances are authored, not generated");

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    const std::uint64_t s = detail::sub_seed(seed, attempt);
    std::string id = to_string(tag) + "-s" + std::to_string(seed);
    if (attempt > 0) id += "-a" + std::to_string(attempt);
    ProblemInstance inst = [&] {
      switch (tag) {
        case DomainTag::maze_teleport: return detail::build_maze(id, params, s);
        case DomainTag::sliding_puzzle: return detail::build_puzzle(id, params, s);
        case DomainTag::sokoban_lite: return detail::build_sokoban(id, params, s);
        default: throw GenerationError("unsupported domain");
      }
    }();
    try {
      if (inst.is_goal(inst.initial_state())) continue;  // trivial instance, retry
      if (tag == DomainTag::sliding_puzzle)
        oracle::optimal_solve_astar_manhattan(inst, opts.solvability_expansion_cap);
      else
        oracle::optimal_solve(inst, {opts.solvability_expansion_cap});
      return inst;
    } catch (const NoPlanError&) {
    } catch (const OracleCapacityError&) {
    }
  }
  throw GenerationError("could not generate a solvable " + to_string(tag) + " instance for seed " +
                        std::to_string(seed) + " within " + std::to_string(opts.max_attempts) + " attempts");
}

}  // namespace heurank
