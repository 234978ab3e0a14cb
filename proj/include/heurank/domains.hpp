#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "heurank/core.hpp"

namespace heurank {

using json = nlohmann::json;

enum class DomainTag { explicit_graph, maze_teleport, sliding_puzzle, sokoban_lite, oneway_grid };

inline std::string to_string(DomainTag t) {
  switch (t) {
    case DomainTag::explicit_graph: return "explicit_graph";
    case DomainTag::maze_teleport: return "maze_teleport";
    case DomainTag::sliding_puzzle: return "sliding_puzzle";
    case DomainTag::sokoban_lite: return "sokoban_lite";
    case DomainTag::oneway_grid: return "oneway_grid";
  }
  throw Error("unknown domain tag");
}

inline DomainTag domain_tag_from_string(const std::string& s) {
  if (s == "explicit_graph") return DomainTag::explicit_graph;
  if (s == "maze_teleport") return DomainTag::maze_teleport;
  if (s == "sliding_puzzle") return DomainTag::sliding_puzzle;
  if (s == "sokoban_lite") return DomainTag::sokoban_lite;
  if (s == "oneway_grid") return DomainTag::oneway_grid;
  throw FormatError("unknown domain tag: " + s);
}

// ---------------------------------------------------------------------------
// explicit_graph: named nodes, directed weighted edges in declaration order,
// a goal set, and optional per-node reference heuristic values.
// ---------------------------------------------------------------------------

struct ExplicitGraph {
  std::vector<std::string> node_names;
  // adjacency[i] lists out-edges of node i in declaration order.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;
  std::vector<bool> goal;
  std::vector<std::optional<double>> reference_h;
  std::uint32_t initial = 0;

  std::uint32_t node_count() const { return static_cast<std::uint32_t>(node_names.size()); }

  std::uint32_t node_index(const std::string& name) const {
    for (std::uint32_t i = 0; i < node_names.size(); ++i)
      if (node_names[i] == name) return i;
    throw EncodingError("explicit_graph: unknown node " + name);
  }

  static StateId encode(std::uint32_t idx) { return StateId{0, idx}; }
  std::uint32_t decode(StateId s) const {
    if (s.hi != 0 || s.lo >= node_names.size()) throw EncodingError("explicit_graph: bad state encoding");
    return static_cast<std::uint32_t>(s.lo);
  }
};

// ---------------------------------------------------------------------------
// maze_teleport: n x n grid of open/wall cells, unit-cost moves, optional
// teleport pairs. Walking onto a teleport endpoint lands the agent on the
// paired endpoint; the transport only triggers on entry by a move.
// ---------------------------------------------------------------------------

struct MazeTeleport {
  int size = 0;
  std::vector<std::uint8_t> open;  // row-major, 1 = walkable
  int start_r = 0, start_c = 0;
  int goal_r = 0, goal_c = 0;
  std::vector<std::array<int, 4>> teleports;  // {r1, c1, r2, c2}

  bool is_open(int r, int c) const {
    return r >= 0 && c >= 0 && r < size && c < size && open[static_cast<std::size_t>(r) * size + c];
  }

  static StateId encode(int r, int c) {
    return StateId{0, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) | static_cast<std::uint32_t>(c)};
  }
  std::pair<int, int> decode(StateId s) const {
    int r = static_cast<int>(s.lo >> 32);
    int c = static_cast<int>(s.lo & 0xffffffffULL);
    if (s.hi != 0 || !is_open(r, c)) throw EncodingError("maze_teleport: bad state encoding");
    return {r, c};
  }

  // -1 when (r, c) is not a teleport endpoint, else the landing cell index.
  std::optional<std::pair<int, int>> teleport_exit(int r, int c) const {
    for (const auto& t : teleports) {
      if (t[0] == r && t[1] == c) return std::make_pair(t[2], t[3]);
      if (t[2] == r && t[3] == c) return std::make_pair(t[0], t[1]);
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// sliding_puzzle: k x k tiles 0..k*k-1 with 0 the blank; the goal is the
// identity layout (tile i on cell i). Moves are named by the direction the
// blank travels.
// ---------------------------------------------------------------------------

struct SlidingPuzzle {
  int size = 0;
  std::vector<std::uint8_t> initial_tiles;  // row-major tile per cell

  int cell_count() const { return size * size; }

  StateId encode(const std::vector<std::uint8_t>& tiles) const {
    // 5 bits per cell, little-endian across (lo, hi); supports up to 5x5.
    StateId s;
    for (int i = 0; i < cell_count(); ++i) {
      const int bit = i * 5;
      const std::uint64_t v = tiles[static_cast<std::size_t>(i)];
      if (bit < 64) {
        s.lo |= v << bit;
        if (bit + 5 > 64) s.hi |= v >> (64 - bit);
      } else {
        s.hi |= v << (bit - 64);
      }
    }
    return s;
  }

  std::vector<std::uint8_t> decode(StateId s) const {
    std::vector<std::uint8_t> tiles(static_cast<std::size_t>(cell_count()));
    std::vector<bool> seen(tiles.size(), false);
    for (int i = 0; i < cell_count(); ++i) {
      const int bit = i * 5;
      std::uint64_t v;
      if (bit < 64) {
        v = s.lo >> bit;
        if (bit + 5 > 64) v |= s.hi << (64 - bit);
      } else {
        v = s.hi >> (bit - 64);
      }
      v &= 0x1f;
      if (v >= tiles.size() || seen[v]) throw EncodingError("sliding_puzzle: bad state encoding");
      seen[v] = true;
      tiles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    return tiles;
  }
};

// ---------------------------------------------------------------------------
// sokoban_lite: small grid, up to a handful of boxes, no deadlock pruning.
// The agent walks or pushes one box per unit-cost move; the goal is every box
// on a goal cell.
// ---------------------------------------------------------------------------

struct SokobanLite {
  int size = 0;
  std::vector<std::uint8_t> open;      // 1 = not a wall
  std::vector<std::uint8_t> goal_at;   // 1 = goal cell
  int agent_r = 0, agent_c = 0;
  std::vector<int> initial_boxes;      // cell indices, sorted ascending

  int cell(int r, int c) const { return r * size + c; }
  bool is_open(int r, int c) const {
    return r >= 0 && c >= 0 && r < size && c < size && open[static_cast<std::size_t>(cell(r, c))];
  }

  struct State {
    int agent;
    std::vector<int> boxes;  // sorted
  };

  StateId encode(const State& st) const {
    StateId s;
    s.lo = static_cast<std::uint64_t>(static_cast<std::uint8_t>(st.agent));
    for (std::size_t i = 0; i < st.boxes.size(); ++i)
      s.lo |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(st.boxes[i])) << (8 * (i + 1));
    s.hi = st.boxes.size();
    return s;
  }

  State decode(StateId s) const {
    State st;
    st.agent = static_cast<int>(s.lo & 0xff);
    const auto n = static_cast<std::size_t>(s.hi);
    if (n > 6) throw EncodingError("sokoban_lite: bad state encoding");
    for (std::size_t i = 0; i < n; ++i) st.boxes.push_back(static_cast<int>((s.lo >> (8 * (i + 1))) & 0xff));
    for (int b : st.boxes)
      if (b < 0 || b >= size * size || !open[static_cast<std::size_t>(b)]) throw EncodingError("sokoban_lite: bad box cell");
    if (st.agent < 0 || st.agent >= size * size || !open[static_cast<std::size_t>(st.agent)])
      throw EncodingError("sokoban_lite: bad agent cell");
    return st;
  }
};

// ---------------------------------------------------------------------------
// oneway_grid: positions (a, b) on an n x n grid; actions "down" (a-1, b) and
// "left" (a, b-1), unit cost; start (n-1, n-1), goal (0, 0).
// ---------------------------------------------------------------------------

struct OnewayGrid {
  int size = 0;

  static StateId encode(int a, int b) {
    return StateId{0, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b)};
  }
  std::pair<int, int> decode(StateId s) const {
    int a = static_cast<int>(s.lo >> 32);
    int b = static_cast<int>(s.lo & 0xffffffffULL);
    if (s.hi != 0 || a < 0 || b < 0 || a >= size || b >= size) throw EncodingError("oneway_grid: bad state encoding");
    return {a, b};
  }
};

// ---------------------------------------------------------------------------
// ProblemInstance
// ---------------------------------------------------------------------------

class ProblemInstance {
 public:
  using Payload = std::variant<ExplicitGraph, MazeTeleport, SlidingPuzzle, SokobanLite, OnewayGrid>;

  ProblemInstance(std::string id, DomainTag tag, Payload payload, json params = json::object())
      : instance_id_(std::move(id)), tag_(tag), payload_(std::move(payload)), params_(std::move(params)) {}

  const std::string& instance_id() const { return instance_id_; }
  DomainTag domain_tag() const { return tag_; }
  const json& params() const { return params_; }

  template <typename T>
  const T& payload() const {
    return std::get<T>(payload_);
  }

  StateId initial_state() const {
    return std::visit(
        [](const auto& p) -> StateId {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExplicitGraph>) return ExplicitGraph::encode(p.initial);
          if constexpr (std::is_same_v<P, MazeTeleport>) return MazeTeleport::encode(p.start_r, p.start_c);
          if constexpr (std::is_same_v<P, SlidingPuzzle>) return p.encode(p.initial_tiles);
          if constexpr (std::is_same_v<P, SokobanLite>)
            return p.encode(SokobanLite::State{p.cell(p.agent_r, p.agent_c), p.initial_boxes});
          if constexpr (std::is_same_v<P, OnewayGrid>) return OnewayGrid::encode(p.size - 1, p.size - 1);
        },
        payload_);
  }

  bool is_goal(StateId s) const;
  // Every (s, s') edge with its cost, in the fixed per-domain action order
  // (lexicographic by action name; declaration order for explicit graphs).
  std::vector<Successor> successors(StateId s) const;
  std::vector<double> features(StateId s) const;
  int feature_dim() const;

  std::string state_name(StateId s) const;
  json state_to_json(StateId s) const;
  StateId state_from_json(const json& j) const;

  json to_json() const;
  static ProblemInstance from_json(const json& j);

 private:
  std::string instance_id_;
  DomainTag tag_;
  Payload payload_;
  json params_;
};

// --- goal predicates --------------------------------------------------------

inline bool ProblemInstance::is_goal(StateId s) const {
  switch (tag_) {
    case DomainTag::explicit_graph: {
      const auto& g = payload<ExplicitGraph>();
      return g.goal[g.decode(s)];
    }
    case DomainTag::maze_teleport: {
      const auto& m = payload<MazeTeleport>();
      auto [r, c] = m.decode(s);
      return r == m.goal_r && c == m.goal_c;
    }
    case DomainTag::sliding_puzzle: {
      const auto& p = payload<SlidingPuzzle>();
      auto tiles = p.decode(s);
      for (std::size_t i = 0; i < tiles.size(); ++i)
        if (tiles[i] != i) return false;
      return true;
    }
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      auto st = p.decode(s);
      for (int b : st.boxes)
        if (!p.goal_at[static_cast<std::size_t>(b)]) return false;
      return true;
    }
    case DomainTag::oneway_grid: {
      const auto& p = payload<OnewayGrid>();
      auto [a, b] = p.decode(s);
      return a == 0 && b == 0;
    }
  }
  throw Error("unreachable");
}

// --- successor generation ----------------------------------------------------

namespace detail {
// Action order shared by the grid domains: lexicographic by action name.
// down, left, right, up as (dr, dc) on (row, col) grids.
inline constexpr std::array<std::pair<int, int>, 4> kGridMoves = {
    std::pair<int, int>{+1, 0},   // down
    std::pair<int, int>{0, -1},   // left
    std::pair<int, int>{0, +1},   // right
    std::pair<int, int>{-1, 0},   // up
};
}  // namespace detail

inline std::vector<Successor> ProblemInstance::successors(StateId s) const {
  std::vector<Successor> out;
  switch (tag_) {
    case DomainTag::explicit_graph: {
      const auto& g = payload<ExplicitGraph>();
      for (const auto& [to, cost] : g.adjacency[g.decode(s)]) out.push_back({ExplicitGraph::encode(to), cost});
      return out;
    }
    case DomainTag::maze_teleport: {
      const auto& m = payload<MazeTeleport>();
      auto [r, c] = m.decode(s);
      for (const auto& [dr, dc] : detail::kGridMoves) {
        int nr = r + dr, nc = c + dc;
        if (!m.is_open(nr, nc)) continue;
        if (auto exit = m.teleport_exit(nr, nc)) {
          nr = exit->first;
          nc = exit->second;
        }
        out.push_back({MazeTeleport::encode(nr, nc), 1.0});
      }
      return out;
    }
    case DomainTag::sliding_puzzle: {
      const auto& p = payload<SlidingPuzzle>();
      auto tiles = p.decode(s);
      int blank = 0;
      while (tiles[static_cast<std::size_t>(blank)] != 0) ++blank;
      const int br = blank / p.size, bc = blank % p.size;
      for (const auto& [dr, dc] : detail::kGridMoves) {
        const int nr = br + dr, nc = bc + dc;
        if (nr < 0 || nc < 0 || nr >= p.size || nc >= p.size) continue;
        auto next = tiles;
        std::swap(next[static_cast<std::size_t>(blank)], next[static_cast<std::size_t>(nr * p.size + nc)]);
        out.push_back({p.encode(next), 1.0});
      }
      return out;
    }
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      auto st = p.decode(s);
      const int ar = st.agent / p.size, ac = st.agent % p.size;
      for (const auto& [dr, dc] : detail::kGridMoves) {
        const int nr = ar + dr, nc = ac + dc;
        if (!p.is_open(nr, nc)) continue;
        const int ncell = p.cell(nr, nc);
        auto box_it = std::find(st.boxes.begin(), st.boxes.end(), ncell);
        if (box_it == st.boxes.end()) {
          SokobanLite::State next{ncell, st.boxes};
          out.push_back({p.encode(next), 1.0});
          continue;
        }
        const int br = nr + dr, bc = nc + dc;
        if (!p.is_open(br, bc)) continue;
        const int bcell = p.cell(br, bc);
        if (std::find(st.boxes.begin(), st.boxes.end(), bcell) != st.boxes.end()) continue;
        SokobanLite::State next{ncell, st.boxes};
        *std::find(next.boxes.begin(), next.boxes.end(), ncell) = bcell;
        std::sort(next.boxes.begin(), next.boxes.end());
        out.push_back({p.encode(next), 1.0});
      }
      return out;
    }
    case DomainTag::oneway_grid: {
      const auto& p = payload<OnewayGrid>();
      auto [a, b] = p.decode(s);
      if (a > 0) out.push_back({OnewayGrid::encode(a - 1, b), 1.0});  // down
      if (b > 0) out.push_back({OnewayGrid::encode(a, b - 1), 1.0});  // left
      return out;
    }
  }
  throw Error("unreachable");
}

// --- features ----------------------------------------------------------------

namespace detail {
inline int manhattan(int r1, int c1, int r2, int c2) { return std::abs(r1 - r2) + std::abs(c1 - c2); }
}  // namespace detail

inline int ProblemInstance::feature_dim() const {
  switch (tag_) {
    case DomainTag::explicit_graph: return 3;
    case DomainTag::maze_teleport: return 5 + static_cast<int>(payload<MazeTeleport>().teleports.size());
    case DomainTag::sliding_puzzle: {
      const auto& p = payload<SlidingPuzzle>();
      return 3 + p.cell_count() - 1;
    }
    case DomainTag::sokoban_lite: return 4;
    case DomainTag::oneway_grid: return 4;
  }
  throw Error("unreachable");
}

inline std::vector<double> ProblemInstance::features(StateId s) const {
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(feature_dim()));
  f.push_back(1.0);  // bias
  switch (tag_) {
    case DomainTag::explicit_graph: {
      const auto& g = payload<ExplicitGraph>();
      const auto idx = g.decode(s);
      const double denom = g.node_count() > 1 ? g.node_count() - 1.0 : 1.0;
      f.push_back(idx / denom);
      f.push_back(static_cast<double>(g.adjacency[idx].size()));
      return f;
    }
    case DomainTag::maze_teleport: {
      const auto& m = payload<MazeTeleport>();
      auto [r, c] = m.decode(s);
      const double denom = m.size > 1 ? m.size - 1.0 : 1.0;
      f.push_back(r / denom);
      f.push_back(c / denom);
      const int direct = detail::manhattan(r, c, m.goal_r, m.goal_c);
      f.push_back(static_cast<double>(direct));
      // Teleport-aware straight-line bound: best of the direct walk and a walk
      // through either endpoint of any teleport pair.
      int best = direct;
      for (const auto& t : m.teleports) {
        best = std::min(best, detail::manhattan(r, c, t[0], t[1]) + 1 + detail::manhattan(t[2], t[3], m.goal_r, m.goal_c));
        best = std::min(best, detail::manhattan(r, c, t[2], t[3]) + 1 + detail::manhattan(t[0], t[1], m.goal_r, m.goal_c));
      }
      f.push_back(static_cast<double>(best));
      for (const auto& t : m.teleports)
        f.push_back(static_cast<double>(
            std::min(detail::manhattan(r, c, t[0], t[1]), detail::manhattan(r, c, t[2], t[3]))));
      return f;
    }
    case DomainTag::sliding_puzzle: {
      const auto& p = payload<SlidingPuzzle>();
      auto tiles = p.decode(s);
      int misplaced = 0, total = 0;
      std::vector<double> per_tile(static_cast<std::size_t>(p.cell_count() - 1), 0.0);
      for (int cell = 0; cell < p.cell_count(); ++cell) {
        const int t = tiles[static_cast<std::size_t>(cell)];
        if (t == 0) continue;
        const int d = detail::manhattan(cell / p.size, cell % p.size, t / p.size, t % p.size);
        per_tile[static_cast<std::size_t>(t - 1)] = d;
        total += d;
        if (d > 0) ++misplaced;
      }
      f.push_back(static_cast<double>(misplaced));
      f.push_back(static_cast<double>(total));
      for (double d : per_tile) f.push_back(d);
      return f;
    }
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      auto st = p.decode(s);
      std::vector<int> goals;
      for (int i = 0; i < p.size * p.size; ++i)
        if (p.goal_at[static_cast<std::size_t>(i)]) goals.push_back(i);
      int off_goal = 0;
      for (int b : st.boxes)
        if (!p.goal_at[static_cast<std::size_t>(b)]) ++off_goal;
      f.push_back(static_cast<double>(off_goal));
      // Min-cost assignment of boxes to goals by Manhattan distance; box and
      // goal counts are small enough to brute-force permutations.
      std::vector<int> perm(goals.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      int best = std::numeric_limits<int>::max();
      do {
        int cost = 0;
        for (std::size_t i = 0; i < st.boxes.size() && i < perm.size(); ++i) {
          const int b = st.boxes[i], g = goals[static_cast<std::size_t>(perm[i])];
          cost += detail::manhattan(b / p.size, b % p.size, g / p.size, g % p.size);
        }
        best = std::min(best, cost);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (best == std::numeric_limits<int>::max()) best = 0;
      f.push_back(static_cast<double>(best));
      int nearest = 0;
      if (off_goal > 0) {
        nearest = std::numeric_limits<int>::max();
        const int ar = st.agent / p.size, ac = st.agent % p.size;
        for (int b : st.boxes) {
          if (p.goal_at[static_cast<std::size_t>(b)]) continue;
          nearest = std::min(nearest, detail::manhattan(ar, ac, b / p.size, b % p.size));
        }
      }
      f.push_back(static_cast<double>(nearest));
      return f;
    }
    case DomainTag::oneway_grid: {
      const auto& p = payload<OnewayGrid>();
      auto [a, b] = p.decode(s);
      f.push_back(static_cast<double>(a));
      f.push_back(static_cast<double>(b));
      f.push_back(static_cast<double>(a + b));  // exact remaining distance
      return f;
    }
  }
  throw Error("unreachable");
}

// --- state rendering / serialization -----------------------------------------

inline std::string ProblemInstance::state_name(StateId s) const {
  switch (tag_) {
    case DomainTag::explicit_graph:
      return payload<ExplicitGraph>().node_names[payload<ExplicitGraph>().decode(s)];
    case DomainTag::maze_teleport: {
      auto [r, c] = payload<MazeTeleport>().decode(s);
      return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
    }
    case DomainTag::sliding_puzzle: {
      auto tiles = payload<SlidingPuzzle>().decode(s);
      std::string out = "[";
      for (std::size_t i = 0; i < tiles.size(); ++i) {
        if (i) out += " ";
        out += std::to_string(tiles[i]);
      }
      return out + "]";
    }
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      auto st = p.decode(s);
      std::string out = "agent(" + std::to_string(st.agent / p.size) + "," + std::to_string(st.agent % p.size) + ") boxes[";
      for (std::size_t i = 0; i < st.boxes.size(); ++i) {
        if (i) out += " ";
        out += "(" + std::to_string(st.boxes[i] / p.size) + "," + std::to_string(st.boxes[i] % p.size) + ")";
      }
      return out + "]";
    }
    case DomainTag::oneway_grid: {
      auto [a, b] = payload<OnewayGrid>().decode(s);
      return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
    }
  }
  throw Error("unreachable");
}

inline json ProblemInstance::state_to_json(StateId s) const {
  switch (tag_) {
    case DomainTag::explicit_graph:
      return payload<ExplicitGraph>().node_names[payload<ExplicitGraph>().decode(s)];
    case DomainTag::maze_teleport: {
      auto [r, c] = payload<MazeTeleport>().decode(s);
      return json::array({r, c});
    }
    case DomainTag::sliding_puzzle:
      return json(payload<SlidingPuzzle>().decode(s));
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      auto st = p.decode(s);
      json boxes = json::array();
      for (int b : st.boxes) boxes.push_back(json::array({b / p.size, b % p.size}));
      return json{{"agent", json::array({st.agent / p.size, st.agent % p.size})}, {"boxes", boxes}};
    }
    case DomainTag::oneway_grid: {
      auto [a, b] = payload<OnewayGrid>().decode(s);
      return json::array({a, b});
    }
  }
  throw Error("unreachable");
}

inline StateId ProblemInstance::state_from_json(const json& j) const {
  switch (tag_) {
    case DomainTag::explicit_graph:
      return ExplicitGraph::encode(payload<ExplicitGraph>().node_index(j.get<std::string>()));
    case DomainTag::maze_teleport:
      return MazeTeleport::encode(j.at(0).get<int>(), j.at(1).get<int>());
    case DomainTag::sliding_puzzle:
      return payload<SlidingPuzzle>().encode(j.get<std::vector<std::uint8_t>>());
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      SokobanLite::State st;
      st.agent = p.cell(j.at("agent").at(0).get<int>(), j.at("agent").at(1).get<int>());
      for (const auto& b : j.at("boxes")) st.boxes.push_back(p.cell(b.at(0).get<int>(), b.at(1).get<int>()));
      std::sort(st.boxes.begin(), st.boxes.end());
      return p.encode(st);
    }
    case DomainTag::oneway_grid:
      return OnewayGrid::encode(j.at(0).get<int>(), j.at(1).get<int>());
  }
  throw Error("unreachable");
}

inline json ProblemInstance::to_json() const {
  json payload_json;
  json goal_spec;
  switch (tag_) {
    case DomainTag::explicit_graph: {
      const auto& g = payload<ExplicitGraph>();
      json edges = json::array();
      for (std::uint32_t i = 0; i < g.node_count(); ++i)
        for (const auto& [to, cost] : g.adjacency[i])
          edges.push_back(json::array({g.node_names[i], g.node_names[to], cost}));
      json goals = json::array();
      for (std::uint32_t i = 0; i < g.node_count(); ++i)
        if (g.goal[i]) goals.push_back(g.node_names[i]);
      payload_json = json{{"nodes", g.node_names}, {"edges", edges}, {"goals", goals}};
      json ref = json::object();
      bool any = false;
      for (std::uint32_t i = 0; i < g.node_count(); ++i)
        if (g.reference_h[i]) {
          ref[g.node_names[i]] = *g.reference_h[i];
          any = true;
        }
      if (any) payload_json["reference_h"] = ref;
      goal_spec = json{{"goals", goals}};
      break;
    }
    case DomainTag::maze_teleport: {
      const auto& m = payload<MazeTeleport>();
      std::vector<std::string> rows;
      for (int r = 0; r < m.size; ++r) {
        std::string row;
        for (int c = 0; c < m.size; ++c) row += m.is_open(r, c) ? '.' : '#';
        rows.push_back(row);
      }
      json tele = json::array();
      for (const auto& t : m.teleports) tele.push_back(json::array({t[0], t[1], t[2], t[3]}));
      payload_json = json{{"size", m.size},
                          {"rows", rows},
                          {"start", json::array({m.start_r, m.start_c})},
                          {"goal", json::array({m.goal_r, m.goal_c})},
                          {"teleports", tele}};
      goal_spec = json{{"cell", json::array({m.goal_r, m.goal_c})}};
      break;
    }
    case DomainTag::sliding_puzzle: {
      const auto& p = payload<SlidingPuzzle>();
      payload_json = json{{"size", p.size}, {"tiles", p.initial_tiles}};
      goal_spec = json{{"identity", true}};
      break;
    }
    case DomainTag::sokoban_lite: {
      const auto& p = payload<SokobanLite>();
      std::vector<std::string> rows;
      for (int r = 0; r < p.size; ++r) {
        std::string row;
        for (int c = 0; c < p.size; ++c) {
          const auto i = static_cast<std::size_t>(p.cell(r, c));
          row += p.open[i] ? (p.goal_at[i] ? 'o' : '.') : '#';
        }
        rows.push_back(row);
      }
      json boxes = json::array();
      for (int b : p.initial_boxes) boxes.push_back(json::array({b / p.size, b % p.size}));
      payload_json = json{{"size", p.size},
                          {"rows", rows},
                          {"agent", json::array({p.agent_r, p.agent_c})},
                          {"boxes", boxes}};
      json goals = json::array();
      for (int i = 0; i < p.size * p.size; ++i)
        if (p.goal_at[static_cast<std::size_t>(i)]) goals.push_back(json::array({i / p.size, i % p.size}));
      goal_spec = json{{"boxes_on", goals}};
      break;
    }
    case DomainTag::oneway_grid: {
      const auto& p = payload<OnewayGrid>();
      payload_json = json{{"size", p.size}};
      goal_spec = json{{"cell", json::array({0, 0})}};
      break;
    }
  }
  return json{{"instance_id", instance_id_},
              {"domain_tag", to_string(tag_)},
              {"params", params_},
              {"payload", payload_json},
              {"initial_state", state_to_json(initial_state())},
              {"goal_spec", goal_spec}};
}

inline ProblemInstance ProblemInstance::from_json(const json& j) {
  const auto tag = domain_tag_from_string(j.at("domain_tag").get<std::string>());
  const auto& pj = j.at("payload");
  Payload payload;
  switch (tag) {
    case DomainTag::explicit_graph: {
      ExplicitGraph g;
      g.node_names = pj.at("nodes").get<std::vector<std::string>>();
      g.adjacency.resize(g.node_names.size());
      g.goal.assign(g.node_names.size(), false);
      g.reference_h.assign(g.node_names.size(), std::nullopt);
      for (const auto& e : pj.at("edges"))
        g.adjacency[g.node_index(e.at(0).get<std::string>())].push_back(
            {g.node_index(e.at(1).get<std::string>()), e.at(2).get<double>()});
      for (const auto& name : pj.at("goals")) g.goal[g.node_index(name.get<std::string>())] = true;
      if (pj.contains("reference_h"))
        for (const auto& [name, v] : pj.at("reference_h").items()) g.reference_h[g.node_index(name)] = v.get<double>();
      g.initial = g.node_index(j.at("initial_state").get<std::string>());
      payload = std::move(g);
      break;
    }
    case DomainTag::maze_teleport: {
      MazeTeleport m;
      m.size = pj.at("size").get<int>();
      const auto rows = pj.at("rows").get<std::vector<std::string>>();
      m.open.assign(static_cast<std::size_t>(m.size) * m.size, 0);
      for (int r = 0; r < m.size; ++r)
        for (int c = 0; c < m.size; ++c)
          m.open[static_cast<std::size_t>(r) * m.size + c] = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '.';
      m.start_r = pj.at("start").at(0).get<int>();
      m.start_c = pj.at("start").at(1).get<int>();
      m.goal_r = pj.at("goal").at(0).get<int>();
      m.goal_c = pj.at("goal").at(1).get<int>();
      for (const auto& t : pj.at("teleports"))
        m.teleports.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(), t.at(3).get<int>()});
      payload = std::move(m);
      break;
    }
    case DomainTag::sliding_puzzle: {
      SlidingPuzzle p;
      p.size = pj.at("size").get<int>();
      p.initial_tiles = pj.at("tiles").get<std::vector<std::uint8_t>>();
      payload = std::move(p);
      break;
    }
    case DomainTag::sokoban_lite: {
      SokobanLite p;
      p.size = pj.at("size").get<int>();
      const auto rows = pj.at("rows").get<std::vector<std::string>>();
      p.open.assign(static_cast<std::size_t>(p.size) * p.size, 0);
      p.goal_at.assign(static_cast<std::size_t>(p.size) * p.size, 0);
      for (int r = 0; r < p.size; ++r)
        for (int c = 0; c < p.size; ++c) {
          const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
          const auto i = static_cast<std::size_t>(p.cell(r, c));
          p.open[i] = ch != '#';
          p.goal_at[i] = ch == 'o';
        }
      p.agent_r = pj.at("agent").at(0).get<int>();
      p.agent_c = pj.at("agent").at(1).get<int>();
      for (const auto& b : pj.at("boxes")) p.initial_boxes.push_back(p.cell(b.at(0).get<int>(), b.at(1).get<int>()));
      std::sort(p.initial_boxes.begin(), p.initial_boxes.end());
      payload = std::move(p);
      break;
    }
    case DomainTag::oneway_grid: {
      OnewayGrid p;
      p.size = pj.at("size").get<int>();
      payload = std::move(p);
      break;
    }
  }
  return ProblemInstance(j.at("instance_id").get<std::string>(), tag, std::move(payload),
                         j.value("params", json::object()));
}

// ---------------------------------------------------------------------------
// Admissible straight-line heuristics for the unit-cost grid domains
// (teleport-free mazes, puzzles, one-way grids).
// ---------------------------------------------------------------------------

inline std::function<double(StateId)> manhattan_heuristic(const ProblemInstance& inst) {
  switch (inst.domain_tag()) {
    case DomainTag::maze_teleport: {
      const auto& m = inst.payload<MazeTeleport>();
      if (!m.teleports.empty()) throw SpecError("manhattan_heuristic: not admissible with teleports");
      return [&m](StateId s) {
        auto [r, c] = m.decode(s);
        return static_cast<double>(detail::manhattan(r, c, m.goal_r, m.goal_c));
      };
    }
    case DomainTag::sliding_puzzle: {
      const auto& p = inst.payload<SlidingPuzzle>();
      return [&p](StateId s) {
        auto tiles = p.decode(s);
        int total = 0;
        for (int cell = 0; cell < p.cell_count(); ++cell) {
          const int t = tiles[static_cast<std::size_t>(cell)];
          if (t == 0) continue;
          total += detail::manhattan(cell / p.size, cell % p.size, t / p.size, t % p.size);
        }
        return static_cast<double>(total);
      };
    }
    case DomainTag::oneway_grid: {
      const auto& p = inst.payload<OnewayGrid>();
      return [&p](StateId s) {
        auto [a, b] = p.decode(s);
        return static_cast<double>(a + b);
      };
    }
    default:
      throw SpecError("manhattan_heuristic: unsupported domain");
  }
}

// The stored per-node heuristic of an explicit graph (errors when absent).
inline std::function<double(StateId)> reference_heuristic(const ProblemInstance& inst) {
  const auto& g = inst.payload<ExplicitGraph>();
  return [&g](StateId s) {
    const auto idx = g.decode(s);
    if (!g.reference_h[idx]) throw SpecError("reference_heuristic: node " + g.node_names[idx] + " has no value");
    return *g.reference_h[idx];
  };
}

}  // namespace heurank
