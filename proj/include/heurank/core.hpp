#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace heurank {

// Canonical 128-bit state encoding. Each domain packs its state injectively
// into (hi, lo), so equality of encodings is equality of states and a plain
// hash map gives full duplicate detection.
struct StateId {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend constexpr auto operator<=>(const StateId&, const StateId&) = default;
};

struct StateIdHash {
  std::size_t operator()(const StateId& s) const noexcept {
    std::uint64_t x = s.hi * 0x9e3779b97f4a7c15ULL ^ (s.lo + 0xbf58476d1ce4e5b9ULL);
    x ^= x >> 31;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

template <typename T>
using StateMap = std::unordered_map<StateId, T, StateIdHash>;
using StateSet = std::unordered_set<StateId, StateIdHash>;

struct Successor {
  StateId state;
  double cost = 1.0;
};

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode named by the module contracts maps to
// one of these; all derive from Error so callers can catch broadly.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncodingError : Error {
  using Error::Error;
};
struct GenerationError : Error {
  using Error::Error;
};
struct NoPlanError : Error {
  using Error::Error;
};
struct OracleCapacityError : Error {
  using Error::Error;
};
struct TraceError : Error {
  using Error::Error;
};
struct LabelError : Error {
  explicit LabelError(const std::string& what, std::vector<std::string> states = {})
      : Error(what), missing_states(std::move(states)) {}
  std::vector<std::string> missing_states;
};
struct RecordKindError : Error {
  using Error::Error;
};
struct CertificationInconclusiveError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct FileDependencyError : Error {
  using Error::Error;
};
struct SpecError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

struct PlanEdge {
  StateId from;
  StateId to;
  double cost = 0.0;
};

// An ordered edge chain from a start state. An empty plan (no edges) is the
// solution for instances whose initial state is already a goal.
struct Plan {
  StateId start{};
  std::vector<PlanEdge> edges;
  double total_cost = 0.0;

  std::size_t length() const { return edges.size(); }

  std::vector<StateId> states() const {
    std::vector<StateId> out;
    out.reserve(edges.size() + 1);
    out.push_back(start);
    for (const auto& e : edges) out.push_back(e.to);
    return out;
  }

  StateId final_state() const { return edges.empty() ? start : edges.back().to; }
};

inline Plan make_plan(StateId start, std::vector<PlanEdge> edges) {
  Plan p;
  p.start = start;
  StateId at = start;
  for (const auto& e : edges) {
    if (e.from != at) throw Error("make_plan: edges do not chain");
    if (e.cost < 0) throw Error("make_plan: negative edge cost");
    p.total_cost += e.cost;
    at = e.to;
  }
  p.edges = std::move(edges);
  return p;
}

// Numerically stable softplus / logistic used by the surrogate losses.
// softplus(x) = log(1 + e^x) without ever exponentiating a large argument.
inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Bounded uniform sampling with rejection, so generated instances depend only
// on the engine's output stream and not on library distribution internals.
template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw Error("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename Rng, typename T>
void shuffle_indices(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace heurank
