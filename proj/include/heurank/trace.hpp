#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "heurank/core.hpp"
#include "heurank/domains.hpp"
#include "heurank/oracle.hpp"
#include "heurank/search.hpp"

namespace heurank {

enum class LossKind { lstar, lgbfs, lrt, l2, lbe };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::lstar: return "lstar";
    case LossKind::lgbfs: return "lgbfs";
    case LossKind::lrt: return "lrt";
    case LossKind::l2: return "l2";
    case LossKind::lbe: return "lbe";
  }
  throw Error("unknown loss kind");
}

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "lstar") return LossKind::lstar;
  if (s == "lgbfs") return LossKind::lgbfs;
  if (s == "lrt") return LossKind::lrt;
  if (s == "l2") return LossKind::l2;
  if (s == "lbe") return LossKind::lbe;
  throw FormatError("unknown loss kind: " + s);
}

// Deduplicated inventory of every state a trace touches, with per-state
// features and optional cost-to-goal labels. Label reads are counted so tests
// can assert which record kinds touch labels at all.
class StateTable {
 public:
  struct Entry {
    StateId id;
    std::vector<double> features;
    std::optional<double> hstar;
    bool dead_end = false;
    bool capped = false;  // hstar is the dead-end surrogate, not an exact value
  };

  std::size_t add(const Entry& e) {
    auto it = index_.find(e.id);
    if (it != index_.end()) return it->second;
    index_.emplace(e.id, entries_.size());
    entries_.push_back(e);
    return entries_.size() - 1;
  }

  bool contains(StateId s) const { return index_.contains(s); }
  const Entry& at(StateId s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw TraceError("state not in table");
    return entries_[it->second];
  }
  Entry& at_mutable(StateId s) {
    auto it = index_.find(s);
    if (it == index_.end()) throw TraceError("state not in table");
    return entries_[it->second];
  }

  const std::vector<double>& features_of(StateId s) const { return at(s).features; }

  double hstar_of(StateId s) const {
    ++hstar_reads_;
    const Entry& e = at(s);
    if (!e.hstar) throw LabelError("missing cost-to-goal label", {describe(s)});
    return *e.hstar;
  }
  bool has_hstar(StateId s) const { return at(s).hstar.has_value(); }

  std::size_t hstar_read_count() const { return hstar_reads_; }
  void reset_hstar_read_count() const { hstar_reads_ = 0; }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  static std::string describe(StateId s) {
    return "state(" + std::to_string(s.hi) + ":" + std::to_string(s.lo) + ")";
  }
  std::vector<Entry> entries_;
  StateMap<std::size_t> index_;
  mutable std::size_t hstar_reads_ = 0;
};

struct OffPathEntry {
  StateId id;
  double g = 0;
  int entry_step = 0;  // step at which the state first entered the open list
};

// One open-list snapshot of the restricted run: the i-th pop selects
// `on_path` out of an open list whose other members are `off_path`.
struct TraceStep {
  int index = 0;  // 1-based; index l is the pop of the plan's goal
  StateId on_path;
  double g_on_path = 0;
  std::vector<OffPathEntry> off_path;
};

// The open lists produced by running the forward search while expanding only
// the states of one optimal plan, with full duplicate detection and min-g
// retention for repeated generation. The supervision source for the ranking
// losses.
struct RankingTrace {
  std::string instance_id;
  Plan plan;
  std::vector<TraceStep> steps;  // 1..plan.length()
  std::shared_ptr<StateTable> state_table;
  // successors of each on-path state s_0..s_l, in domain order
  std::vector<std::vector<StateId>> on_path_children;

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.off_path.size();
    return n;
  }
};

// Builds the trace for a validated optimal plan. The plan's final (goal)
// state never appears in any off-path set: its pop terminates the search, so
// it is nobody's rival. Off-path states that happen to be goals are kept;
// with pop-time goal testing they are live rivals like any other.
inline RankingTrace ranking_trace(const ProblemInstance& inst, const Plan& plan) {
  if (!validate_plan(inst, plan))
    throw TraceError("ranking_trace: plan does not validate on instance " + inst.instance_id());
  const auto path = plan.states();
  StateSet path_set(path.begin(), path.end());
  if (path_set.size() != path.size()) throw TraceError("ranking_trace: plan revisits a state");

  RankingTrace trace;
  trace.instance_id = inst.instance_id();
  trace.plan = plan;
  trace.state_table = std::make_shared<StateTable>();
  auto intern = [&](StateId s) { trace.state_table->add({s, inst.features(s), std::nullopt, false, false}); };

  const StateId goal = plan.final_state();
  const std::size_t l = plan.length();
  for (StateId s : path) intern(s);

  struct OpenInfo {
    double g;
    int entry_step;
  };
  std::map<StateId, OpenInfo> open;  // ordered so off-path listings are deterministic
  StateMap<double> closed_g;

  open.emplace(path[0], OpenInfo{0.0, 0});
  double g_prefix = 0;

  trace.on_path_children.resize(l + 1);
  for (std::size_t i = 1; i <= l; ++i) {
    // expand s_{i-1}
    const StateId expanding = path[i - 1];
    auto open_it = open.find(expanding);
    if (open_it == open.end()) throw TraceError("ranking_trace: on-path state missing from open list");
    const double g_expanding = open_it->second.g;
    if (g_expanding < g_prefix - 1e-9)
      throw TraceError("ranking_trace: cheaper route to an on-path state; plan is not optimal");
    open.erase(open_it);
    closed_g.emplace(expanding, g_expanding);

    for (const Successor& succ : inst.successors(expanding)) {
      intern(succ.state);
      trace.on_path_children[i - 1].push_back(succ.state);
      const double g_new = g_expanding + succ.cost;
      if (auto c = closed_g.find(succ.state); c != closed_g.end()) {
        if (g_new < c->second - 1e-9)
          throw TraceError("ranking_trace: cheaper route to an expanded state; plan is not optimal");
        continue;
      }
      auto it = open.find(succ.state);
      if (it == open.end())
        open.emplace(succ.state, OpenInfo{g_new, static_cast<int>(i)});
      else if (g_new < it->second.g)
        it->second.g = g_new;  // duplicate generation keeps the minimum g
    }

    g_prefix += plan.edges[i - 1].cost;
    const StateId on_path = path[i];
    auto on_it = open.find(on_path);
    if (on_it == open.end()) throw TraceError("ranking_trace: next on-path state was not generated");

    TraceStep step;
    step.index = static_cast<int>(i);
    step.on_path = on_path;
    step.g_on_path = on_it->second.g;
    for (const auto& [s, info] : open) {
      if (s == on_path) continue;
      if (s == goal) continue;  // the terminating pop's state is never a rival
      // A future on-path state generated early (through a costlier edge) is a
      // legitimate rival until its own pop; earlier path states cannot be
      // here, they were removed when expanded.
      step.off_path.push_back(OffPathEntry{s, info.g, info.entry_step});
    }
    trace.steps.push_back(std::move(step));
  }

  if (!trace.steps.empty() && trace.steps.back().g_on_path < plan.total_cost - 1e-9)
    throw TraceError("ranking_trace: cheaper route to the goal; plan is not optimal");

  // Children of the goal state feed the Bellman records; they are not part of
  // any open list because the goal is never expanded.
  for (const Successor& succ : inst.successors(goal)) {
    intern(succ.state);
    trace.on_path_children[l].push_back(succ.state);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Loss-specific training records
// ---------------------------------------------------------------------------

struct PairRecord {
  StateId on_path;
  StateId rival;
  double g_on_path = 0;
  double g_rival = 0;
};

struct TransitionRecord {
  StateId parent;  // s_{i-1}
  StateId child;   // s_i
};

struct LabeledStateRecord {
  StateId state;
  double target = 0;  // exact cost-to-goal, or the capped dead-end surrogate
};

struct BellmanRecord {
  StateId state;
  double hstar = 0;
  std::vector<StateId> children;  // all domain successors; empty for terminal goals
};

struct RecordSet {
  LossKind kind = LossKind::lstar;
  std::string instance_id;
  std::vector<PairRecord> pairs;
  std::vector<TransitionRecord> transitions;
  std::vector<LabeledStateRecord> labeled;
  std::vector<BellmanRecord> bellman;
  std::shared_ptr<StateTable> state_table;

  std::size_t record_count() const {
    return pairs.size() + transitions.size() + labeled.size() + bellman.size();
  }
};

struct RecordOptions {
  // For the regression loss only: also emit labeled records for the off-path
  // states sitting in the trace's open lists (every such state then needs a
  // label, dead ends included).
  bool include_off_path_labels = false;
};

// Fills cost-to-goal labels into the trace's state table. On-path states
// always get exact values; off-path states are labeled when requested, and
// dead ends among them receive the capped surrogate only when `cap_dead_ends`
// is set (otherwise they stay unlabeled and record construction reports them).
struct LabelOptions {
  bool off_path = false;
  bool cap_dead_ends = false;
};

inline void attach_cost_to_goal_labels(RankingTrace& trace, const oracle::CostToGoalTable& table,
                                       const LabelOptions& opts = {}) {
  auto label_one = [&](StateId s) {
    auto& entry = trace.state_table->at_mutable(s);
    if (auto v = table.get(s)) {
      entry.hstar = *v;
      entry.dead_end = false;
      entry.capped = false;
      return;
    }
    if (table.is_dead_end(s)) {
      entry.dead_end = true;
      if (opts.cap_dead_ends) {
        entry.hstar = table.dead_end_cap();
        entry.capped = true;
      }
    }
  };
  for (StateId s : trace.plan.states()) label_one(s);
  if (opts.off_path)
    for (const auto& step : trace.steps)
      for (const auto& off : step.off_path) label_one(off.id);
}

// Compiles a trace into the supervision units of one loss family.
//   lstar / lgbfs : one pair per (pop, off-path rival) over every pop of the
//                   restricted run, the terminating goal pop included — the
//                   full constraint set a zero-violation certificate needs.
//   lrt           : the l on-path transitions.
//   l2            : the l+1 labeled on-path states (plus off-path states on
//                   request).
//   lbe           : one parent/children bundle per on-path state.
inline RecordSet training_records(const RankingTrace& trace, LossKind kind, const RecordOptions& opts = {}) {
  RecordSet out;
  out.kind = kind;
  out.instance_id = trace.instance_id;
  out.state_table = trace.state_table;
  const auto path = trace.plan.states();
  const auto& table = *trace.state_table;

  switch (kind) {
    case LossKind::lstar:
    case LossKind::lgbfs: {
      for (const auto& step : trace.steps)
        for (const auto& off : step.off_path)
          out.pairs.push_back(PairRecord{step.on_path, off.id, step.g_on_path, off.g});
      break;
    }
    case LossKind::lrt: {
      for (const auto& e : trace.plan.edges) out.transitions.push_back(TransitionRecord{e.from, e.to});
      break;
    }
    case LossKind::l2: {
      std::vector<std::string> missing;
      auto emit = [&](StateId s) {
        if (!table.has_hstar(s)) {
          missing.push_back(trace.instance_id + " state(" + std::to_string(s.hi) + ":" + std::to_string(s.lo) + ")");
          return;
        }
        out.labeled.push_back(LabeledStateRecord{s, table.hstar_of(s)});
      };
      for (StateId s : path) emit(s);
      if (opts.include_off_path_labels) {
        StateSet seen(path.begin(), path.end());
        for (const auto& step : trace.steps)
          for (const auto& off : step.off_path)
            if (seen.insert(off.id).second) emit(off.id);
      }
      if (!missing.empty())
        throw LabelError("regression records need cost-to-goal labels for " + std::to_string(missing.size()) +
                             " unlabeled state(s); dead ends need the capped label",
                         missing);
      break;
    }
    case LossKind::lbe: {
      for (std::size_t i = 0; i < path.size(); ++i)
        out.bellman.push_back(BellmanRecord{path[i], table.hstar_of(path[i]), trace.on_path_children[i]});
      break;
    }
  }
  return out;
}

// Total pair records across traces (dataset statistics).
inline std::size_t count_pairs(const std::vector<RankingTrace>& traces) {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.pair_count();
  return n;
}

}  // namespace heurank
