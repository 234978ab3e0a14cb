#pragma once

#include <span>
#include <vector>

#include "heurank/core.hpp"
#include "heurank/trace.hpp"

namespace heurank {

// r(s_i, s_j) = alpha (g_i - g_j) + beta (h_i - h_j): the merit of the state
// the search should pop next minus the merit of an open rival. Negative means
// correctly ranked.
inline double r_value(double g_i, double g_j, double h_i, double h_j, double alpha, double beta) {
  return alpha * (g_i - g_j) + beta * (h_i - h_j);
}

// A tie (r == 0) already breaks the strictly-lowest-merit requirement, so the
// default counts it as a violation. strict_only counts r > 0 exactly as the
// published counting rule writes it.
enum class ViolationBoundary { ties_violate, strict_only };

inline bool is_violation(double r, ViolationBoundary b) {
  return b == ViolationBoundary::ties_violate ? r >= 0 : r > 0;
}

struct LossValueGrad {
  double value = 0;
  StateMap<double> d_h;  // d value / d h(s), accumulated per state
};

namespace detail {
inline double h_of(const StateMap<double>& h, StateId s) {
  auto it = h.find(s);
  if (it == h.end()) throw LabelError("missing heuristic value for a record state");
  return it->second;
}
}  // namespace detail

// Violation count over an explicit pair list (the training-record view, which
// covers every pop of the restricted run including the terminal one).
inline long pair_violations(std::span<const PairRecord> pairs, const StateMap<double>& h, double alpha, double beta,
                            ViolationBoundary boundary = ViolationBoundary::ties_violate) {
  long count = 0;
  for (const auto& p : pairs) {
    const double r = r_value(p.g_on_path, p.g_rival, detail::h_of(h, p.on_path), detail::h_of(h, p.rival), alpha, beta);
    if (is_violation(r, boundary)) ++count;
  }
  return count;
}

// Number of wrongly ranked expansion selections of a trace. The final step of
// a trace is the pop of the plan's goal — a pop that terminates the search
// rather than expanding — so it does not enter this count.
inline long loss_l01(const RankingTrace& trace, const StateMap<double>& h, double alpha, double beta,
                     ViolationBoundary boundary = ViolationBoundary::ties_violate) {
  long count = 0;
  for (const auto& step : trace.steps) {
    if (static_cast<std::size_t>(step.index) == trace.plan.length()) continue;
    const double h_i = detail::h_of(h, step.on_path);
    for (const auto& off : step.off_path) {
      const double r = r_value(step.g_on_path, off.g, h_i, detail::h_of(h, off.id), alpha, beta);
      if (is_violation(r, boundary)) ++count;
    }
  }
  return count;
}

// Pairwise logistic surrogate: sum of softplus(r) over the pair records.
inline LossValueGrad loss_rank_logistic(const RecordSet& batch, const StateMap<double>& h, double alpha, double beta) {
  if (batch.kind != LossKind::lstar && batch.kind != LossKind::lgbfs)
    throw RecordKindError("loss_rank_logistic needs pair records, got " + to_string(batch.kind));
  if (beta <= 0) throw SpecError("loss_rank_logistic: beta must be positive, otherwise h is unidentifiable");
  LossValueGrad out;
  for (const auto& p : batch.pairs) {
    const double r =
        r_value(p.g_on_path, p.g_rival, detail::h_of(h, p.on_path), detail::h_of(h, p.rival), alpha, beta);
    out.value += softplus(r);
    const double s = logistic(r);
    out.d_h[p.on_path] += beta * s;
    out.d_h[p.rival] -= beta * s;
  }
  return out;
}

// Squared regression to the cost-to-goal labels.
inline LossValueGrad loss_l2(const RecordSet& batch, const StateMap<double>& h) {
  if (batch.kind != LossKind::l2) throw RecordKindError("loss_l2 needs labeled-state records, got " + to_string(batch.kind));
  LossValueGrad out;
  for (const auto& rec : batch.labeled) {
    const double diff = detail::h_of(h, rec.state) - rec.target;
    out.value += diff * diff;
    out.d_h[rec.state] += 2.0 * diff;
  }
  return out;
}

// Logistic penalty on non-decreasing heuristic along the plan: each child
// should rank below its parent.
inline LossValueGrad loss_rt(const RecordSet& batch, const StateMap<double>& h) {
  if (batch.kind != LossKind::lrt)
    throw RecordKindError("loss_rt needs path-transition records, got " + to_string(batch.kind));
  LossValueGrad out;
  for (const auto& rec : batch.transitions) {
    const double r = detail::h_of(h, rec.child) - detail::h_of(h, rec.parent);
    out.value += softplus(r);
    const double s = logistic(r);
    out.d_h[rec.child] += s;
    out.d_h[rec.parent] -= s;
  }
  return out;
}

// Bellman-style hinge plus a two-sided band around the cost-to-goal:
//   max{1 + min_child h(s') - h(s), 0} + max{0, h*(s) - h(s)} + max{0, h(s) - 2 h*(s)}
// Subgradient 0 at every kink; the min over children resolves ties to the
// lowest StateId so gradients are reproducible. A terminal goal bundle (no
// children) keeps only the band terms.
inline LossValueGrad loss_be(const RecordSet& batch, const StateMap<double>& h) {
  if (batch.kind != LossKind::lbe)
    throw RecordKindError("loss_be needs parent-children records, got " + to_string(batch.kind));
  LossValueGrad out;
  for (const auto& rec : batch.bellman) {
    const double h_s = detail::h_of(h, rec.state);
    if (!rec.children.empty()) {
      StateId best = rec.children.front();
      double best_h = detail::h_of(h, best);
      for (const auto& child : rec.children) {
        const double hc = detail::h_of(h, child);
        if (hc < best_h || (hc == best_h && child < best)) {
          best = child;
          best_h = hc;
        }
      }
      const double bellman = 1.0 + best_h - h_s;
      if (bellman > 0) {
        out.value += bellman;
        out.d_h[best] += 1.0;
        out.d_h[rec.state] -= 1.0;
      }
    }
    const double below = rec.hstar - h_s;
    if (below > 0) {
      out.value += below;
      out.d_h[rec.state] -= 1.0;
    }
    const double above = h_s - 2.0 * rec.hstar;
    if (above > 0) {
      out.value += above;
      out.d_h[rec.state] += 1.0;
    }
  }
  return out;
}

// Dispatch on the record kind. alpha/beta only parameterize the rank losses.
inline LossValueGrad evaluate_loss(const RecordSet& batch, const StateMap<double>& h, double alpha, double beta) {
  switch (batch.kind) {
    case LossKind::lstar:
    case LossKind::lgbfs: return loss_rank_logistic(batch, h, alpha, beta);
    case LossKind::lrt: return loss_rt(batch, h);
    case LossKind::l2: return loss_l2(batch, h);
    case LossKind::lbe: return loss_be(batch, h);
  }
  throw Error("unreachable");
}

// Every state an h value must be supplied for before evaluating the batch.
inline std::vector<StateId> states_needing_h(const RecordSet& batch) {
  StateSet seen;
  std::vector<StateId> out;
  auto add = [&](StateId s) {
    if (seen.insert(s).second) out.push_back(s);
  };
  for (const auto& p : batch.pairs) {
    add(p.on_path);
    add(p.rival);
  }
  for (const auto& t : batch.transitions) {
    add(t.parent);
    add(t.child);
  }
  for (const auto& l : batch.labeled) add(l.state);
  for (const auto& b : batch.bellman) {
    add(b.state);
    for (const auto& c : b.children) add(c);
  }
  return out;
}

}  // namespace heurank
