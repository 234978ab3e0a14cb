#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "heurank/losses.hpp"
#include "heurank/models.hpp"
#include "heurank/trace.hpp"

namespace heurank {

enum class OptimizerKind { sgd_momentum, adaptive_moment };

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd_momentum") return OptimizerKind::sgd_momentum;
  if (s == "adaptive_moment") return OptimizerKind::adaptive_moment;
  throw FormatError("unknown optimizer: " + s);
}

struct OptimizerState {
  std::vector<double> m;  // momentum / first moment
  std::vector<double> v;  // second moment
  std::uint64_t t = 0;
};

struct StepConfig {
  OptimizerKind optimizer = OptimizerKind::adaptive_moment;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline void opt_step(OptimizerState& state, std::span<double> params, std::span<const double> grads,
                     const StepConfig& cfg) {
  if (params.size() != grads.size()) throw SpecError("opt_step: parameter/gradient shape mismatch");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.m.size() != params.size()) throw SpecError("opt_step: optimizer state shape mismatch");
  switch (cfg.optimizer) {
    case OptimizerKind::sgd_momentum: {
      for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.momentum * state.m[i] - cfg.learning_rate * grads[i];
        params[i] += state.m[i];
      }
      return;
    }
    case OptimizerKind::adaptive_moment: {
      if (state.v.empty()) state.v.assign(params.size(), 0.0);
      state.t += 1;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
      for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
      }
      return;
    }
  }
}

struct EarlyStop {
  int patience = 10;  // epochs without validation improvement
};

struct TrainConfig {
  LossKind loss_kind = LossKind::lstar;
  double alpha = 1.0;
  double beta = 1.0;
  OptimizerKind optimizer = OptimizerKind::adaptive_moment;
  double learning_rate = 1e-3;
  int epochs = 100;
  std::uint64_t seed = 0;
  std::optional<long> l01_target;          // stop once training violations reach this
  std::optional<EarlyStop> early_stop;     // on validation violations
  RecordOptions record_options;

  static TrainConfig for_loss(LossKind kind) {
    TrainConfig cfg;
    cfg.loss_kind = kind;
    if (kind == LossKind::lgbfs) {
      cfg.alpha = 0.0;
      cfg.beta = 1.0;
    }
    return cfg;
  }
};

struct EpochStats {
  int epoch = 0;
  double surrogate = 0;  // training loss summed over minibatches (pre-step values)
  long l01 = -1;         // ranking violations over the training pair records
  double seconds = 0;
};

enum class StopReason { completed, l01_target_reached, early_stopped, no_data };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::l01_target_reached: return "l01_target_reached";
    case StopReason::early_stopped: return "early_stopped";
    case StopReason::no_data: return "no_data";
  }
  throw Error("unknown stop reason");
}

struct TrainReport {
  std::vector<EpochStats> epochs;
  StopReason stop_reason = StopReason::completed;
  long final_l01 = -1;
  std::string checkpoint_path;

  std::string to_csv() const {
    std::string out = "# format_version 1\nepoch,surrogate,l01,seconds\n";
    for (const auto& e : epochs)
      out += std::to_string(e.epoch) + "," + std::to_string(e.surrogate) + "," + std::to_string(e.l01) + "," +
             std::to_string(e.seconds) + "\n";
    return out;
  }
};

struct DivergenceError : Error {
  DivergenceError(const std::string& what, std::vector<double> checkpoint)
      : Error(what), last_good_params(std::move(checkpoint)) {}
  std::vector<double> last_good_params;
};

// Tabular key set covering every state the traces mention.
inline ModelSpec tabular_spec_for(const std::vector<RankingTrace>& traces) {
  ModelSpec spec;
  spec.kind = ModelKind::tabular;
  StateSet seen;
  for (const auto& t : traces)
    for (const auto& e : t.state_table->entries())
      if (seen.insert(e.id).second) spec.states.push_back(e.id);
  return spec;
}

// Heuristic evaluator view of a model over one instance. The model and
// instance must outlive the returned function.
inline HeuristicFn model_heuristic(const HeuristicModel& model, const ProblemInstance& inst) {
  return [&model, &inst](StateId s) { return model.evaluate(inst, s); };
}

namespace detail {

struct Minibatch {
  std::string instance_id;
  std::vector<RecordSet> records;        // the loss being optimized
  std::vector<const RecordSet*> pairs;   // pair view for violation reporting
  // states whose h the loss consumes, each with the table holding its
  // features (multi-plan batches carry one table per trace)
  std::vector<std::pair<StateId, const StateTable*>> needed;
};

inline void fill_needed(Minibatch& b) {
  StateSet seen;
  for (const auto& rs : b.records)
    for (StateId s : states_needing_h(rs))
      if (seen.insert(s).second) b.needed.emplace_back(s, rs.state_table.get());
}

}  // namespace detail

// One minibatch per problem instance; a multi-plan instance contributes all
// of its record sets to the same batch.
struct TrainingSet {
  std::vector<detail::Minibatch> batches;
  std::vector<RecordSet> pair_storage;  // pair views for non-ranking losses
};

inline TrainingSet build_training_set(const std::vector<RankingTrace>& traces, LossKind kind,
                                      const RecordOptions& opts = {}) {
  TrainingSet set;
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::vector<const RankingTrace*>> grouped;
  for (const auto& t : traces) {
    auto [it, inserted] = by_id.emplace(t.instance_id, grouped.size());
    if (inserted) grouped.emplace_back();
    grouped[it->second].push_back(&t);
  }
  const bool ranking = kind == LossKind::lstar || kind == LossKind::lgbfs;
  set.pair_storage.reserve(ranking ? 0 : traces.size());
  for (const auto& group : grouped) {
    detail::Minibatch b;
    b.instance_id = group.front()->instance_id;
    b.records.reserve(group.size());
    for (const RankingTrace* t : group) {
      b.records.push_back(training_records(*t, kind, opts));
      if (!ranking) set.pair_storage.push_back(training_records(*t, LossKind::lstar));
    }
    if (ranking)
      for (const auto& rs : b.records) b.pairs.push_back(&rs);
    detail::fill_needed(b);
    set.batches.push_back(std::move(b));
  }
  if (!ranking) {
    // pair_storage is fully built now; bind the per-batch views.
    std::size_t k = 0;
    for (auto& b : set.batches)
      for (std::size_t i = 0; i < b.records.size(); ++i) b.pairs.push_back(&set.pair_storage[k++]);
  }
  return set;
}

// From deserialized record files. Non-ranking records carry no pair view, so
// the reported l01 stays -1 for them.
inline TrainingSet build_training_set(std::vector<RecordSet> record_sets, LossKind kind) {
  TrainingSet set;
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::vector<RecordSet>> grouped;
  for (auto& rs : record_sets) {
    if (rs.kind != kind)
      throw RecordKindError("records file holds " + to_string(rs.kind) + " records, expected " + to_string(kind));
    auto [it, inserted] = by_id.emplace(rs.instance_id, grouped.size());
    if (inserted) grouped.emplace_back();
    grouped[it->second].push_back(std::move(rs));
  }
  const bool ranking = kind == LossKind::lstar || kind == LossKind::lgbfs;
  for (auto& group : grouped) {
    detail::Minibatch b;
    b.instance_id = group.front().instance_id;
    b.records = std::move(group);
    if (ranking)
      for (const auto& rs : b.records) b.pairs.push_back(&rs);
    detail::fill_needed(b);
    set.batches.push_back(std::move(b));
  }
  return set;
}

// Minibatch training following the one-instance-per-minibatch protocol: each
// gradient step consumes every record of exactly one problem instance.
// Reported l01 counts ranking violations over the full training pair records
// at the configured (alpha, beta); zero means the learned heuristic reproduces
// every pop of every training trace.
inline TrainReport train_on(const TrainingSet& set, HeuristicModel& model, const TrainConfig& cfg,
                            const TrainingSet* validation = nullptr) {
  TrainReport report;
  const auto& batches = set.batches;
  if (batches.empty()) {
    report.stop_reason = StopReason::no_data;
    return report;
  }
  if (cfg.learning_rate <= 0) throw SpecError("train: learning_rate must be positive");
  if (cfg.epochs < 1) throw SpecError("train: epochs must be >= 1");

  const bool has_pairs = !batches.front().pairs.empty();
  auto violations_over = [&](const TrainingSet& s) {
    long total = 0;
    for (const auto& b : s.batches) {
      for (const RecordSet* rs : b.pairs) {
        StateMap<double> h;
        for (StateId state : states_needing_h(*rs)) h.emplace(state, model.evaluate(state, rs->state_table->at(state).features));
        total += pair_violations(rs->pairs, h, cfg.alpha, cfg.beta);
      }
    }
    return total;
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(batches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  OptimizerState opt;
  StepConfig step_cfg;
  step_cfg.optimizer = cfg.optimizer;
  step_cfg.learning_rate = cfg.learning_rate;
  std::vector<double> grad(model.param_count(), 0.0);
  std::vector<double> last_good(model.params().begin(), model.params().end());

  long best_validation = std::numeric_limits<long>::max();
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_indices(rng, order);
    double surrogate = 0;
    for (std::size_t bi : order) {
      const auto& batch = batches[bi];
      StateMap<double> h;
      h.reserve(batch.needed.size());
      for (const auto& [s, table] : batch.needed) h.emplace(s, model.evaluate(s, table->at(s).features));
      LossValueGrad total;
      for (const auto& rs : batch.records) {
        LossValueGrad part = evaluate_loss(rs, h, cfg.alpha, cfg.beta);
        total.value += part.value;
        for (const auto& [s, d] : part.d_h) total.d_h[s] += d;
      }
      surrogate += total.value;
      if (!std::isfinite(total.value))
        throw DivergenceError("training loss diverged on instance " + batch.instance_id, last_good);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (const auto& [s, table] : batch.needed) {
        auto it = total.d_h.find(s);
        if (it == total.d_h.end() || it->second == 0.0) continue;
        model.backprop(s, table->at(s).features, it->second, grad);
      }
      opt_step(opt, model.params_mutable(), grad, step_cfg);
      for (double p : model.params())
        if (!std::isfinite(p)) throw DivergenceError("parameters diverged on instance " + batch.instance_id, last_good);
      last_good.assign(model.params().begin(), model.params().end());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.surrogate = surrogate;
    stats.l01 = has_pairs ? violations_over(set) : -1;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(stats);
    report.final_l01 = stats.l01;

    if (cfg.l01_target && has_pairs && stats.l01 <= *cfg.l01_target) {
      report.stop_reason = StopReason::l01_target_reached;
      return report;
    }
    if (cfg.early_stop && validation) {
      const long val = violations_over(*validation);
      if (val < best_validation) {
        best_validation = val;
        stale_epochs = 0;
      } else if (++stale_epochs >= cfg.early_stop->patience) {
        report.stop_reason = StopReason::early_stopped;
        return report;
      }
    }
  }
  report.stop_reason = StopReason::completed;
  return report;
}

// Trace-level entry point used by the library callers.
inline TrainReport train(const std::vector<RankingTrace>& traces, HeuristicModel& model, const TrainConfig& cfg,
                         const std::vector<RankingTrace>* validation = nullptr) {
  const TrainingSet set = build_training_set(traces, cfg.loss_kind, cfg.record_options);
  std::optional<TrainingSet> val_set;
  if (validation) val_set = build_training_set(*validation, LossKind::lstar);
  return train_on(set, model, cfg, val_set ? &*val_set : nullptr);
}

}  // namespace heurank
