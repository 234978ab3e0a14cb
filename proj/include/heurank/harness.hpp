#pragma once

#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "heurank/io.hpp"
#include "heurank/optim.hpp"
#include "heurank/search.hpp"

namespace heurank {
namespace harness {

inline int worker_count() {
  if (const char* env = std::getenv("HEURANK_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Runs fn(i) for i in [0, n) on a small pool. Results must be written into
// pre-sized slots so parallel and serial runs aggregate identically.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalRow {
  std::string instance_id;
  std::string search;  // astar | gbfs | custom
  double alpha = 1, beta = 1;
  std::string model;
  SearchStatus status = SearchStatus::exhausted_open;
  double cost = 0;
  std::uint64_t length = 0;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t reopened = 0;
};

struct EvalSummary {
  std::size_t instances = 0;
  std::size_t solved = 0;
  double solved_fraction = 0;   // percent
  double avg_expanded = 0;      // over solved instances
  double avg_cost = 0;          // over solved instances
  double avg_length = 0;        // over solved instances
};

inline EvalSummary summarize(const std::vector<EvalRow>& rows) {
  EvalSummary s;
  s.instances = rows.size();
  for (const auto& r : rows) {
    if (r.status != SearchStatus::solved) continue;
    s.solved += 1;
    s.avg_expanded += static_cast<double>(r.expanded);
    s.avg_cost += r.cost;
    s.avg_length += static_cast<double>(r.length);
  }
  if (s.solved > 0) {
    s.avg_expanded /= static_cast<double>(s.solved);
    s.avg_cost /= static_cast<double>(s.solved);
    s.avg_length /= static_cast<double>(s.solved);
  }
  s.solved_fraction = s.instances == 0 ? 0 : 100.0 * static_cast<double>(s.solved) / static_cast<double>(s.instances);
  return s;
}

struct SearchVariant {
  std::string name;  // astar | gbfs | custom
  SearchConfig config;
};

inline SearchVariant make_variant(const std::string& name, double alpha, double beta, std::uint64_t budget) {
  SearchVariant v;
  if (name == "astar") {
    v.config = SearchConfig::astar();
  } else if (name == "gbfs") {
    v.config = SearchConfig::gbfs();
  } else if (name == "custom") {
    v.config = SearchConfig::astar();
    v.config.alpha = alpha;
    v.config.beta = beta;
  } else {
    throw FormatError("unknown search variant: " + name + " (expected astar | gbfs | custom)");
  }
  v.name = name;
  v.config.expansion_budget = budget;
  return v;
}

inline std::vector<EvalRow> evaluate_model(const std::vector<ProblemInstance>& instances, const HeuristicModel& model,
                                           const std::string& model_name, const SearchVariant& variant) {
  std::vector<EvalRow> rows(instances.size());
  parallel_for(instances.size(), [&](std::size_t i) {
    const auto& inst = instances[i];
    const SearchResult res = forward_search(inst, model_heuristic(model, inst), variant.config);
    EvalRow row;
    row.instance_id = inst.instance_id();
    row.search = variant.name;
    row.alpha = variant.config.alpha;
    row.beta = variant.config.beta;
    row.model = model_name;
    row.status = res.status;
    if (res.plan) {
      row.cost = res.plan->total_cost;
      row.length = res.plan->length();
    }
    row.expanded = res.expanded_count;
    row.generated = res.generated_count;
    row.reopened = res.reopened_count;
    rows[i] = std::move(row);
  });
  return rows;
}

inline std::string rows_to_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "# format_version 1\n";
  out << "instance_id,search,alpha,beta,model,status,cost,length,expanded,generated,reopened\n";
  for (const auto& r : rows)
    out << r.instance_id << "," << r.search << "," << r.alpha << "," << r.beta << "," << r.model << ","
        << to_string(r.status) << "," << r.cost << "," << r.length << "," << r.expanded << "," << r.generated << ","
        << r.reopened << "\n";
  return out.str();
}

inline std::vector<EvalRow> rows_from_csv(const std::string& text) {
  std::vector<EvalRow> rows;
  std::istringstream in(text);
  std::string line;
  bool version_checked = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#", 0) == 0) {
      if (line.find("format_version 1") == std::string::npos) throw FormatError("metrics csv: unsupported format_version");
      version_checked = true;
      continue;
    }
    if (line.rfind("instance_id,", 0) == 0) continue;
    if (!version_checked) throw FormatError("metrics csv: missing format_version header");
    std::istringstream ls(line);
    std::string field;
    EvalRow r;
    auto next = [&] {
      if (!std::getline(ls, field, ',')) throw FormatError("metrics csv: short row");
      return field;
    };
    r.instance_id = next();
    r.search = next();
    r.alpha = std::stod(next());
    r.beta = std::stod(next());
    r.model = next();
    const std::string status = next();
    r.status = status == "solved"            ? SearchStatus::solved
               : status == "budget_exhausted" ? SearchStatus::budget_exhausted
                                               : SearchStatus::exhausted_open;
    r.cost = std::stod(next());
    r.length = std::stoull(next());
    r.expanded = std::stoull(next());
    r.generated = std::stoull(next());
    r.reopened = std::stoull(next());
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Loss comparison (solved fractions plus expanded/length companions)
// ---------------------------------------------------------------------------

struct VariantResult {
  std::string search;
  LossKind loss;
  std::vector<EvalRow> rows;
  EvalSummary summary;
  long train_l01 = -1;
};

struct Comparison {
  std::vector<VariantResult> variants;
  // common-solved aggregates, keyed like the variants
  std::vector<double> avg_expanded_common;
  std::vector<double> avg_length_common;
  std::size_t common_solved = 0;
};

// The set of instances solved by every variant; expanded/length averages are
// comparable only there.
inline void fill_common_solved(Comparison& cmp) {
  if (cmp.variants.empty()) return;
  const std::size_t n = cmp.variants.front().rows.size();
  std::vector<bool> common(n, true);
  for (const auto& v : cmp.variants)
    for (std::size_t i = 0; i < n; ++i)
      if (v.rows[i].status != SearchStatus::solved) common[i] = false;
  cmp.common_solved = static_cast<std::size_t>(std::count(common.begin(), common.end(), true));
  for (const auto& v : cmp.variants) {
    double expanded = 0, length = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!common[i]) continue;
      expanded += static_cast<double>(v.rows[i].expanded);
      length += static_cast<double>(v.rows[i].length);
    }
    const double denom = cmp.common_solved == 0 ? 1 : static_cast<double>(cmp.common_solved);
    cmp.avg_expanded_common.push_back(expanded / denom);
    cmp.avg_length_common.push_back(length / denom);
  }
}

struct CompareConfig {
  std::vector<LossKind> losses{LossKind::lstar, LossKind::lgbfs, LossKind::l2};
  std::vector<std::string> searches{"astar", "gbfs"};
  std::uint64_t budget = 100000;
  ModelSpec model_spec;           // shared across losses; seeds identical
  std::uint64_t model_seed = 0;
  TrainConfig train_template;     // loss_kind/alpha/beta overridden per loss
};

// Trains one model per loss on the training traces (identical model spec and
// seed; only the loss differs) and evaluates every (search x loss) cell on
// the test instances.
inline Comparison compare_losses(const std::vector<RankingTrace>& train_traces,
                                 const std::vector<ProblemInstance>& test_instances, const CompareConfig& cfg) {
  Comparison cmp;
  std::vector<std::pair<LossKind, HeuristicModel>> models;
  std::vector<long> train_l01;
  for (LossKind loss : cfg.losses) {
    HeuristicModel model = HeuristicModel::init(cfg.model_spec, cfg.model_seed);
    TrainConfig tc = cfg.train_template;
    tc.loss_kind = loss;
    if (loss == LossKind::lgbfs) {
      tc.alpha = 0;
      tc.beta = 1;
    }
    const TrainReport report = train(train_traces, model, tc);
    train_l01.push_back(report.final_l01);
    models.emplace_back(loss, std::move(model));
  }
  for (const auto& search : cfg.searches) {
    const SearchVariant variant = make_variant(search, 1, 1, cfg.budget);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      VariantResult vr;
      vr.search = search;
      vr.loss = models[mi].first;
      vr.rows = evaluate_model(test_instances, models[mi].second, to_string(vr.loss), variant);
      vr.summary = summarize(vr.rows);
      vr.train_l01 = train_l01[mi];
      cmp.variants.push_back(std::move(vr));
    }
  }
  fill_common_solved(cmp);
  return cmp;
}

inline std::string comparison_to_csv(const Comparison& cmp) {
  std::ostringstream out;
  out << "# format_version 1\n";
  out << "search,loss,solved_percent,avg_expanded_common,avg_length_common,train_l01\n";
  for (std::size_t i = 0; i < cmp.variants.size(); ++i) {
    const auto& v = cmp.variants[i];
    out << v.search << "," << to_string(v.loss) << "," << v.summary.solved_fraction << ","
        << cmp.avg_expanded_common[i] << "," << cmp.avg_length_common[i] << "," << v.train_l01 << "\n";
  }
  return out.str();
}

inline std::string comparison_to_text(const Comparison& cmp) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "search" << std::setw(8) << "loss" << std::right << std::setw(10) << "solved%"
      << std::setw(14) << "expanded*" << std::setw(12) << "length*"
      << "\n";
  for (std::size_t i = 0; i < cmp.variants.size(); ++i) {
    const auto& v = cmp.variants[i];
    out << std::left << std::setw(8) << v.search << std::setw(8) << to_string(v.loss) << std::right << std::fixed
        << std::setprecision(1) << std::setw(10) << v.summary.solved_fraction << std::setw(14) << std::setprecision(2)
        << cmp.avg_expanded_common[i] << std::setw(12) << cmp.avg_length_common[i] << "\n";
  }
  out << "(* averaged over the " << cmp.common_solved << " instances solved by every variant)\n";
  return out.str();
}

// Seeded 50/25/25 split into train/validation/test index sets.
struct Split {
  std::vector<std::size_t> train, validation, test;
};

inline Split split_instances(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_indices(rng, idx);
  Split s;
  const std::size_t n_train = n / 2;
  const std::size_t n_val = n / 4;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                      idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  return s;
}

}  // namespace harness
}  // namespace heurank
