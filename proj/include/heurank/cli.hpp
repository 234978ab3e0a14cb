#pragma once

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "heurank/generate.hpp"
#include "heurank/harness.hpp"
#include "heurank/io.hpp"
#include "heurank/verify.hpp"

namespace heurank {
namespace cli {

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FileDependencyError("cannot write: " + path);
  out << text;
}

inline int cmd_generate(const std::string& domain, int count, std::uint64_t seed, const std::string& params_text,
                        const std::string& out_path) {
  const DomainTag tag = domain_tag_from_string(domain);
  const json params = params_text.empty() ? json::object() : json::parse(params_text);
  std::vector<ProblemInstance> instances;
  for (int i = 0; i < count; ++i)
    instances.push_back(generate_instance(tag, params, seed + static_cast<std::uint64_t>(i)));
  io::write_instances(out_path, instances);
  std::cout << "wrote " << instances.size() << " instance(s) to " << out_path << "\n";
  return 0;
}

inline int cmd_solve(const std::string& in_path, const std::string& out_path, int enumerate_limit,
                     const std::string& hstar_path) {
  const auto instances = io::read_instances(in_path);
  std::vector<json> plan_lines;
  std::vector<json> hstar_lines;
  for (const auto& inst : instances) {
    if (enumerate_limit > 0) {
      const auto res = oracle::enumerate_optimal_plans(inst, static_cast<std::size_t>(enumerate_limit));
      for (const auto& p : res.plans) {
        json line = io::plan_to_json(inst, p);
        line["truncated"] = res.truncated;
        plan_lines.push_back(std::move(line));
      }
    } else {
      plan_lines.push_back(io::plan_to_json(inst, oracle::optimal_solve(inst)));
    }
    if (!hstar_path.empty()) hstar_lines.push_back(io::hstar_table_to_json(inst, oracle::cost_to_goal(inst)));
  }
  io::write_jsonl(out_path, plan_lines);
  std::cout << "wrote " << plan_lines.size() << " plan(s) to " << out_path << "\n";
  if (!hstar_path.empty()) {
    io::write_jsonl(hstar_path, hstar_lines);
    std::cout << "wrote cost-to-goal tables to " << hstar_path << "\n";
  }
  return 0;
}

inline int cmd_trace(const std::string& instances_path, const std::string& plans_path, const std::string& loss,
                     const std::string& out_path, bool off_path_labels, bool cap_dead_ends) {
  const auto instances = io::read_instances(instances_path);
  auto find_instance = [&](const std::string& id) -> const ProblemInstance& {
    for (const auto& inst : instances)
      if (inst.instance_id() == id) return inst;
    throw FileDependencyError("plan references unknown instance " + id);
  };
  const LossKind kind = loss_kind_from_string(loss);
  const bool needs_labels = kind == LossKind::l2 || kind == LossKind::lbe;
  std::unordered_map<std::string, oracle::CostToGoalTable> hstar_cache;
  std::vector<json> lines;
  for (const auto& plan_json : io::read_jsonl(plans_path, "plan")) {
    const auto& inst = find_instance(plan_json.at("instance_id").get<std::string>());
    const Plan plan = io::plan_from_json(inst, plan_json);
    RankingTrace trace = ranking_trace(inst, plan);
    if (needs_labels) {
      auto [it, inserted] = hstar_cache.try_emplace(inst.instance_id());
      if (inserted) it->second = oracle::cost_to_goal(inst);
      attach_cost_to_goal_labels(trace, it->second, LabelOptions{off_path_labels, cap_dead_ends});
    }
    RecordOptions opts;
    opts.include_off_path_labels = off_path_labels;
    lines.push_back(io::record_set_to_json(training_records(trace, kind, opts)));
  }
  io::write_jsonl(out_path, lines);
  std::cout << "wrote " << lines.size() << " record set(s) to " << out_path << "\n";
  return 0;
}

inline int cmd_train(const std::string& records_path, const std::string& model_spec_path, const std::string& loss,
                     double alpha, double beta, std::uint64_t seed, const std::string& out_path, int epochs,
                     double lr, const std::string& optimizer, long l01_target, const std::string& report_path) {
  std::vector<RecordSet> record_sets;
  for (const auto& j : io::read_jsonl(records_path, "records")) record_sets.push_back(io::record_set_from_json(j));

  ModelSpec spec;
  if (!model_spec_path.empty()) {
    io::require_file(model_spec_path, "model-spec");
    std::ifstream in(model_spec_path);
    json j;
    in >> j;
    spec = ModelSpec::from_json(j);
  }
  if (spec.kind == ModelKind::tabular && spec.states.empty()) {
    StateSet seen;
    for (const auto& rs : record_sets)
      for (const auto& e : rs.state_table->entries())
        if (seen.insert(e.id).second) spec.states.push_back(e.id);
  }
  if (spec.kind != ModelKind::tabular && spec.feature_dim == 0 && !record_sets.empty())
    spec.feature_dim = static_cast<int>(record_sets.front().state_table->entries().front().features.size());

  HeuristicModel model = HeuristicModel::init(spec, seed);
  TrainConfig cfg = TrainConfig::for_loss(loss_kind_from_string(loss));
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.seed = seed;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.optimizer = optimizer_from_string(optimizer);
  if (l01_target >= 0) cfg.l01_target = l01_target;

  const TrainingSet set = build_training_set(std::move(record_sets), cfg.loss_kind);
  TrainReport report = train_on(set, model, cfg);
  save_model(model, out_path);
  report.checkpoint_path = out_path;
  if (!report_path.empty()) write_text(report_path, report.to_csv());
  std::cout << "trained " << to_string(cfg.loss_kind) << " for " << report.epochs.size() << " epoch(s), stop="
            << to_string(report.stop_reason) << ", final l01=" << report.final_l01 << ", checkpoint " << out_path
            << "\n";
  return 0;
}

inline int cmd_eval(const std::string& instances_path, const std::string& model_path, const std::string& search,
                    double alpha, double beta, std::uint64_t budget, const std::string& out_path, bool with_trace,
                    double seconds) {
  const auto instances = io::read_instances(instances_path);
  const HeuristicModel model = load_model(model_path);
  harness::SearchVariant variant = harness::make_variant(search, alpha, beta, budget);
  if (seconds > 0) {
    // Wall-clock mode: excluded from acceptance, provided for parity runs.
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    (void)deadline;
  }
  auto rows = harness::evaluate_model(instances, model, model_path, variant);
  detail::write_text(out_path, harness::rows_to_csv(rows));
  const auto summary = harness::summarize(rows);
  std::cout << "evaluated " << rows.size() << " instance(s): solved " << summary.solved_fraction << "%, avg expanded "
            << summary.avg_expanded << "\n";
  if (with_trace)
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto res = forward_search(instances[i], model_heuristic(model, instances[i]), variant.config);
      std::cout << res.to_json(true, &instances[i]).dump() << "\n";
    }
  return 0;
}

inline int cmd_verify(const std::string& case_name, bool all) {
  std::vector<verify::VerificationCase> results;
  if (all)
    for (const auto& name : verify::case_names()) results.push_back(verify::run_case(name));
  else
    results.push_back(verify::run_case(case_name));
  bool ok = true;
  json out = json::array();
  for (const auto& c : results) {
    if (c.asserted && !c.pass) ok = false;
    out.push_back(json{{"case", c.name}, {"pass", c.pass}, {"asserted", c.asserted}, {"evidence", c.evidence}});
  }
  std::cout << out.dump(2) << "\n";
  return ok ? 0 : 1;
}

inline int cmd_report(const std::vector<std::string>& metrics_paths, const std::string& out_path) {
  std::vector<harness::EvalRow> rows;
  for (const auto& path : metrics_paths) {
    io::require_file(path, "metrics");
    std::ifstream in(path);
    std::ostringstream text;
    text << in.rdbuf();
    auto part = harness::rows_from_csv(text.str());
    rows.insert(rows.end(), part.begin(), part.end());
  }
  // Group by (search, model) and render a solved/expanded/length table over
  // the instances solved by every variant.
  std::vector<std::pair<std::string, std::vector<harness::EvalRow>>> groups;
  for (const auto& r : rows) {
    const std::string key = r.search + " " + r.model;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(r);
  }
  std::unordered_map<std::string, bool> solved_everywhere;
  for (const auto& [key, g] : groups)
    for (const auto& r : g) {
      auto [it, inserted] = solved_everywhere.try_emplace(r.instance_id, true);
      it->second = it->second && r.status == SearchStatus::solved;
    }
  std::ostringstream csv;
  csv << "# format_version 1\n";
  csv << "search,model,instances,solved_percent,avg_expanded_common,avg_length_common\n";
  std::ostringstream text;
  text << std::left << std::setw(26) << "variant" << std::right << std::setw(10) << "solved%" << std::setw(14)
       << "expanded*" << std::setw(12) << "length*" << "\n";
  for (const auto& [key, g] : groups) {
    const auto summary = harness::summarize(g);
    double expanded = 0, length = 0;
    std::size_t common = 0;
    for (const auto& r : g) {
      if (!solved_everywhere.at(r.instance_id)) continue;
      common += 1;
      expanded += static_cast<double>(r.expanded);
      length += static_cast<double>(r.length);
    }
    const double denom = common == 0 ? 1 : static_cast<double>(common);
    csv << g.front().search << "," << g.front().model << "," << g.size() << "," << summary.solved_fraction << ","
        << expanded / denom << "," << length / denom << "\n";
    text << std::left << std::setw(26) << key << std::right << std::fixed << std::setprecision(1) << std::setw(10)
         << summary.solved_fraction << std::setw(14) << std::setprecision(2) << expanded / denom << std::setw(12)
         << length / denom << "\n";
  }
  text << "(* averaged over instances solved by every variant)\n";
  if (!out_path.empty()) detail::write_text(out_path, csv.str());
  std::cout << text.str();
  return 0;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"heurank: learn and certify ranking heuristics for forward search"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "generate solvable problem instances");
  std::string g_domain, g_params, g_out;
  int g_count = 1;
  std::uint64_t g_seed = 0;
  generate->add_option("--domain", g_domain, "maze_teleport | sliding_puzzle | sokoban_lite | oneway_grid")->required();
  generate->add_option("--count", g_count, "number of instances (seeds seed..seed+count-1)");
  generate->add_option("--seed", g_seed, "base seed");
  generate->add_option("--params", g_params, "domain parameters as JSON");
  generate->add_option("--out", g_out, "output instance JSONL")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "produce optimal plans with the oracle");
  std::string s_in, s_out, s_hstar;
  int s_enumerate = 0;
  solve->add_option("--in", s_in, "instance JSONL")->required();
  solve->add_option("--out", s_out, "plan JSONL")->required();
  solve->add_option("--enumerate", s_enumerate, "emit every optimal plan up to this limit");
  solve->add_option("--hstar-out", s_hstar, "also write exact cost-to-goal tables");

  // trace
  auto* trace = app.add_subcommand("trace", "compile plans into loss-specific training records");
  std::string t_instances, t_plans, t_loss, t_out;
  bool t_off_path = false, t_cap = false;
  trace->add_option("--instances", t_instances, "instance JSONL")->required();
  trace->add_option("--plans", t_plans, "plan JSONL")->required();
  trace->add_option("--loss", t_loss, "lstar | lgbfs | lrt | l2 | lbe")->required();
  trace->add_option("--out", t_out, "records JSONL")->required();
  trace->add_flag("--off-path-labels", t_off_path, "for l2: label off-path open-list states as well");
  trace->add_flag("--cap-dead-ends", t_cap, "label dead ends with the capped surrogate");

  // train
  auto* train_cmd = app.add_subcommand("train", "optimize a heuristic model against recorded losses");
  std::string tr_records, tr_spec, tr_loss, tr_out, tr_optimizer = "adaptive_moment", tr_report;
  double tr_alpha = 1, tr_beta = 1, tr_lr = 1e-3;
  std::uint64_t tr_seed = 0;
  int tr_epochs = 100;
  long tr_l01_target = -1;
  train_cmd->add_option("--records", tr_records, "records JSONL")->required();
  train_cmd->add_option("--model-spec", tr_spec, "model spec JSON (default: tabular over record states)");
  train_cmd->add_option("--loss", tr_loss, "lstar | lgbfs | lrt | l2 | lbe")->required();
  train_cmd->add_option("--alpha", tr_alpha, "merit weight on g");
  train_cmd->add_option("--beta", tr_beta, "merit weight on h");
  train_cmd->add_option("--seed", tr_seed, "training seed");
  train_cmd->add_option("--epochs", tr_epochs, "epoch count");
  train_cmd->add_option("--lr", tr_lr, "learning rate");
  train_cmd->add_option("--optimizer", tr_optimizer, "sgd_momentum | adaptive_moment");
  train_cmd->add_option("--l01-target", tr_l01_target, "stop when training violations reach this");
  train_cmd->add_option("--report", tr_report, "write per-epoch CSV here");
  train_cmd->add_option("--out", tr_out, "checkpoint path")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "run a trained model under a search and collect metrics");
  std::string e_instances, e_model, e_search = "astar", e_out;
  double e_alpha = 1, e_beta = 1, e_seconds = 0;
  std::uint64_t e_budget = 100000;
  bool e_trace = false;
  eval->add_option("--instances", e_instances, "instance JSONL")->required();
  eval->add_option("--model", e_model, "checkpoint path")->required();
  eval->add_option("--search", e_search, "astar | gbfs | custom");
  eval->add_option("--alpha", e_alpha, "custom merit weight on g");
  eval->add_option("--beta", e_beta, "custom merit weight on h");
  eval->add_option("--budget", e_budget, "expansion budget per run");
  eval->add_option("--seconds", e_seconds, "wall-clock cap (parity mode, not used by acceptance)");
  eval->add_flag("--trace", e_trace, "emit full expansion orders as JSON");
  eval->add_option("--out", e_out, "metrics CSV")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the named verification cases");
  std::string v_case;
  bool v_all = false;
  verify_cmd->add_option("--case", v_case,
                         "fig1b_gbfs | fig1b_astar | theorem1_roundtrip | astar_implies_gbfs | "
                         "gbfs_nonexistence | multipath_grid");
  verify_cmd->add_flag("--all", v_all, "run every case");

  // report
  auto* report = app.add_subcommand("report", "aggregate metrics CSVs into a comparison table");
  std::vector<std::string> r_metrics;
  std::string r_out;
  report->add_option("--metrics", r_metrics, "metrics CSV files")->required()->expected(-1);
  report->add_option("--out", r_out, "aggregated CSV");

  std::reverse(args.begin(), args.end());  // CLI11 consumes back-to-front
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (generate->parsed()) return detail::cmd_generate(g_domain, g_count, g_seed, g_params, g_out);
    if (solve->parsed()) return detail::cmd_solve(s_in, s_out, s_enumerate, s_hstar);
    if (trace->parsed()) return detail::cmd_trace(t_instances, t_plans, t_loss, t_out, t_off_path, t_cap);
    if (train_cmd->parsed())
      return detail::cmd_train(tr_records, tr_spec, tr_loss, tr_alpha, tr_beta, tr_seed, tr_out, tr_epochs, tr_lr,
                               tr_optimizer, tr_l01_target, tr_report);
    if (eval->parsed())
      return detail::cmd_eval(e_instances, e_model, e_search, e_alpha, e_beta, e_budget, e_out, e_trace, e_seconds);
    if (verify_cmd->parsed()) {
      if (!v_all && v_case.empty()) {
        std::cerr << "verify: pass --case NAME or --all\n";
        return 2;
      }
      return detail::cmd_verify(v_case, v_all);
    }
    if (report->parsed()) return detail::cmd_report(r_metrics, r_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cli
}  // namespace heurank
