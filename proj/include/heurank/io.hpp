#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heurank/domains.hpp"
#include "heurank/trace.hpp"

namespace heurank {
namespace io {

constexpr int kFormatVersion = 1;

inline void require_file(const std::string& path, const std::string& role) {
  if (!std::filesystem::exists(path))
    throw FileDependencyError("missing " + role + " file: " + path + " (run the upstream stage first)");
}

inline std::vector<json> read_jsonl(const std::string& path, const std::string& role) {
  require_file(path, role);
  std::ifstream in(path);
  std::vector<json> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.value("format_version", 0) != kFormatVersion)
      throw FormatError(role + " file " + path + ": unsupported format_version");
    lines.push_back(std::move(j));
  }
  return lines;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& lines) {
  std::ofstream out(path);
  if (!out) throw FileDependencyError("cannot write: " + path);
  for (json j : lines) {
    j["format_version"] = kFormatVersion;
    out << j.dump() << "\n";
  }
}

// --- plans -------------------------------------------------------------------

inline json plan_to_json(const ProblemInstance& inst, const Plan& plan) {
  json states = json::array();
  for (const auto& s : plan.states()) states.push_back(inst.state_to_json(s));
  json costs = json::array();
  for (const auto& e : plan.edges) costs.push_back(e.cost);
  return json{{"instance_id", inst.instance_id()}, {"cost", plan.total_cost},
              {"length", plan.length()}, {"states", states}, {"costs", costs}};
}

inline Plan plan_from_json(const ProblemInstance& inst, const json& j) {
  const auto& states = j.at("states");
  const auto& costs = j.at("costs");
  if (states.size() != costs.size() + 1) throw FormatError("plan: states/costs length mismatch");
  std::vector<PlanEdge> edges;
  StateId at = inst.state_from_json(states.at(0));
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const StateId to = inst.state_from_json(states.at(i + 1));
    edges.push_back(PlanEdge{at, to, costs.at(i).get<double>()});
    at = to;
  }
  return make_plan(inst.state_from_json(states.at(0)), std::move(edges));
}

// --- cost-to-goal tables -----------------------------------------------------

inline json hstar_table_to_json(const ProblemInstance& inst, const oracle::CostToGoalTable& table) {
  json entries = json::array();
  for (const auto& [s, v] : table.value) entries.push_back(json::array({inst.state_to_json(s), v}));
  for (const auto& s : table.dead_ends) entries.push_back(json::array({inst.state_to_json(s), "deadend"}));
  return json{{"instance_id", inst.instance_id()}, {"entries", entries}};
}

// --- training records (decoupled from domain code) ---------------------------

inline json state_id_to_json(StateId s) { return json::array({s.hi, s.lo}); }
inline StateId state_id_from_json(const json& j) {
  return StateId{j.at(0).get<std::uint64_t>(), j.at(1).get<std::uint64_t>()};
}

inline json record_set_to_json(const RecordSet& rs) {
  json j{{"instance_id", rs.instance_id}, {"loss", to_string(rs.kind)}};
  json table = json::array();
  for (const auto& e : rs.state_table->entries()) {
    json entry{{"id", state_id_to_json(e.id)}, {"features", e.features}};
    if (e.hstar) entry["hstar"] = *e.hstar;
    if (e.dead_end) entry["dead_end"] = true;
    if (e.capped) entry["capped"] = true;
    table.push_back(std::move(entry));
  }
  j["state_table"] = std::move(table);
  switch (rs.kind) {
    case LossKind::lstar:
    case LossKind::lgbfs: {
      json pairs = json::array();
      for (const auto& p : rs.pairs)
        pairs.push_back(json{{"on_path", state_id_to_json(p.on_path)}, {"rival", state_id_to_json(p.rival)},
                             {"g_on_path", p.g_on_path}, {"g_rival", p.g_rival}});
      j["pairs"] = std::move(pairs);
      break;
    }
    case LossKind::lrt: {
      json ts = json::array();
      for (const auto& t : rs.transitions)
        ts.push_back(json{{"parent", state_id_to_json(t.parent)}, {"child", state_id_to_json(t.child)}});
      j["transitions"] = std::move(ts);
      break;
    }
    case LossKind::l2: {
      json ls = json::array();
      for (const auto& l : rs.labeled)
        ls.push_back(json{{"state", state_id_to_json(l.state)}, {"target", l.target}});
      j["labeled"] = std::move(ls);
      break;
    }
    case LossKind::lbe: {
      json bs = json::array();
      for (const auto& b : rs.bellman) {
        json children = json::array();
        for (const auto& c : b.children) children.push_back(state_id_to_json(c));
        bs.push_back(json{{"state", state_id_to_json(b.state)}, {"hstar", b.hstar}, {"children", children}});
      }
      j["bellman"] = std::move(bs);
      break;
    }
  }
  return j;
}

inline RecordSet record_set_from_json(const json& j) {
  RecordSet rs;
  rs.instance_id = j.at("instance_id").get<std::string>();
  rs.kind = loss_kind_from_string(j.at("loss").get<std::string>());
  rs.state_table = std::make_shared<StateTable>();
  for (const auto& e : j.at("state_table")) {
    StateTable::Entry entry;
    entry.id = state_id_from_json(e.at("id"));
    entry.features = e.at("features").get<std::vector<double>>();
    if (e.contains("hstar")) entry.hstar = e.at("hstar").get<double>();
    entry.dead_end = e.value("dead_end", false);
    entry.capped = e.value("capped", false);
    rs.state_table->add(entry);
  }
  if (j.contains("pairs"))
    for (const auto& p : j.at("pairs"))
      rs.pairs.push_back(PairRecord{state_id_from_json(p.at("on_path")), state_id_from_json(p.at("rival")),
                                    p.at("g_on_path").get<double>(), p.at("g_rival").get<double>()});
  if (j.contains("transitions"))
    for (const auto& t : j.at("transitions"))
      rs.transitions.push_back(TransitionRecord{state_id_from_json(t.at("parent")), state_id_from_json(t.at("child"))});
  if (j.contains("labeled"))
    for (const auto& l : j.at("labeled"))
      rs.labeled.push_back(LabeledStateRecord{state_id_from_json(l.at("state")), l.at("target").get<double>()});
  if (j.contains("bellman"))
    for (const auto& b : j.at("bellman")) {
      BellmanRecord rec;
      rec.state = state_id_from_json(b.at("state"));
      rec.hstar = b.at("hstar").get<double>();
      for (const auto& c : b.at("children")) rec.children.push_back(state_id_from_json(c));
      rs.bellman.push_back(std::move(rec));
    }
  return rs;
}

// --- instances ---------------------------------------------------------------

inline std::vector<ProblemInstance> read_instances(const std::string& path) {
  std::vector<ProblemInstance> out;
  for (const auto& j : read_jsonl(path, "instance")) out.push_back(ProblemInstance::from_json(j));
  return out;
}

inline void write_instances(const std::string& path, const std::vector<ProblemInstance>& instances) {
  std::vector<json> lines;
  for (const auto& inst : instances) lines.push_back(inst.to_json());
  write_jsonl(path, lines);
}

}  // namespace io
}  // namespace heurank
