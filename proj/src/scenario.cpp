#include "relpax/scenario.hpp"

#include <filesystem>
#include <fstream>

#include "relpax/json_io.hpp"

namespace relpax {

using nlohmann::json;

Mutant mutant_from_name(const std::string& name) {
  if (name.empty() || name == "none") return Mutant::kNone;
  if (name == "skip-phase-one") return Mutant::kSkipPhaseOne;
  if (name == "no-nil-fill") return Mutant::kNoNilFill;
  if (name == "ignore-forced-value") return Mutant::kIgnoreForcedValue;
  throw UnknownMutantError("unknown mutant: " + name);
}

namespace {

json schedule_entry_to_json(const ScheduleEntry& e) {
  json j;
  switch (e.type) {
    case SimEvent::Kind::kDeliver:
      j["type"] = "deliver";
      break;
    case SimEvent::Kind::kDrop:
      j["type"] = "drop";
      break;
    case SimEvent::Kind::kDuplicate:
      j["type"] = "duplicate";
      break;
    case SimEvent::Kind::kTimeout:
      j["type"] = "timeout";
      j["proposer"] = e.proposer;
      return j;
    case SimEvent::Kind::kCrash:
      j["type"] = "crash";
      j["acceptor"] = e.acceptor;
      return j;
  }
  if (e.kind) {
    switch (*e.kind) {
      case MsgKind::kP1a:
        j["kind"] = "p1a";
        break;
      case MsgKind::kP1b:
        j["kind"] = "p1b";
        break;
      case MsgKind::kP2a:
        j["kind"] = "p2a";
        break;
      case MsgKind::kP2b:
        j["kind"] = "p2b";
        break;
      case MsgKind::kP3a:
        j["kind"] = "p3a";
        break;
    }
  }
  if (e.from) j["from"] = *e.from;
  if (e.to) j["to"] = *e.to;
  if (e.round) j["round"] = *e.round;
  if (e.value) j["value"] = *e.value;
  return j;
}

ScheduleEntry schedule_entry_from_json(const json& j) {
  ScheduleEntry e;
  const std::string type = j.at("type").get<std::string>();
  if (type == "deliver") {
    e.type = SimEvent::Kind::kDeliver;
  } else if (type == "drop") {
    e.type = SimEvent::Kind::kDrop;
  } else if (type == "duplicate") {
    e.type = SimEvent::Kind::kDuplicate;
  } else if (type == "timeout") {
    e.type = SimEvent::Kind::kTimeout;
    e.proposer = j.at("proposer").get<ProposerId>();
    return e;
  } else if (type == "crash") {
    e.type = SimEvent::Kind::kCrash;
    e.acceptor = j.at("acceptor").get<AcceptorId>();
    return e;
  } else {
    throw ConfigParseError("unknown schedule entry type: " + type);
  }
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    if (k == "p1a") {
      e.kind = MsgKind::kP1a;
    } else if (k == "p1b") {
      e.kind = MsgKind::kP1b;
    } else if (k == "p2a") {
      e.kind = MsgKind::kP2a;
    } else if (k == "p2b") {
      e.kind = MsgKind::kP2b;
    } else if (k == "p3a") {
      e.kind = MsgKind::kP3a;
    } else {
      throw ConfigParseError("unknown message kind in schedule: " + k);
    }
  }
  if (j.contains("from")) e.from = j.at("from").get<std::uint32_t>();
  if (j.contains("to")) e.to = j.at("to").get<std::uint32_t>();
  if (j.contains("round")) e.round = j.at("round").get<Round>();
  if (j.contains("value")) e.value = j.at("value").get<std::string>();
  return e;
}

}  // namespace

json scenario_to_json(const Scenario& s) {
  json j;
  j["acceptors"] = s.n_acceptors;
  json proposers = json::array();
  for (const ProposerSpec& p : s.proposers) {
    json jp;
    jp["id"] = p.id;
    jp["input"] = p.input;
    proposers.push_back(jp);
  }
  j["proposers"] = proposers;
  j["quorums"] = quorum_config_to_json(s.quorums);
  j["sim"] = sim_config_to_json(s.sim);
  json e;
  e["depth"] = s.explore.depth;
  e["state_cap"] = s.explore.state_cap;
  e["check_decisions"] = s.explore.check_decisions;
  e["ground_truth_dedup"] = s.explore.ground_truth_dedup;
  j["explore"] = e;
  j["mutant"] = mutant_name(s.mutant);
  j["broadcast_p3a"] = s.broadcast_p3a;
  json schedule = json::array();
  for (const ScheduleEntry& entry : s.schedule) {
    schedule.push_back(schedule_entry_to_json(entry));
  }
  j["schedule"] = schedule;
  return j;
}

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
  try {
    json quorums_json = j.at("quorums");
    if (quorums_json.is_string()) {
      std::filesystem::path p = quorums_json.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) {
        p = std::filesystem::path(base_dir) / p;
      }
      std::ifstream in(p);
      if (!in) {
        throw ConfigParseError("cannot open quorum config: " + p.string());
      }
      quorums_json = json::parse(in);
    }
    Scenario s(quorum_config_from_json(quorums_json));
    s.n_acceptors = j.at("acceptors").get<std::uint32_t>();
    for (const json& jp : j.at("proposers")) {
      ProposerSpec spec;
      spec.id = jp.at("id").get<ProposerId>();
      spec.input = jp.at("input").get<std::string>();
      if (spec.input.empty() || spec.input == "nil") {
        throw ConfigParseError("proposer input values must be non-empty and not \"nil\"");
      }
      s.proposers.push_back(std::move(spec));
    }
    if (s.proposers.empty()) {
      throw ConfigParseError("at least one proposer required");
    }
    for (std::size_t i = 0; i < s.proposers.size(); ++i) {
      if (s.proposers[i].id != i) {
        throw ConfigParseError("proposer ids must be 0..n-1 in order");
      }
    }
    if (s.quorums.acceptor_count() != s.n_acceptors) {
      throw ConfigParseError("quorum config acceptor count does not match scenario");
    }
    if (j.contains("sim")) {
      s.sim = sim_config_from_json(j.at("sim"));
    }
    if (j.contains("explore")) {
      const json& e = j.at("explore");
      s.explore.depth = e.value("depth", s.explore.depth);
      s.explore.state_cap = e.value("state_cap", s.explore.state_cap);
      s.explore.check_decisions = e.value("check_decisions", s.explore.check_decisions);
      s.explore.ground_truth_dedup = e.value("ground_truth_dedup", s.explore.ground_truth_dedup);
    }
    s.mutant = mutant_from_name(j.value("mutant", "none"));
    s.broadcast_p3a = j.value("broadcast_p3a", false);
    if (j.contains("schedule")) {
      for (const json& je : j.at("schedule")) {
        s.schedule.push_back(schedule_entry_from_json(je));
      }
    }
    return s;
  } catch (const ConfigParseError&) {
    throw;
  } catch (const UnknownMutantError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigParseError(std::string("bad scenario: ") + ex.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigParseError("cannot open scenario file: " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& ex) {
    throw ConfigParseError(std::string("bad scenario JSON: ") + ex.what());
  }
  return scenario_from_json(j, std::filesystem::path(path).parent_path().string());
}

World make_world(const Scenario& s) {
  std::vector<Value> inputs;
  inputs.reserve(s.proposers.size());
  for (const ProposerSpec& p : s.proposers) {
    inputs.push_back(p.input);
  }
  return World(std::make_shared<QuorumConfig>(s.quorums), std::move(inputs), s.n_acceptors,
               s.mutant, s.broadcast_p3a);
}

}  // namespace relpax
