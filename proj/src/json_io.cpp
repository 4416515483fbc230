#include "relpax/json_io.hpp"

namespace relpax {

using nlohmann::json;

std::string register_value_to_string(const RegisterValue& rv) {
  if (rv.is_nil()) {
    return "nil";
  }
  if (rv.is_val()) {
    return rv.value();
  }
  throw Error("unwritten cells have no encoding");
}

RegisterValue register_value_from_string(const std::string& s) {
  return s == "nil" ? RegisterValue::nil() : RegisterValue::val(s);
}

namespace {

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::kP1a:
      return "p1a";
    case MsgKind::kP1b:
      return "p1b";
    case MsgKind::kP2a:
      return "p2a";
    case MsgKind::kP2b:
      return "p2b";
    case MsgKind::kP3a:
      return "p3a";
  }
  return "?";
}

MsgKind kind_from_name(const std::string& s) {
  if (s == "p1a") return MsgKind::kP1a;
  if (s == "p1b") return MsgKind::kP1b;
  if (s == "p2a") return MsgKind::kP2a;
  if (s == "p2b") return MsgKind::kP2b;
  if (s == "p3a") return MsgKind::kP3a;
  throw Error("unknown message kind: " + s);
}

const char* state_name(DecisionState::Kind k) {
  switch (k) {
    case DecisionState::Kind::kAny:
      return "any";
    case DecisionState::Kind::kMaybe:
      return "maybe";
    case DecisionState::Kind::kDecided:
      return "decided";
    case DecisionState::Kind::kNone:
      return "none";
  }
  return "?";
}

json decision_entry_to_json(Round round, const Quorum& q, const DecisionState& st) {
  json rec;
  rec["round"] = round;
  rec["quorum"] = q.members();
  rec["state"] = state_name(st.kind());
  if (st.is_maybe() || st.is_decided()) {
    rec["value"] = st.value();
  }
  return rec;
}

}  // namespace

json message_to_json(const Message& m) {
  json j;
  j["kind"] = kind_name(m.kind);
  j["from"] = m.from;
  j["to"] = m.to;
  switch (m.kind) {
    case MsgKind::kP1a:
      j["round"] = m.round;
      break;
    case MsgKind::kP1b: {
      j["round"] = m.round;
      json written = json::object();
      for (const auto& [round, rv] : m.written) {
        written[std::to_string(round)] = register_value_to_string(rv);
      }
      j["written"] = written;
      break;
    }
    case MsgKind::kP2a:
      j["round"] = m.round;
      j["value"] = m.value;
      break;
    case MsgKind::kP2b:
      j["round"] = m.round;
      j["value"] = register_value_to_string(m.content);
      break;
    case MsgKind::kP3a:
      j["value"] = m.value;
      break;
  }
  return j;
}

Message message_from_json(const json& j) {
  MsgKind kind = kind_from_name(j.at("kind").get<std::string>());
  std::uint32_t from = j.at("from").get<std::uint32_t>();
  std::uint32_t to = j.at("to").get<std::uint32_t>();
  switch (kind) {
    case MsgKind::kP1a:
      return make_p1a(from, to, j.at("round").get<Round>());
    case MsgKind::kP1b: {
      std::map<Round, RegisterValue> written;
      for (const auto& [key, val] : j.at("written").items()) {
        written.emplace(static_cast<Round>(std::stoul(key)),
                        register_value_from_string(val.get<std::string>()));
      }
      return make_p1b(from, to, j.at("round").get<Round>(), std::move(written));
    }
    case MsgKind::kP2a:
      return make_p2a(from, to, j.at("round").get<Round>(), j.at("value").get<std::string>());
    case MsgKind::kP2b:
      return make_p2b(from, to, j.at("round").get<Round>(),
                      register_value_from_string(j.at("value").get<std::string>()));
    case MsgKind::kP3a:
      return make_p3a(from, to, j.at("value").get<std::string>());
  }
  throw Error("unreachable message kind");
}

json event_to_json(const SimEvent& e) {
  json j;
  switch (e.kind) {
    case SimEvent::Kind::kDeliver:
      j["type"] = "deliver";
      j["msg_id"] = e.msg_id;
      break;
    case SimEvent::Kind::kDrop:
      j["type"] = "drop";
      j["msg_id"] = e.msg_id;
      break;
    case SimEvent::Kind::kDuplicate:
      j["type"] = "duplicate";
      j["msg_id"] = e.msg_id;
      break;
    case SimEvent::Kind::kTimeout:
      j["type"] = "timeout";
      j["proposer"] = e.proposer;
      break;
    case SimEvent::Kind::kCrash:
      j["type"] = "crash";
      j["acceptor"] = e.acceptor;
      break;
  }
  return j;
}

SimEvent event_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "deliver") return SimEvent::deliver(j.at("msg_id").get<std::uint64_t>());
  if (type == "drop") return SimEvent::drop(j.at("msg_id").get<std::uint64_t>());
  if (type == "duplicate") return SimEvent::duplicate(j.at("msg_id").get<std::uint64_t>());
  if (type == "timeout") return SimEvent::timeout(j.at("proposer").get<ProposerId>());
  if (type == "crash") return SimEvent::crash(j.at("acceptor").get<AcceptorId>());
  throw Error("unknown event type: " + type);
}

json quorum_config_to_json(const QuorumConfig& c) {
  json j;
  j["acceptors"] = c.acceptor_count();
  json rules = json::array();
  for (const QuorumRule& rule : c.rules()) {
    json r;
    json match;
    switch (rule.match.kind) {
      case RoundMatcher::Kind::kExact:
        match["kind"] = "exact";
        match["rounds"] = rule.match.rounds;
        break;
      case RoundMatcher::Kind::kFrom:
        match["kind"] = "from";
        match["start"] = rule.match.start;
        break;
      case RoundMatcher::Kind::kMod:
        match["kind"] = "mod";
        match["modulus"] = rule.match.modulus;
        match["remainder"] = rule.match.remainder;
        break;
    }
    r["match"] = match;
    json quorums = json::array();
    for (const Quorum& q : rule.quorums) {
      quorums.push_back(q.members());
    }
    r["quorums"] = quorums;
    rules.push_back(r);
  }
  j["rules"] = rules;
  return j;
}

QuorumConfig quorum_config_from_json(const json& j) {
  std::vector<QuorumRule> rules;
  for (const json& r : j.at("rules")) {
    const json& match = r.at("match");
    const std::string kind = match.at("kind").get<std::string>();
    RoundMatcher m;
    if (kind == "exact") {
      m = RoundMatcher::exact(match.at("rounds").get<std::set<Round>>());
    } else if (kind == "from") {
      m = RoundMatcher::from(match.at("start").get<Round>());
    } else if (kind == "mod") {
      m = RoundMatcher::mod(match.at("modulus").get<std::uint32_t>(),
                            match.at("remainder").get<std::uint32_t>());
    } else {
      throw Error("unknown round matcher kind: " + kind);
    }
    std::vector<Quorum> quorums;
    for (const json& q : r.at("quorums")) {
      quorums.push_back(Quorum(q.get<std::vector<AcceptorId>>()));
    }
    rules.push_back(QuorumRule{m, std::move(quorums)});
  }
  return QuorumConfig(j.at("acceptors").get<std::uint32_t>(), std::move(rules));
}

namespace {

template <typename T>
json opt_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return j.at(key).get<T>();
}

}  // namespace

json sim_config_to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["max_steps"] = c.max_steps;
  j["allow_drops"] = c.allow_drops;
  j["allow_duplicates"] = c.allow_duplicates;
  j["allow_crashes"] = c.allow_crashes;
  j["max_crashes"] = c.max_crashes;
  j["synchronous_after"] = opt_to_json(c.synchronous_after);
  j["max_round"] = opt_to_json(c.max_round);
  j["max_timeouts_per_proposer"] = opt_to_json(c.max_timeouts_per_proposer);
  j["max_drops"] = opt_to_json(c.max_drops);
  j["max_duplicates"] = opt_to_json(c.max_duplicates);
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  c.seed = j.value("seed", c.seed);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.allow_drops = j.value("allow_drops", c.allow_drops);
  c.allow_duplicates = j.value("allow_duplicates", c.allow_duplicates);
  c.allow_crashes = j.value("allow_crashes", c.allow_crashes);
  c.max_crashes = j.value("max_crashes", c.max_crashes);
  c.synchronous_after = opt_from_json<std::uint64_t>(j, "synchronous_after");
  c.max_round = opt_from_json<Round>(j, "max_round");
  c.max_timeouts_per_proposer = opt_from_json<std::uint32_t>(j, "max_timeouts_per_proposer");
  c.max_drops = opt_from_json<std::uint32_t>(j, "max_drops");
  c.max_duplicates = opt_from_json<std::uint32_t>(j, "max_duplicates");
  return c;
}

json state_table_to_json(const StateTable& t) {
  json cells = json::array();
  for (const auto& [cell, rv] : t.cells()) {
    cells.push_back(json::array({cell.acceptor, cell.round, register_value_to_string(rv)}));
  }
  return cells;
}

json decision_table_to_json(const DecisionTable& dt) {
  json entries = json::array();
  for (const auto& [key, st] : dt.entries()) {
    entries.push_back(decision_entry_to_json(key.first, key.second, st));
  }
  return entries;
}

json register_write_to_json(const RegisterWrite& w) {
  json j;
  j["acceptor"] = w.acceptor;
  j["round"] = w.round;
  j["content"] = register_value_to_string(w.content);
  return j;
}

RegisterWrite register_write_from_json(const json& j) {
  return RegisterWrite{j.at("acceptor").get<AcceptorId>(), j.at("round").get<Round>(),
                       register_value_from_string(j.at("content").get<std::string>())};
}

namespace {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kIdle:
      return "idle";
    case Phase::kPhaseOne:
      return "phase_one";
    case Phase::kPhaseTwo:
      return "phase_two";
    case Phase::kDone:
      return "done";
  }
  return "?";
}

}  // namespace

json world_to_json(const World& w) {
  json j;
  json acceptors = json::array();
  for (const Acceptor& a : w.acceptors()) {
    json ja;
    ja["id"] = a.id();
    json regs = json::object();
    for (const auto& [round, rv] : a.registers()) {
      regs[std::to_string(round)] = register_value_to_string(rv);
    }
    ja["registers"] = regs;
    ja["learned"] = a.learned() ? json(*a.learned()) : json(nullptr);
    acceptors.push_back(ja);
  }
  j["acceptors"] = acceptors;

  json proposers = json::array();
  for (const Proposer& p : w.proposers()) {
    json jp;
    jp["id"] = p.id();
    jp["input"] = p.input();
    jp["phase"] = phase_name(p.phase());
    jp["round"] = p.current_round();
    jp["chosen"] = p.chosen();
    jp["output"] = p.output() ? json(*p.output()) : json(nullptr);
    jp["used_rounds"] = p.used_rounds();
    jp["state_copy"] = state_table_to_json(p.state_copy());
    jp["decision_table"] = decision_table_to_json(p.decision_table());
    jp["retired_rounds"] = p.decision_table().unused_rounds();
    jp["anomalies"] = p.anomalies();
    proposers.push_back(jp);
  }
  j["proposers"] = proposers;

  json in_flight = json::array();
  for (const InFlightMessage& m : w.in_flight()) {
    json jm;
    jm["id"] = m.id;
    jm["msg"] = message_to_json(m.msg);
    in_flight.push_back(jm);
  }
  j["in_flight"] = in_flight;

  json outputs = json::object();
  for (const auto& [p, v] : w.outputs()) {
    outputs[std::to_string(p)] = v;
  }
  j["outputs"] = outputs;
  j["crashed"] = w.crashed();
  j["step_count"] = w.step_count();
  json counters;
  json timeouts = json::array();
  for (ProposerId p = 0; p < w.proposers().size(); ++p) {
    timeouts.push_back(w.timeouts_used(p));
  }
  counters["timeouts"] = timeouts;
  counters["drops"] = w.drops_used();
  counters["duplicates"] = w.duplicates_used();
  j["counters"] = counters;
  return j;
}

json proposer_snapshot(const Proposer& p, const QuorumConfig& config, const json& after_step) {
  // Row bound: everything observed so far; before any observation, the
  // phase-one scan range of the round being attempted.
  Round bound = 0;
  if (p.decision_table().max_seen()) {
    bound = *p.decision_table().max_seen();
  } else if (p.phase() == Phase::kPhaseOne && p.current_round() > 0) {
    bound = p.current_round() - 1;
  } else {
    bound = p.current_round();
  }

  json rows = json::array();
  for (Round i = 0; i <= bound; ++i) {
    json row;
    row["round"] = i;
    json cells = json::object();
    for (const auto& [cell, rv] : p.state_copy().cells()) {
      if (cell.round == i) {
        cells[std::to_string(cell.acceptor)] = register_value_to_string(rv);
      }
    }
    row["cells"] = cells;
    rows.push_back(row);
  }

  json entries = json::array();
  for (Round i = 0; i <= bound; ++i) {
    for (const Quorum& q : config.quorums_for(i)) {
      entries.push_back(decision_entry_to_json(i, q, p.decision_table().state(i, q)));
    }
  }

  json j;
  j["proposer"] = p.id();
  j["after_step"] = after_step;
  j["state_table"] = rows;
  j["decision_table"] = entries;
  return j;
}

std::string mutant_name(Mutant m) {
  switch (m) {
    case Mutant::kNone:
      return "none";
    case Mutant::kSkipPhaseOne:
      return "skip-phase-one";
    case Mutant::kNoNilFill:
      return "no-nil-fill";
    case Mutant::kIgnoreForcedValue:
      return "ignore-forced-value";
  }
  return "?";
}

}  // namespace relpax
