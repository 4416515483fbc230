#include "relpax/trace.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "relpax/json_io.hpp"

namespace relpax {

using nlohmann::json;

TraceRecord step_and_record(World& w, const SimEvent& e, Trace& t) {
  TraceRecord rec;
  rec.step = w.step_count();
  rec.event = e;
  if (e.kind == SimEvent::Kind::kDeliver || e.kind == SimEvent::Kind::kDrop ||
      e.kind == SimEvent::Kind::kDuplicate) {
    // Record the referenced message so replays can detect edits.
    for (const InFlightMessage& m : w.in_flight()) {
      if (m.id == e.msg_id) {
        rec.event_msg = m.msg;
        break;
      }
    }
  }
  World::StepResult result = w.apply_event(e);
  rec.emitted = std::move(result.emitted);
  rec.writes = std::move(result.writes);
  rec.outputs_after = w.outputs();
  t.records.push_back(rec);
  return rec;
}

Trace run_random(const Scenario& s) {
  World w = make_world(s);
  Trace t(s);
  std::mt19937_64 rng(s.sim.seed);
  while (true) {
    if (w.all_done()) {
      t.stop_reason = "all_done";
      break;
    }
    if (w.step_count() >= s.sim.max_steps) {
      t.stop_reason = "max_steps";
      break;
    }
    std::vector<SimEvent> enabled = w.enabled_events(s.sim);
    if (enabled.empty()) {
      t.stop_reason = "quiescent";
      break;
    }
    step_and_record(w, enabled[rng() % enabled.size()], t);
  }
  t.final_world = world_to_json(w);
  return t;
}

namespace {

SimEvent resolve_schedule_entry(const World& w, const ScheduleEntry& e) {
  switch (e.type) {
    case SimEvent::Kind::kTimeout:
      return SimEvent::timeout(e.proposer);
    case SimEvent::Kind::kCrash:
      return SimEvent::crash(e.acceptor);
    default:
      break;
  }
  for (const InFlightMessage& m : w.in_flight()) {
    if (e.kind && m.msg.kind != *e.kind) continue;
    if (e.from && m.msg.from != *e.from) continue;
    if (e.to && m.msg.to != *e.to) continue;
    if (e.round && m.msg.round != *e.round) continue;
    if (e.value && m.msg.value != *e.value) continue;
    switch (e.type) {
      case SimEvent::Kind::kDeliver:
        return SimEvent::deliver(m.id);
      case SimEvent::Kind::kDrop:
        return SimEvent::drop(m.id);
      default:
        return SimEvent::duplicate(m.id);
    }
  }
  throw ScheduleNotEnabledError("no in-flight message matches a scheduled event");
}

}  // namespace

Trace run_scripted(const Scenario& s) {
  World w = make_world(s);
  Trace t(s);
  for (const ScheduleEntry& entry : s.schedule) {
    SimEvent e = resolve_schedule_entry(w, entry);
    std::vector<SimEvent> enabled = w.enabled_events(s.sim);
    if (std::find(enabled.begin(), enabled.end(), e) == enabled.end()) {
      throw ScheduleNotEnabledError("scheduled event is not enabled at step " +
                                    std::to_string(w.step_count()));
    }
    step_and_record(w, e, t);
  }
  t.stop_reason = "schedule_end";
  t.final_world = world_to_json(w);
  return t;
}

Trace run_scenario(const Scenario& s) {
  return s.schedule.empty() ? run_random(s) : run_scripted(s);
}

World replay_trace(const Trace& t) {
  World w = make_world(t.scenario);
  for (const TraceRecord& rec : t.records) {
    if (rec.event_msg) {
      bool found = false;
      for (const InFlightMessage& m : w.in_flight()) {
        if (m.id == rec.event.msg_id) {
          if (m.msg != *rec.event_msg) {
            throw TraceMismatchError("message " + std::to_string(m.id) +
                                     " differs from the recorded content at step " +
                                     std::to_string(rec.step));
          }
          found = true;
          break;
        }
      }
      if (!found) {
        throw TraceMismatchError("recorded message is not in flight at step " +
                                 std::to_string(rec.step));
      }
    }
    World::StepResult result;
    try {
      result = w.apply_event(rec.event);
    } catch (const Error& e) {
      throw TraceMismatchError("event failed to apply at step " + std::to_string(rec.step) +
                               ": " + e.what());
    }
    if (result.emitted != rec.emitted || result.writes != rec.writes ||
        w.outputs() != rec.outputs_after) {
      throw TraceMismatchError("replay diverged at step " + std::to_string(rec.step));
    }
  }
  if (world_to_json(w) != t.final_world) {
    throw TraceMismatchError("final world differs from the recorded one");
  }
  return w;
}

json trace_record_to_json(const TraceRecord& r) {
  json j;
  j["step"] = r.step;
  j["event"] = event_to_json(r.event);
  if (r.event_msg) {
    j["event"]["msg"] = message_to_json(*r.event_msg);
  }
  json emitted = json::array();
  for (const InFlightMessage& m : r.emitted) {
    json jm;
    jm["id"] = m.id;
    jm["msg"] = message_to_json(m.msg);
    emitted.push_back(jm);
  }
  j["emitted"] = emitted;
  json writes = json::array();
  for (const RegisterWrite& w : r.writes) {
    writes.push_back(register_write_to_json(w));
  }
  j["writes"] = writes;
  json outputs = json::object();
  for (const auto& [p, v] : r.outputs_after) {
    outputs[std::to_string(p)] = v;
  }
  j["outputs"] = outputs;
  return j;
}

TraceRecord trace_record_from_json(const json& j) {
  TraceRecord r;
  r.step = j.at("step").get<std::uint64_t>();
  r.event = event_from_json(j.at("event"));
  if (j.at("event").contains("msg")) {
    r.event_msg = message_from_json(j.at("event").at("msg"));
  }
  for (const json& jm : j.at("emitted")) {
    r.emitted.push_back(
        InFlightMessage{jm.at("id").get<std::uint64_t>(), message_from_json(jm.at("msg"))});
  }
  for (const json& jw : j.at("writes")) {
    r.writes.push_back(register_write_from_json(jw));
  }
  for (const auto& [key, val] : j.at("outputs").items()) {
    r.outputs_after.emplace(static_cast<ProposerId>(std::stoul(key)), val.get<std::string>());
  }
  return r;
}

void write_trace_file(const Trace& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open trace file for writing: " + path);
  }
  json header;
  header["format"] = kTraceFormat;
  header["rng"] = kRngName;
  header["stop_reason"] = t.stop_reason;
  header["scenario"] = scenario_to_json(t.scenario);
  out << header.dump() << '\n';
  for (const TraceRecord& r : t.records) {
    out << trace_record_to_json(r).dump() << '\n';
  }
  json footer;
  footer["final_world"] = t.final_world;
  out << footer.dump() << '\n';
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw TraceParseError("cannot open trace file: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw TraceParseError("empty trace file");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const std::exception& ex) {
    throw TraceParseError(std::string("bad trace header: ") + ex.what());
  }
  if (header.value("format", "") != kTraceFormat) {
    throw TraceParseError("unsupported trace format");
  }
  if (header.value("rng", "") != kRngName) {
    throw TraceParseError("trace was produced with a different event picker");
  }
  Trace t(scenario_from_json(header.at("scenario")));
  t.stop_reason = header.value("stop_reason", "");
  bool saw_footer = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& ex) {
      throw TraceParseError(std::string("bad trace record: ") + ex.what());
    }
    if (j.contains("final_world")) {
      t.final_world = j.at("final_world");
      saw_footer = true;
      break;
    }
    try {
      t.records.push_back(trace_record_from_json(j));
    } catch (const std::exception& ex) {
      throw TraceParseError(std::string("bad trace record: ") + ex.what());
    }
  }
  if (!saw_footer) {
    throw TraceParseError("trace file has no final_world record");
  }
  return t;
}

}  // namespace relpax
