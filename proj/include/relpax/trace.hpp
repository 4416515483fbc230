#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relpax/scenario.hpp"
#include "relpax/simnet.hpp"

namespace relpax {

class TraceParseError : public Error {
 public:
  using Error::Error;
};

/// Replaying diverged from the recorded run; a determinism bug or an edited
/// trace file.
class TraceMismatchError : public Error {
 public:
  using Error::Error;
};

/// Identity of the event picker, part of the trace format contract.
inline constexpr const char* kRngName = "mt19937_64-mod";
inline constexpr const char* kTraceFormat = "relpax-trace-v1";

struct TraceRecord {
  std::uint64_t step = 0;
  SimEvent event;
  /// Content of the message the event refers to (deliver/drop/duplicate).
  std::optional<Message> event_msg;
  std::vector<InFlightMessage> emitted;
  std::vector<RegisterWrite> writes;
  std::map<ProposerId, Value> outputs_after;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// A full run: the scenario it started from, every applied event with its
/// effects, and the canonical encoding of the final world.
struct Trace {
  Scenario scenario;
  std::string stop_reason;  // all_done | quiescent | max_steps | schedule_end
  std::vector<TraceRecord> records;
  nlohmann::json final_world;

  explicit Trace(Scenario s) : scenario(std::move(s)) {}
};

/// Applies one event and appends the record. Shared by every run mode.
TraceRecord step_and_record(World& w, const SimEvent& e, Trace& t);

/// Seeded random run: picks uniformly among enabled events until every
/// proposer is done, nothing is enabled, or max_steps is hit. Identical
/// scenario and seed give a byte-identical trace.
Trace run_random(const Scenario& s);

/// Runs the scenario's scripted schedule. Each entry must be enabled when
/// its turn comes.
Trace run_scripted(const Scenario& s);

/// Scripted when a schedule is present, random otherwise.
Trace run_scenario(const Scenario& s);

/// Re-executes a trace from its scenario and verifies every step and the
/// final world bit-for-bit. Returns the replayed world.
World replay_trace(const Trace& t);

void write_trace_file(const Trace& t, const std::string& path);
Trace read_trace_file(const std::string& path);

nlohmann::json trace_record_to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const nlohmann::json& j);

}  // namespace relpax
