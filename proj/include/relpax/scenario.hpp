#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "relpax/core.hpp"
#include "relpax/protocol.hpp"
#include "relpax/simnet.hpp"

namespace relpax {

class ConfigParseError : public Error {
 public:
  using Error::Error;
};

class ScheduleNotEnabledError : public Error {
 public:
  using Error::Error;
};

class UnknownMutantError : public Error {
 public:
  using Error::Error;
};

Mutant mutant_from_name(const std::string& name);

/// One step of a scripted schedule. Message events are matched against the
/// in-flight set by content; the lowest-id match wins.
struct ScheduleEntry {
  SimEvent::Kind type = SimEvent::Kind::kDeliver;
  // Message selectors (deliver/drop/duplicate); unset fields match anything.
  std::optional<MsgKind> kind;
  std::optional<std::uint32_t> from;
  std::optional<std::uint32_t> to;
  std::optional<Round> round;
  std::optional<Value> value;
  ProposerId proposer = 0;  // timeout
  AcceptorId acceptor = 0;  // crash

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct ProposerSpec {
  ProposerId id = 0;
  Value input;

  friend bool operator==(const ProposerSpec&, const ProposerSpec&) = default;
};

/// Exploration bounds beyond the per-run SimConfig ones.
struct ExploreOptions {
  std::uint64_t depth = 100000;
  std::uint64_t state_cap = 1000000;
  bool check_decisions = true;
  bool ground_truth_dedup = false;

  friend bool operator==(const ExploreOptions&, const ExploreOptions&) = default;
};

/// A complete runnable setup: participants, quorum configuration, simulation
/// switches, exploration bounds and an optional scripted schedule.
struct Scenario {
  std::uint32_t n_acceptors = 1;
  std::vector<ProposerSpec> proposers;
  QuorumConfig quorums;
  SimConfig sim;
  ExploreOptions explore;
  Mutant mutant = Mutant::kNone;
  bool broadcast_p3a = false;
  std::vector<ScheduleEntry> schedule;

  explicit Scenario(QuorumConfig q) : quorums(std::move(q)) {}

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = "");

/// Loads a scenario file. A "quorums" entry that is a string is read as a
/// path to a standalone quorum configuration document, relative to the
/// scenario file.
Scenario load_scenario(const std::string& path);

World make_world(const Scenario& s);

}  // namespace relpax
