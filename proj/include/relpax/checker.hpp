#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relpax/scenario.hpp"
#include "relpax/simnet.hpp"
#include "relpax/trace.hpp"

namespace relpax {

enum class ViolationKind : std::uint8_t {
  kNonTriviality,
  kAgreement,
  kWriteOnce,
  kSingleValuePerRound,
  kDecisionSoundness,
  kRuleOracleMismatch,
};

const char* violation_kind_name(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::kAgreement;
  std::string detail;
  std::uint64_t step = 0;  // earliest step at which it is detectable

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Scans a trace for the core safety properties: all outputs agree, every
/// output was some proposer's input, no register cell is ever rewritten, and
/// no round carries two distinct non-nil values. Reports the earliest
/// detectable step per kind. Works purely on the recorded steps, so it also
/// catches hand-edited traces.
std::vector<Violation> check_safety(const Trace& t, const std::map<ProposerId, Value>& inputs);

/// Replays a trace against the abstract register model only, with no
/// protocol logic, and checks the four correctness rules:
///   1. every output is backed by reads of that value across a full quorum;
///   2. every written value is the writer's input or was read before;
///   3. each round is written by its owner with a single value;
///   4. no value is written above a round that decided differently.
/// Nil writes are unrestricted. Breaches are RuleOracleMismatch violations.
std::vector<Violation> oracle_four_rules(const Trace& t,
                                         const std::map<ProposerId, Value>& inputs);

/// Invariants of a single reachable world, used at every state during
/// exploration. `rec` carries the effects of the step that produced the
/// world (null for the initial state). With check_decisions, every decision
/// table entry is validated against the ground truth: Decided quorums must
/// hold the value now, and Maybe/None claims must not contradict a ground
/// decision (a quorum claimed None can never appear decided while the claim
/// stands, so any in-bounds counterexample is caught at some visited state).
std::vector<Violation> check_world_state(const World& w, const TraceRecord* rec,
                                         bool check_decisions);

struct ExplorationReport {
  std::uint64_t states_visited = 0;
  std::uint64_t revisits = 0;
  std::uint64_t max_depth = 0;
  /// True iff the bounded space was fully enumerated (the state cap was not
  /// hit). Depth and fault budgets are declared bounds, not failures.
  bool complete = true;
  /// First counterexample per violation kind, each directly replayable.
  std::vector<std::pair<Violation, Trace>> violations;
};

/// Bounded exhaustive exploration: depth-first enumeration of every enabled
/// event interleaving, deduplicating states by canonical fingerprint, and
/// running the full invariant set at every newly reached state.
ExplorationReport explore(const Scenario& s);

}  // namespace relpax
