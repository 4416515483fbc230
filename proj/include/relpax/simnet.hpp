#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relpax/core.hpp"
#include "relpax/protocol.hpp"

namespace relpax {

class EventNotEnabledError : public Error {
 public:
  using Error::Error;
};

/// Bounds and fault switches for a simulated run. The bound fields double as
/// the exploration bounds: an event that would exceed one is never enabled.
struct SimConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1000;
  bool allow_drops = false;
  bool allow_duplicates = false;
  bool allow_crashes = false;
  std::uint32_t max_crashes = 0;
  /// After this step only Deliver and Timeout fire (partial synchrony).
  std::optional<std::uint64_t> synchronous_after;
  /// Timeouts that would start a round above this bound are disabled.
  std::optional<Round> max_round;
  std::optional<std::uint32_t> max_timeouts_per_proposer;
  std::optional<std::uint32_t> max_drops;
  std::optional<std::uint32_t> max_duplicates;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// One atomic world transition.
struct SimEvent {
  enum class Kind : std::uint8_t { kDeliver, kDrop, kDuplicate, kTimeout, kCrash };

  Kind kind = Kind::kDeliver;
  std::uint64_t msg_id = 0;  // deliver/drop/duplicate
  ProposerId proposer = 0;   // timeout
  AcceptorId acceptor = 0;   // crash

  static SimEvent deliver(std::uint64_t id) { return {Kind::kDeliver, id, 0, 0}; }
  static SimEvent drop(std::uint64_t id) { return {Kind::kDrop, id, 0, 0}; }
  static SimEvent duplicate(std::uint64_t id) { return {Kind::kDuplicate, id, 0, 0}; }
  static SimEvent timeout(ProposerId p) { return {Kind::kTimeout, 0, p, 0}; }
  static SimEvent crash(AcceptorId a) { return {Kind::kCrash, 0, 0, a}; }

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// Message awaiting delivery. Ids are assigned in emission order and never
/// reused, giving every run a canonical event ordering.
struct InFlightMessage {
  std::uint64_t id = 0;
  Message msg;

  friend bool operator==(const InFlightMessage&, const InFlightMessage&) = default;
};

/// Complete simulation state: all actors, the in-flight multiset, recorded
/// outputs and crash set. Copyable; the explorer forks worlds freely.
class World {
 public:
  World(std::shared_ptr<const QuorumConfig> config, std::vector<Value> proposer_inputs,
        std::uint32_t n_acceptors, Mutant mutant = Mutant::kNone, bool broadcast_p3a = false);

  /// Effects of one applied event, for traces and incremental checks.
  struct StepResult {
    std::vector<InFlightMessage> emitted;
    std::vector<RegisterWrite> writes;
    std::map<ProposerId, Value> new_outputs;
    std::optional<Message> delivered;
  };

  /// Canonically ordered enabled events: Delivers (message id order), then
  /// Drops, Duplicates, Timeouts, Crashes. Messages to crashed acceptors stay
  /// deliverable and are consumed as no-ops, keeping enumeration uniform.
  std::vector<SimEvent> enabled_events(const SimConfig& sc) const;

  /// Applies an event the caller got from enabled_events.
  StepResult apply_event(const SimEvent& e);

  /// Like apply_event but verifies enabledness first.
  StepResult apply_checked(const SimEvent& e, const SimConfig& sc);

  bool all_done() const;

  const QuorumConfig& config() const { return *config_; }
  std::shared_ptr<const QuorumConfig> config_ptr() const { return config_; }
  const std::vector<Proposer>& proposers() const { return proposers_; }
  const std::vector<Acceptor>& acceptors() const { return acceptors_; }
  const std::vector<InFlightMessage>& in_flight() const { return in_flight_; }
  const std::map<ProposerId, Value>& outputs() const { return outputs_; }
  const std::set<AcceptorId>& crashed() const { return crashed_; }
  std::uint64_t step_count() const { return step_count_; }
  std::uint32_t timeouts_used(ProposerId p) const { return timeouts_used_.at(p); }
  std::uint32_t drops_used() const { return drops_used_; }
  std::uint32_t duplicates_used() const { return duplicates_used_; }

  /// Union of all acceptor registers.
  const StateTable& ground_truth() const { return ground_; }
  /// Highest round any register write has touched; 0 when none.
  Round max_written_round() const { return max_written_round_; }
  /// Per-proposer reads, merged by the simulator straight from delivered
  /// message payloads. Mirrors each proposer's state copy but is maintained
  /// independently of the proposer code, for the checker's benefit.
  const StateTable& delivered_reads(ProposerId p) const { return delivered_reads_.at(p); }
  /// Ground-truth write-once breaches (never with well-behaved acceptors).
  const std::vector<std::string>& ground_breaches() const { return ground_breaches_; }

  const std::map<ProposerId, Value>& inputs() const { return inputs_; }

  /// Canonical byte encoding of the world for state deduplication. With
  /// ground_truth_only, proposer knowledge (state copies, decision tables,
  /// delivered reads) is excluded.
  std::string fingerprint(bool ground_truth_only = false) const;

 private:
  StepResult deliver(std::uint64_t msg_id);
  void enqueue(std::vector<Message> msgs, StepResult& result);
  std::vector<InFlightMessage>::const_iterator find_message(std::uint64_t id) const;
  void note_writes(const std::vector<RegisterWrite>& writes);
  void note_output(ProposerId p, StepResult& result);

  std::shared_ptr<const QuorumConfig> config_;
  std::vector<Proposer> proposers_;
  std::vector<Acceptor> acceptors_;
  std::vector<InFlightMessage> in_flight_;
  std::uint64_t next_msg_id_ = 0;
  std::map<ProposerId, Value> outputs_;
  std::set<AcceptorId> crashed_;
  std::uint64_t step_count_ = 0;
  std::vector<std::uint32_t> timeouts_used_;
  std::uint32_t drops_used_ = 0;
  std::uint32_t duplicates_used_ = 0;

  std::map<ProposerId, Value> inputs_;
  StateTable ground_;
  Round max_written_round_ = 0;
  std::vector<StateTable> delivered_reads_;
  std::vector<std::string> ground_breaches_;
};

}  // namespace relpax
