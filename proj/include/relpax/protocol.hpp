#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relpax/core.hpp"
#include "relpax/decision.hpp"

namespace relpax {

class RoundNotOwnedError : public Error {
 public:
  using Error::Error;
};

class RoundAlreadyUsedError : public Error {
 public:
  using Error::Error;
};

class NotDecidedError : public Error {
 public:
  using Error::Error;
};

/// Deliberately broken protocol variants for checker sensitivity tests.
///
///   kSkipPhaseOne      - proposers write their input to any owned round
///                        without consulting the decision table.
///   kNoNilFill         - acceptors never nil-fill earlier registers.
///   kIgnoreForcedValue - proposers write their input even when phase one
///                        forces another value.
enum class Mutant : std::uint8_t { kNone, kSkipPhaseOne, kNoNilFill, kIgnoreForcedValue };

enum class MsgKind : std::uint8_t { kP1a, kP1b, kP2a, kP2b, kP3a };

/// One protocol message plus its envelope. `from`/`to` are proposer ids for
/// proposer-originated kinds (P1a/P2a/P3a target acceptors) and acceptor ids
/// for replies (P1b/P2b target proposers).
struct Message {
  MsgKind kind = MsgKind::kP1a;
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  Round round = 0;                         // p1a/p1b/p2a/p2b
  Value value;                             // p2a/p3a payload
  RegisterValue content;                   // p2b payload (nil or value)
  std::map<Round, RegisterValue> written;  // p1b payload: all written cells

  friend bool operator==(const Message&, const Message&) = default;
};

Message make_p1a(ProposerId from, AcceptorId to, Round i);
Message make_p1b(AcceptorId from, ProposerId to, Round i, std::map<Round, RegisterValue> written);
Message make_p2a(ProposerId from, AcceptorId to, Round i, Value v);
Message make_p2b(AcceptorId from, ProposerId to, Round i, RegisterValue content);
Message make_p3a(ProposerId from, AcceptorId to, Value v);

/// Register write performed by an acceptor, reported so the simulator can
/// keep the ground-truth table and the trace record in step.
struct RegisterWrite {
  AcceptorId acceptor = 0;
  Round round = 0;
  RegisterValue content;

  friend bool operator==(const RegisterWrite&, const RegisterWrite&) = default;
};

/// Passive participant: one column of write-once registers plus an optional
/// learned decision from P3a. Never initiates messages.
class Acceptor {
 public:
  Acceptor(AcceptorId id, Mutant mutant = Mutant::kNone);

  struct HandleResult {
    std::vector<Message> replies;
    std::vector<RegisterWrite> writes;
  };

  /// Processes P1a, P2a or P3a. Re-delivery leaves the registers unchanged.
  HandleResult handle(const Message& m);

  AcceptorId id() const { return id_; }
  const std::map<Round, RegisterValue>& registers() const { return registers_; }
  const RegisterValue& register_at(Round i) const;
  const std::optional<Value>& learned() const { return learned_; }
  const std::vector<std::string>& anomalies() const { return anomalies_; }

  friend bool operator==(const Acceptor&, const Acceptor&) = default;

 private:
  void nil_fill_below(Round i, std::vector<RegisterWrite>& writes);

  AcceptorId id_ = 0;
  Mutant mutant_ = Mutant::kNone;
  std::map<Round, RegisterValue> registers_;  // written cells only
  std::optional<Value> learned_;
  std::vector<std::string> anomalies_;
};

enum class Phase : std::uint8_t { kIdle, kPhaseOne, kPhaseTwo, kDone };

/// Smallest round owned by proposer p under round-robin assignment over
/// n_proposers, optionally strictly greater than `after`.
Round next_owned_round(ProposerId p, std::uint32_t n_proposers,
                       std::optional<Round> after = std::nullopt);

/// Active participant. Runs phase one until the decision table proves a value
/// safe for its round, writes it in phase two, and outputs once some quorum
/// is Decided. State and decision tables survive timeouts and restarts.
class Proposer {
 public:
  Proposer(ProposerId id, Value input, std::uint32_t n_proposers, std::uint32_t n_acceptors,
           Mutant mutant = Mutant::kNone, bool broadcast_p3a = false);

  /// Starts round i (owned, unused). Emits P2a immediately when phase one is
  /// already complete for i (always the case for round 0), P1a otherwise.
  std::vector<Message> begin_round(const QuorumConfig& config, Round i);

  /// Processes a P1b or P2b reply: folds every carried fact into the state
  /// and decision tables, then advances the phase machine.
  std::vector<Message> handle(const QuorumConfig& config, const Message& m);

  /// Abandons the current attempt and restarts at the next owned round. A
  /// round abandoned during phase one is retired as unused in the decision
  /// table; a phase-two round stays used since its value may yet be decided.
  std::vector<Message> handle_timeout(const QuorumConfig& config);

  /// P3a notification of the decided value to every acceptor. Requires Done.
  std::vector<Message> broadcast_decided() const;

  ProposerId id() const { return id_; }
  const Value& input() const { return input_; }
  Phase phase() const { return phase_; }
  /// Round of the current or last attempt. Meaningless while Idle.
  Round current_round() const { return current_round_; }
  /// Value being written in phase two (survives into Done).
  const Value& chosen() const { return chosen_; }
  const std::optional<Value>& output() const { return output_; }
  const StateTable& state_copy() const { return state_copy_; }
  const DecisionTable& decision_table() const { return dt_; }
  const std::set<Round>& used_rounds() const { return used_rounds_; }

  /// Own anomalies plus the decision table's.
  std::vector<std::string> anomalies() const;

  friend bool operator==(const Proposer&, const Proposer&) = default;

 private:
  std::vector<Message> enter_phase_two(const QuorumConfig& config, Round i, Value v);
  std::vector<Message> check_decided(const QuorumConfig& config);
  void ingest_fact(const QuorumConfig& config, AcceptorId from, Round i, const RegisterValue& rv);

  ProposerId id_ = 0;
  Value input_;
  std::uint32_t n_proposers_ = 1;
  std::uint32_t n_acceptors_ = 1;
  Mutant mutant_ = Mutant::kNone;
  bool broadcast_p3a_ = false;

  Phase phase_ = Phase::kIdle;
  Round current_round_ = 0;
  Value chosen_;
  std::optional<Value> output_;
  StateTable state_copy_;
  DecisionTable dt_;
  std::set<Round> used_rounds_;
  std::vector<std::string> anomalies_;
};

}  // namespace relpax
