#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "relpax/core.hpp"

namespace relpax {

/// An observation must be a written cell; Unwritten carries no information.
class UnwrittenObservationError : public Error {
 public:
  using Error::Error;
};

/// Knowledge state of one (round, quorum) pair.
///
///   Any        - any value could be decided by this quorum.
///   Maybe v    - if this quorum decides, it decides v.
///   Decided v  - the quorum has decided v (terminal).
///   None       - the quorum will never decide (terminal).
class DecisionState {
 public:
  enum class Kind : std::uint8_t { kAny, kMaybe, kDecided, kNone };

  DecisionState() = default;  // Any

  static DecisionState any() { return DecisionState(); }
  static DecisionState maybe(Value v) { return DecisionState(Kind::kMaybe, std::move(v)); }
  static DecisionState decided(Value v) { return DecisionState(Kind::kDecided, std::move(v)); }
  static DecisionState none() { return DecisionState(Kind::kNone, {}); }

  Kind kind() const { return kind_; }
  bool is_any() const { return kind_ == Kind::kAny; }
  bool is_maybe() const { return kind_ == Kind::kMaybe; }
  bool is_decided() const { return kind_ == Kind::kDecided; }
  bool is_none() const { return kind_ == Kind::kNone; }
  bool is_terminal() const { return is_decided() || is_none(); }

  /// Only meaningful for Maybe and Decided.
  const Value& value() const;

  friend bool operator==(const DecisionState&, const DecisionState&) = default;

 private:
  DecisionState(Kind kind, Value v) : kind_(kind), value_(std::move(v)) {}

  Kind kind_ = Kind::kAny;
  Value value_;
};

/// Outcome of the phase-one completion check over rounds 0..i-1.
struct PhaseOneStatus {
  enum class Kind { kPending, kReadyFree, kReadyForced };

  Kind kind = Kind::kPending;
  Value forced;  // kReadyForced only

  static PhaseOneStatus pending() { return {Kind::kPending, {}}; }
  static PhaseOneStatus ready_free() { return {Kind::kReadyFree, {}}; }
  static PhaseOneStatus ready_forced(Value v) { return {Kind::kReadyForced, std::move(v)}; }

  bool ready() const { return kind != Kind::kPending; }

  friend bool operator==(const PhaseOneStatus&, const PhaseOneStatus&) = default;
};

/// A proposer's per-(round, quorum) knowledge, derived purely from the facts
/// in its state-table copy plus any rounds it has explicitly retired. Entries
/// are stored sparsely; an absent key means Any.
///
/// Each entry is a pure function of the accumulated fact set, so replaying
/// any permutation of the same observations yields the same table. Facts that
/// contradict the write-once model (two values read in one round, an
/// observation against a terminal state) are recorded as anomalies for the
/// checker instead of being silently folded in.
class DecisionTable {
 public:
  using EntryKey = std::pair<Round, Quorum>;

  /// Folds one read fact into the table. `reads` is the owning proposer's
  /// state-table copy and must already contain the (a, i) fact.
  void observe(const QuorumConfig& config, const StateTable& reads, AcceptorId a, Round i,
               const RegisterValue& rv);

  /// Phase-one completion for round i: Pending while any quorum of rounds
  /// 0..i-1 is still Any; Ready(Forced v) when some quorum is Maybe v or
  /// Decided v and the rest are None; Ready(Free) when all are None
  /// (vacuously for i = 0).
  PhaseOneStatus phase_one_status(const QuorumConfig& config, Round i) const;

  /// The value of any Decided entry, if one exists.
  std::optional<Value> decided_value() const;

  /// Retires round i: the owner has written no value to it and never will,
  /// so every quorum of that round becomes None. A Decided entry at such a
  /// round is impossible for a round its owner never used and throws.
  void mark_unused_round(const QuorumConfig& config, Round i);

  /// Current state of (i, q); Any if never materialized.
  const DecisionState& state(Round i, const Quorum& q) const;

  /// Materialized (non-Any) entries, in canonical (round, quorum) order.
  const std::map<EntryKey, DecisionState>& entries() const { return entries_; }

  /// Highest round any observation or retirement has touched.
  std::optional<Round> max_seen() const { return max_seen_; }

  const std::set<Round>& unused_rounds() const { return unused_rounds_; }

  /// Inconsistencies noticed while updating (conflicting same-round values,
  /// observations against terminal states, conflicting forced values).
  /// These signal a broken run and are surfaced by the checker.
  const std::vector<std::string>& anomalies() const { return anomalies_; }

  /// Equality of knowledge; the anomaly log is diagnostic and excluded.
  friend bool operator==(const DecisionTable& a, const DecisionTable& b) {
    return a.entries_ == b.entries_ && a.max_seen_ == b.max_seen_ &&
           a.unused_rounds_ == b.unused_rounds_;
  }

 private:
  DecisionState evaluate(const StateTable& reads, Round i, const Quorum& q) const;
  void refresh_entry(const StateTable& reads, Round i, const Quorum& q);

  std::map<EntryKey, DecisionState> entries_;
  std::set<Round> unused_rounds_;
  std::optional<Round> max_seen_;
  mutable std::vector<std::string> anomalies_;
};

}  // namespace relpax
