#include "relpax/decision.hpp"

#include <algorithm>

namespace relpax {

namespace {
const DecisionState kAny = DecisionState::any();

std::string describe(const DecisionState& s) {
  switch (s.kind()) {
    case DecisionState::Kind::kAny:
      return "Any";
    case DecisionState::Kind::kMaybe:
      return "Maybe " + s.value();
    case DecisionState::Kind::kDecided:
      return "Decided " + s.value();
    case DecisionState::Kind::kNone:
      return "None";
  }
  return "?";
}
}  // namespace

const Value& DecisionState::value() const {
  if (kind_ != Kind::kMaybe && kind_ != Kind::kDecided) {
    throw Error("DecisionState::value() called on " + describe(*this));
  }
  return value_;
}

DecisionState DecisionTable::evaluate(const StateTable& reads, Round i, const Quorum& q) const {
  if (unused_rounds_.count(i) != 0) {
    return DecisionState::none();
  }
  // A nil on any member blocks the quorum for good.
  for (AcceptorId a : q.members()) {
    if (reads.read(a, i).is_nil()) {
      return DecisionState::none();
    }
  }
  // Full quorum holding one value: decided.
  const RegisterValue& first = reads.read(q.members().front(), i);
  if (first.is_val()) {
    bool all = true;
    for (AcceptorId a : q.members()) {
      if (reads.read(a, i) != first) {
        all = false;
        break;
      }
    }
    if (all) {
      return DecisionState::decided(first.value());
    }
  }
  // Otherwise the entry is pinned by the values read at this round or any
  // later one: one such value leaves Maybe, two leave nothing decidable.
  std::optional<Value> candidate;
  for (const auto& [cell, rv] : reads.cells()) {
    if (cell.round < i || !rv.is_val()) {
      continue;
    }
    if (!candidate) {
      candidate = rv.value();
    } else if (*candidate != rv.value()) {
      return DecisionState::none();
    }
  }
  if (candidate) {
    return DecisionState::maybe(*candidate);
  }
  return DecisionState::any();
}

void DecisionTable::refresh_entry(const StateTable& reads, Round i, const Quorum& q) {
  DecisionState next = evaluate(reads, i, q);
  EntryKey key{i, q};
  auto it = entries_.find(key);
  const DecisionState& current = it == entries_.end() ? kAny : it->second;
  if (current == next) {
    return;
  }
  if (current.is_terminal()) {
    // Terminal states absorb; an observation that disagrees with one means
    // the run is already broken somewhere else.
    anomalies_.push_back("terminal decision state contradicted at round " + std::to_string(i) +
                         ": " + describe(current) + " vs " + describe(next));
    return;
  }
  if (current.is_maybe() && next.is_maybe()) {
    anomalies_.push_back("illegal Maybe-to-Maybe transition at round " + std::to_string(i));
    return;
  }
  if (current.is_maybe() && next.is_decided() && current.value() != next.value()) {
    anomalies_.push_back("quorum decided against its Maybe value at round " + std::to_string(i));
    return;
  }
  if (next.is_any()) {
    entries_.erase(key);
  } else if (it == entries_.end()) {
    entries_.emplace(std::move(key), next);
  } else {
    it->second = next;
  }
}

void DecisionTable::observe(const QuorumConfig& config, const StateTable& reads, AcceptorId a,
                            Round i, const RegisterValue& rv) {
  if (rv.is_unwritten()) {
    throw UnwrittenObservationError("observations must be nil or a value");
  }
  if (reads.read(a, i) != rv) {
    throw Error("observed fact is not present in the reads table");
  }
  if (!max_seen_ || i > *max_seen_) {
    max_seen_ = i;
  }
  if (rv.is_nil()) {
    for (const Quorum& q : config.quorums_for(i)) {
      if (q.contains(a)) {
        refresh_entry(reads, i, q);
      }
    }
    return;
  }
  // Two different values read in one round break the one-writer rule; report
  // rather than mask.
  std::set<Value> round_vals = reads.values_at_round(i);
  if (round_vals.size() > 1) {
    anomalies_.push_back("two distinct values read in round " + std::to_string(i));
  }
  // A value at round i pins every quorum of rounds 0..i.
  for (Round j = 0;; ++j) {
    for (const Quorum& q : config.quorums_for(j)) {
      refresh_entry(reads, j, q);
    }
    if (j == i) {
      break;
    }
  }
}

PhaseOneStatus DecisionTable::phase_one_status(const QuorumConfig& config, Round i) const {
  std::set<Value> forced;
  for (Round j = 0; j < i; ++j) {
    for (const Quorum& q : config.quorums_for(j)) {
      const DecisionState& st = state(j, q);
      switch (st.kind()) {
        case DecisionState::Kind::kAny:
          return PhaseOneStatus::pending();
        case DecisionState::Kind::kMaybe:
        case DecisionState::Kind::kDecided:
          forced.insert(st.value());
          break;
        case DecisionState::Kind::kNone:
          break;
      }
    }
  }
  if (forced.empty()) {
    return PhaseOneStatus::ready_free();
  }
  if (forced.size() > 1) {
    anomalies_.push_back("conflicting forced values completing phase one for round " +
                         std::to_string(i));
    return PhaseOneStatus::pending();
  }
  return PhaseOneStatus::ready_forced(*forced.begin());
}

std::optional<Value> DecisionTable::decided_value() const {
  std::optional<Value> out;
  for (const auto& [key, st] : entries_) {
    if (!st.is_decided()) {
      continue;
    }
    if (!out) {
      out = st.value();
    } else if (*out != st.value()) {
      anomalies_.push_back("two quorums decided different values");
    }
  }
  return out;
}

void DecisionTable::mark_unused_round(const QuorumConfig& config, Round i) {
  const std::vector<Quorum>& quorums = config.quorums_for(i);
  for (const Quorum& q : quorums) {
    if (state(i, q).is_decided()) {
      throw Error("cannot retire round " + std::to_string(i) + ": a quorum already decided in it");
    }
  }
  unused_rounds_.insert(i);
  if (!max_seen_ || i > *max_seen_) {
    max_seen_ = i;
  }
  for (const Quorum& q : quorums) {
    EntryKey key{i, q};
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      entries_.emplace(std::move(key), DecisionState::none());
    } else {
      it->second = DecisionState::none();
    }
  }
}

const DecisionState& DecisionTable::state(Round i, const Quorum& q) const {
  auto it = entries_.find(EntryKey{i, q});
  return it == entries_.end() ? kAny : it->second;
}

}  // namespace relpax
