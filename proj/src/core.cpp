#include "relpax/core.hpp"

#include <algorithm>

namespace relpax {

namespace {
const RegisterValue kUnwritten = RegisterValue::unwritten();
}  // namespace

const Value& RegisterValue::value() const {
  if (kind_ != Kind::kVal) {
    throw Error("RegisterValue::value() called on a non-value cell");
  }
  return value_;
}

bool StateTable::write(AcceptorId a, Round i, const RegisterValue& rv) {
  if (rv.is_unwritten()) {
    throw Error("cannot write Unwritten to a register");
  }
  return cells_.emplace(Cell{a, i}, rv).second;
}

StateTable::MergeOutcome StateTable::merge_fact(AcceptorId a, Round i, const RegisterValue& rv) {
  if (rv.is_unwritten()) {
    throw Error("cannot merge an Unwritten fact");
  }
  auto [it, inserted] = cells_.emplace(Cell{a, i}, rv);
  if (inserted) {
    return MergeOutcome::kNew;
  }
  return it->second == rv ? MergeOutcome::kDuplicate : MergeOutcome::kConflict;
}

const RegisterValue& StateTable::read(AcceptorId a, Round i) const {
  auto it = cells_.find(Cell{a, i});
  return it == cells_.end() ? kUnwritten : it->second;
}

std::set<Value> StateTable::values_at_round(Round i) const {
  std::set<Value> out;
  for (const auto& [cell, rv] : cells_) {
    if (cell.round == i && rv.is_val()) {
      out.insert(rv.value());
    }
  }
  return out;
}

std::optional<Round> StateTable::max_written_round() const {
  std::optional<Round> out;
  for (const auto& [cell, rv] : cells_) {
    if (!out || cell.round > *out) {
      out = cell.round;
    }
  }
  return out;
}

bool StateTable::subset_of(const StateTable& other) const {
  for (const auto& [cell, rv] : cells_) {
    auto it = other.cells_.find(cell);
    if (it == other.cells_.end() || it->second != rv) {
      return false;
    }
  }
  return true;
}

Quorum::Quorum(std::vector<AcceptorId> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.empty()) {
    throw Error("a quorum must be non-empty");
  }
}

Quorum::Quorum(std::initializer_list<AcceptorId> members)
    : Quorum(std::vector<AcceptorId>(members)) {}

bool Quorum::contains(AcceptorId a) const {
  return std::binary_search(members_.begin(), members_.end(), a);
}

RoundMatcher RoundMatcher::exact(std::set<Round> rs) {
  RoundMatcher m;
  m.kind = Kind::kExact;
  m.rounds = std::move(rs);
  return m;
}

RoundMatcher RoundMatcher::from(Round start) {
  RoundMatcher m;
  m.kind = Kind::kFrom;
  m.start = start;
  return m;
}

RoundMatcher RoundMatcher::mod(std::uint32_t modulus, std::uint32_t remainder) {
  if (modulus == 0 || remainder >= modulus) {
    throw Error("mod matcher requires 0 <= remainder < modulus");
  }
  RoundMatcher m;
  m.kind = Kind::kMod;
  m.modulus = modulus;
  m.remainder = remainder;
  return m;
}

bool RoundMatcher::matches(Round i) const {
  switch (kind) {
    case Kind::kExact:
      return rounds.count(i) != 0;
    case Kind::kFrom:
      return i >= start;
    case Kind::kMod:
      return i % modulus == remainder;
  }
  return false;
}

QuorumConfig::QuorumConfig(std::uint32_t acceptor_count, std::vector<QuorumRule> rules)
    : acceptor_count_(acceptor_count), rules_(std::move(rules)) {
  if (acceptor_count_ == 0) {
    throw Error("quorum config needs at least one acceptor");
  }
  if (rules_.empty()) {
    throw Error("quorum config needs at least one rule");
  }
  for (const auto& rule : rules_) {
    if (rule.quorums.empty()) {
      throw Error("each rule needs a non-empty quorum set");
    }
    for (const auto& q : rule.quorums) {
      for (AcceptorId a : q.members()) {
        if (a >= acceptor_count_) {
          throw Error("quorum references acceptor " + std::to_string(a) +
                      " outside the configured set");
        }
      }
    }
  }
}

const std::vector<Quorum>& QuorumConfig::quorums_for(Round i) const {
  for (const auto& rule : rules_) {
    if (rule.match.matches(i)) {
      return rule.quorums;
    }
  }
  throw NoRuleMatchesError("no quorum rule matches round " + std::to_string(i));
}

std::vector<Decision> decided_values(const StateTable& table, const QuorumConfig& config,
                                     Round max_round) {
  std::vector<Decision> out;
  for (Round i = 0; i <= max_round; ++i) {
    for (const Quorum& q : config.quorums_for(i)) {
      const RegisterValue& first = table.read(q.members().front(), i);
      if (!first.is_val()) {
        continue;
      }
      bool all_match = true;
      for (AcceptorId a : q.members()) {
        if (table.read(a, i) != first) {
          all_match = false;
          break;
        }
      }
      if (all_match) {
        out.push_back(Decision{i, q, first.value()});
      }
    }
    if (i == max_round) {
      break;  // Round may be unsigned-max in principle; avoid overflow.
    }
  }
  return out;
}

}  // namespace relpax
